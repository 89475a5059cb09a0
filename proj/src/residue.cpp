// Copyright 2026 The qfe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qfe/residue.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace qfe {

Modulus::Modulus(BigInt v) : value(std::move(v)) {
  if (value < 3 || mpz_even_p(value.get_mpz_t())) {
    throw std::invalid_argument("modulus must be odd and at least 3");
  }
  n = len(value);
}

Rational modular_deviation(const BigInt &a, const BigInt &N) {
  if (N < 2) throw std::invalid_argument("deviation needs N >= 2");
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), N.get_mpz_t());
  BigInt other = N - r;
  Rational q(std::min(r, other), N);
  q.canonicalize();
  return q;
}

namespace {

// Odd-only sieve of [lo, hi).
std::vector<uint64_t> sieve_range(uint64_t lo, uint64_t hi) {
  std::vector<uint64_t> out;
  if (hi <= 2) return out;
  uint64_t root = static_cast<uint64_t>(std::sqrt(static_cast<double>(hi))) + 1;
  std::vector<bool> small(root + 1, true);
  std::vector<uint64_t> base;
  for (uint64_t i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(i);
    for (uint64_t k = i * i; k <= root; k += i) small[k] = false;
  }
  std::vector<bool> comp(hi - lo, false);
  for (uint64_t p : base) {
    uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
    for (uint64_t k = start; k < hi; k += p) comp[k - lo] = true;
  }
  for (uint64_t x = std::max<uint64_t>(lo, 2); x < hi; ++x) {
    if (!comp[x - lo]) out.push_back(x);
  }
  return out;
}

BigInt product_tree(const std::vector<uint64_t> &v, size_t lo, size_t hi) {
  if (hi - lo == 0) return 1;
  if (hi - lo == 1) return big_from_u64(v[lo]);
  size_t mid = (lo + hi) / 2;
  BigInt a = product_tree(v, lo, mid);
  BigInt b = product_tree(v, mid, hi);
  return a * b;
}

bool deviation_below(const BigInt &x, const BigInt &N, int f) {
  // min(x, N - x) * 2^f < N
  BigInt d = std::min(x, BigInt(N - x));
  BigInt lhs = d;
  mpz_mul_2exp(lhs.get_mpz_t(), d.get_mpz_t(), static_cast<unsigned>(f));
  return lhs < N;
}

BigInt min_side(const BigInt &x, const BigInt &N) {
  return std::min(x, BigInt(N - x));
}

}  // namespace

std::vector<uint64_t> primes_with_bits(int ell) {
  if (ell < 2 || ell > 40) throw std::invalid_argument("ell out of range");
  return sieve_range(1ull << (ell - 1), 1ull << ell);
}

uint64_t prime_count_with_bits(int ell) {
  static std::mutex mu;
  static std::map<int, uint64_t> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(ell);
  if (it != cache.end()) return it->second;
  uint64_t c = primes_with_bits(ell).size();
  cache[ell] = c;
  return c;
}

constexpr size_t kNone = ~size_t{0};

ResidueSystem find_prime_set(const Modulus &N, uint64_t W1, int ell, int f,
                             const PrimeExclusion &excluded,
                             const SearchOptions &opts, SearchStats *stats) {
  auto t0 = std::chrono::steady_clock::now();
  SearchStats local;
  SearchStats &st = stats ? *stats : local;
  st = SearchStats{};
  if (W1 == 0) throw std::invalid_argument("W1 must be positive");
  int threads = opts.threads > 0 ? opts.threads : thread_count();

  std::vector<uint64_t> all = primes_with_bits(ell);
  std::vector<char> keep(all.size(), 0);
  parallel_for(
      all.size(),
      [&](size_t i) {
        uint64_t p = all[i];
        bool bad = mpz_fdiv_ui(N.value.get_mpz_t(), p) == 0 ||
                   (excluded && excluded(p));
        keep[i] = bad ? 0 : 1;
      },
      threads);
  std::vector<uint64_t> cand;
  for (size_t i = 0; i < all.size(); ++i) {
    if (keep[i]) cand.push_back(all[i]);
  }
  st.candidates = cand.size();
  st.excluded = all.size() - cand.size();

  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, N.value.get_mpz_t());
  double target =
      static_cast<double>(W1) * (static_cast<double>(exp2) + std::log2(mant));
  // Float slack against the exact check performed at the end.
  double need = target + 1e-9 * target + 1e-6;

  SeedSplitter seeds(opts.seed);
  std::mt19937_64 rng = seeds.rng("residue.init");
  std::shuffle(cand.begin(), cand.end(), rng);

  std::vector<uint64_t> set, pool;
  double logsum = 0;
  size_t idx = 0;
  while (idx < cand.size() && logsum < need) {
    logsum += std::log2(static_cast<double>(cand[idx]));
    set.push_back(cand[idx++]);
  }
  if (logsum < need) {
    throw ResidueError(ResidueError::Kind::kInsufficientPrimes,
                       "not enough admissible " + std::to_string(ell) +
                           "-bit primes for L >= N^W1");
  }
  pool.assign(cand.begin() + static_cast<long>(idx), cand.end());

  const BigInt &Nv = N.value;
  BigInt x = product_tree(set, 0, set.size()) % Nv;
  std::vector<BigInt> inv(set.size());
  parallel_for(
      set.size(),
      [&](size_t i) {
        BigInt p = big_from_u64(set[i]);
        mpz_invert(inv[i].get_mpz_t(), p.get_mpz_t(), Nv.get_mpz_t());
      },
      threads);

  struct Proposal {
    bool found = false;
    BigInt value;
    BigInt side;
    size_t out_index = 0, in_index = 0;
    size_t out2 = kNone, in2 = kNone;
  };
  uint64_t round = 0;
  while (!deviation_below(x, Nv, f)) {
    if (pool.empty() || st.swaps_tried >= opts.budget) {
      throw ResidueError(ResidueError::Kind::kBudgetExhausted,
                         "deviation target not reached within budget");
    }
    BigInt best_side = min_side(x, Nv);
    std::vector<Proposal> props(static_cast<size_t>(opts.workers));
    parallel_for(
        props.size(),
        [&](size_t w) {
          std::mt19937_64 r =
              seeds.rng("residue.swap", round * props.size() + w);
          std::uniform_int_distribution<size_t> pick_out(0, set.size() - 1);
          std::uniform_int_distribution<size_t> pick_in(0, pool.size() - 1);
          // Pair swaps widen the neighbourhood once single swaps stall on
          // small candidate lists.
          bool pairs_ok = set.size() >= 2 && pool.size() >= 2;
          Proposal &pr = props[w];
          pr.side = best_side;
          BigInt y, side;
          for (uint64_t k = 0; k < opts.chunk; ++k) {
            size_t o = pick_out(r), i = pick_in(r);
            size_t o2 = kNone, i2 = kNone;
            if (pairs_ok && (r() & 1)) {
              o2 = pick_out(r);
              i2 = pick_in(r);
              if (o2 == o || i2 == i) continue;
            }
            double ls = logsum - std::log2(static_cast<double>(set[o])) +
                        std::log2(static_cast<double>(pool[i]));
            if (o2 != kNone) {
              ls += std::log2(static_cast<double>(pool[i2])) -
                    std::log2(static_cast<double>(set[o2]));
            }
            if (ls < need) continue;
            mpz_mul_ui(y.get_mpz_t(), x.get_mpz_t(), pool[i]);
            y *= inv[o];
            if (o2 != kNone) {
              mpz_mul_ui(y.get_mpz_t(), y.get_mpz_t(), pool[i2]);
              y *= inv[o2];
            }
            mpz_fdiv_r(y.get_mpz_t(), y.get_mpz_t(), Nv.get_mpz_t());
            side = min_side(y, Nv);
            if (side < pr.side) {
              pr.found = true;
              pr.side = side;
              pr.value = y;
              pr.out_index = o;
              pr.in_index = i;
              pr.out2 = o2;
              pr.in2 = i2;
            }
          }
        },
        threads);
    st.swaps_tried += opts.chunk * props.size();
    ++round;
    int winner = -1;
    for (size_t w = 0; w < props.size(); ++w) {
      if (!props[w].found) continue;
      if (winner < 0 || props[w].side < props[static_cast<size_t>(winner)].side) {
        winner = static_cast<int>(w);
      }
    }
    if (winner < 0) continue;
    Proposal &pr = props[static_cast<size_t>(winner)];
    auto apply = [&](size_t o, size_t i) {
      logsum += std::log2(static_cast<double>(pool[i])) -
                std::log2(static_cast<double>(set[o]));
      std::swap(set[o], pool[i]);
      BigInt p = big_from_u64(set[o]);
      mpz_invert(inv[o].get_mpz_t(), p.get_mpz_t(), Nv.get_mpz_t());
    };
    apply(pr.out_index, pr.in_index);
    if (pr.out2 != kNone) apply(pr.out2, pr.in2);
    x = pr.value;
    ++st.swaps_accepted;
  }

  ResidueSystem sys;
  sys.primes = set;
  std::sort(sys.primes.begin(), sys.primes.end());
  sys.ell = ell;
  sys.f_target = f;
  sys.w1_count = W1;
  sys.modulus = Nv;
  sys.L = product_tree(sys.primes, 0, sys.primes.size());
  sys.L_mod_N = x;
  sys.deviation = modular_deviation(sys.L, Nv);
  BigInt bound;
  mpz_pow_ui(bound.get_mpz_t(), Nv.get_mpz_t(), W1);
  if (sys.L < bound) {
    // The float slack on the log-sum makes this unreachable in practice.
    throw ResidueError(ResidueError::Kind::kInvalid,
                       "internal: L < N^W1 after search");
  }
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
                   .count();
  return sys;
}

std::string check_system(const ResidueSystem &sys, const Modulus &N) {
  if (sys.modulus != N.value) return "modulus mismatch";
  std::set<uint64_t> seen;
  for (uint64_t p : sys.primes) {
    if (!is_prime_u64(p)) return "non-prime " + std::to_string(p);
    if (len_u64(p + 1) != sys.ell) return "wrong bit length " + std::to_string(p);
    if (!seen.insert(p).second) return "duplicate prime " + std::to_string(p);
  }
  BigInt L = product_tree(sys.primes, 0, sys.primes.size());
  if (L != sys.L) return "L is not the product of the primes";
  if (L % N.value != sys.L_mod_N) return "stored L mod N is stale";
  Rational dev = modular_deviation(L, N.value);
  if (dev != sys.deviation) return "stored deviation is stale";
  if (!deviation_below(sys.L_mod_N, N.value, sys.f_target)) {
    return "deviation not below 2^-f";
  }
  BigInt bound;
  mpz_pow_ui(bound.get_mpz_t(), N.value.get_mpz_t(), sys.w1_count);
  if (L < bound) return "L < N^W1";
  return "";
}

ContributionTable contribution_table(const ResidueSystem &sys,
                                     const Modulus &N, int f) {
  if (f < 0 || f > N.n || f > 64) throw std::invalid_argument("bad f");
  ContributionTable ct;
  ct.t = N.n - f;
  BigInt Nt = N.value >> ct.t;
  ct.n_shift = big_to_u64(Nt);
  size_t P = sys.primes.size();
  ct.u.resize(P);
  ct.C.assign(P, std::vector<uint64_t>(static_cast<size_t>(sys.ell)));
  parallel_for(P, [&](size_t j) {
    uint64_t p = sys.primes[j];
    BigInt rest = sys.L / p;
    uint64_t r = mpz_fdiv_ui(rest.get_mpz_t(), p);
    ct.u[j] = rest * invmod_u64(r, p);
    BigInt v;
    for (int k = 0; k < sys.ell; ++k) {
      mpz_mul_2exp(v.get_mpz_t(), ct.u[j].get_mpz_t(), static_cast<unsigned>(k));
      v %= sys.L;
      v %= N.value;
      v >>= ct.t;
      ct.C[j][static_cast<size_t>(k)] = big_to_u64(v) % ct.n_shift;
    }
  });
  return ct;
}

BigInt crt_reconstruct(const std::vector<uint64_t> &primes,
                       const std::vector<uint64_t> &residues) {
  if (primes.size() != residues.size()) {
    throw std::invalid_argument("residue count does not match prime count");
  }
  BigInt L = product_tree(primes, 0, primes.size());
  BigInt acc = 0;
  for (size_t j = 0; j < primes.size(); ++j) {
    uint64_t p = primes[j];
    if (residues[j] >= p) throw std::invalid_argument("residue out of range");
    BigInt rest = L / p;
    uint64_t inv = invmod_u64(mpz_fdiv_ui(rest.get_mpz_t(), p), p);
    acc += rest * mulmod_u64(inv, residues[j], p);
  }
  return acc % L;
}

BigInt crt_reconstruct(const ResidueSystem &sys,
                       const std::vector<uint64_t> &residues) {
  return crt_reconstruct(sys.primes, residues);
}

uint64_t primitive_root(uint64_t p) {
  if (p == 2) return 1;
  if (!is_prime_u64(p)) throw DlogError("no generator: modulus is not prime");
  std::vector<uint64_t> factors;
  uint64_t m = p - 1;
  for (uint64_t q = 2; q * q <= m; ++q) {
    if (m % q) continue;
    factors.push_back(q);
    while (m % q == 0) m /= q;
  }
  if (m > 1) factors.push_back(m);
  for (uint64_t g = 2; g < p; ++g) {
    bool ok = true;
    for (uint64_t q : factors) {
      if (powmod_u64(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw DlogError("no generator found");
}

DiscreteLog::DiscreteLog(uint64_t p, uint64_t g, uint64_t expected_queries)
    : p_(p), g_(g) {
  if (p > (1ull << 32)) throw std::invalid_argument("prime too large");
  uint64_t order = p - 1;
  double ideal = std::sqrt(static_cast<double>(order) *
                           static_cast<double>(std::max<uint64_t>(1, expected_queries)));
  baby_ = std::clamp<uint64_t>(static_cast<uint64_t>(std::ceil(ideal)), 1,
                               std::min<uint64_t>(order, 1ull << 20));
  table_.reserve(baby_);
  uint64_t cur = 1;
  for (uint64_t i = 0; i < baby_; ++i) {
    table_.emplace_back(static_cast<uint32_t>(cur), static_cast<uint32_t>(i));
    cur = mulmod_u64(cur, g, p);
  }
  std::sort(table_.begin(), table_.end());
  giant_factor_ = invmod_u64(powmod_u64(g, baby_, p), p);
}

uint64_t DiscreteLog::log(uint64_t x) const {
  x %= p_;
  if (x == 0) throw DlogError("logarithm of 0 is undefined");
  uint64_t order = p_ - 1;
  uint64_t steps = (order + baby_ - 1) / baby_;
  uint64_t y = x;
  for (uint64_t k = 0; k <= steps; ++k) {
    auto it = std::lower_bound(
        table_.begin(), table_.end(),
        std::make_pair(static_cast<uint32_t>(y), static_cast<uint32_t>(0)));
    if (it != table_.end() && it->first == y) {
      return (k * baby_ + it->second) % order;
    }
    y = mulmod_u64(y, giant_factor_, p_);
  }
  throw DlogError("element outside the generated group");
}

WindowedMultipliers window_products(const std::vector<BigInt> &multipliers,
                                    int window, const BigInt &N) {
  if (window < 1) throw std::invalid_argument("window must be positive");
  WindowedMultipliers w;
  w.window = window;
  size_t m = multipliers.size();
  size_t count = (m + static_cast<size_t>(window) - 1) / static_cast<size_t>(window);
  w.products.resize(count);
  for (size_t i = 0; i < count; ++i) {
    size_t base = i * static_cast<size_t>(window);
    size_t bits = std::min<size_t>(static_cast<size_t>(window), m - base);
    auto &row = w.products[i];
    row.resize(size_t{1} << bits);
    row[0] = 1;
    for (size_t v = 1; v < row.size(); ++v) {
      size_t top = 63 - static_cast<size_t>(__builtin_clzll(v));
      row[v] = row[v & ~(size_t{1} << top)] * multipliers[base + top] % N;
    }
  }
  return w;
}

bool divides_any(uint64_t p, const WindowedMultipliers &w) {
  for (const auto &row : w.products) {
    for (const auto &x : row) {
      if (mpz_fdiv_ui(x.get_mpz_t(), p) == 0) return true;
    }
  }
  return false;
}

int64_t DlogTable::diff(size_t j, size_t i, size_t v) const {
  int64_t cur = D[j][i][v];
  int64_t prev = j == 0 ? 0 : D[j - 1][i][v];
  return cur - prev;
}

DlogTable dlog_tables(const ResidueSystem &sys, const WindowedMultipliers &w) {
  DlogTable t;
  size_t P = sys.primes.size();
  t.generators.resize(P);
  t.D.resize(P);
  uint64_t entries = 0;
  for (const auto &row : w.products) entries += row.size();
  parallel_for(P, [&](size_t j) {
    uint64_t p = sys.primes[j];
    uint64_t g = primitive_root(p);
    t.generators[j] = g;
    DiscreteLog dl(p, g, entries);
    auto &Dj = t.D[j];
    Dj.resize(w.products.size());
    for (size_t i = 0; i < w.products.size(); ++i) {
      Dj[i].resize(w.products[i].size());
      for (size_t v = 0; v < w.products[i].size(); ++v) {
        uint64_t r = mpz_fdiv_ui(w.products[i][v].get_mpz_t(), p);
        if (r == 0) {
          throw DlogError("multiplier divisible by residue prime " +
                          std::to_string(p));
        }
        Dj[i][v] = static_cast<uint32_t>(dl.log(r));
      }
    }
  });
  return t;
}

void write_system(std::ostream &out, const ResidueSystem &sys) {
  out << "qfe-residue-system 1\n";
  out << "modulus " << big_to_hex(sys.modulus) << "\n";
  out << "ell " << sys.ell << "\n";
  out << "f " << sys.f_target << "\n";
  out << "w1 " << sys.w1_count << "\n";
  out << "primes " << sys.primes.size() << "\n";
  for (uint64_t p : sys.primes) out << p << "\n";
  out << "deviation " << sys.deviation.get_num().get_str() << "/"
      << sys.deviation.get_den().get_str() << "\n";
  out << "end\n";
}

ResidueSystem read_system(std::istream &in) {
  auto fail = [](const std::string &why) {
    return ResidueError(ResidueError::Kind::kInvalid, "residue file: " + why);
  };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "qfe-residue-system" || version != 1) {
    throw fail("bad header");
  }
  ResidueSystem sys;
  std::string hex, frac;
  size_t count = 0;
  if (!(in >> key >> hex) || key != "modulus") throw fail("modulus");
  sys.modulus = big_from_hex(hex);
  if (!(in >> key >> sys.ell) || key != "ell") throw fail("ell");
  if (!(in >> key >> sys.f_target) || key != "f") throw fail("f");
  if (!(in >> key >> sys.w1_count) || key != "w1") throw fail("w1");
  if (!(in >> key >> count) || key != "primes") throw fail("primes");
  sys.primes.resize(count);
  for (auto &p : sys.primes) {
    if (!(in >> p)) throw fail("prime list");
  }
  if (!(in >> key >> frac) || key != "deviation") throw fail("deviation");
  if (!(in >> key) || key != "end") throw fail("trailer");
  sys.L = product_tree(sys.primes, 0, sys.primes.size());
  sys.L_mod_N = sys.L % sys.modulus;
  sys.deviation = modular_deviation(sys.L, sys.modulus);
  Rational stored(frac);
  stored.canonicalize();
  if (stored != sys.deviation) throw fail("deviation does not match primes");
  return sys;
}

}  // namespace qfe
