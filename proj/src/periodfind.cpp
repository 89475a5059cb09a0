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

#include "qfe/periodfind.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace qfe::periodfind {

namespace {

// FFTW planning is not thread safe.
std::mutex &plan_mutex() {
  static std::mutex m;
  return m;
}

class Dft {
 public:
  explicit Dft(size_t n) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~Dft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Dft(const Dft &) = delete;
  Dft &operator=(const Dft &) = delete;

  void set(size_t i, double re) {
    in_[i][0] = re;
    in_[i][1] = 0;
  }
  void run() { fftw_execute(plan_); }
  double power(size_t i) const {
    return out_[i][0] * out_[i][0] + out_[i][1] * out_[i][1];
  }
  size_t size() const { return n_; }

 private:
  size_t n_;
  fftw_complex *in_, *out_;
  fftw_plan plan_;
};

void check_m(int m) {
  if (m < 1 || m > 26) throw PeriodError("m out of range");
}

// |DFT|^2 of real input, scaled so the result sums to one.
std::vector<double> power_spectrum(Dft &dft) {
  dft.run();
  std::vector<double> p(dft.size());
  double sum = 0;
  for (size_t i = 0; i < p.size(); ++i) sum += p[i] = dft.power(i);
  for (auto &x : p) x /= sum;
  return p;
}

std::vector<uint64_t> factor_u64(uint64_t n) {
  std::vector<uint64_t> f;
  for (uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      f.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

// Carmichael function by trial division.
uint64_t carmichael(uint64_t N) {
  uint64_t lam = 1, n = N;
  for (uint64_t p = 2; p * p <= n || n > 1; ++p) {
    if (p * p > n) p = n;
    if (n % p) continue;
    uint64_t pk = 1;
    int k = 0;
    while (n % p == 0) n /= p, pk *= p, ++k;
    uint64_t l = pk / p * (p - 1);
    if (p == 2 && k >= 3) l /= 2;
    lam = std::lcm(lam, l);
  }
  return lam;
}

struct Powers {
  std::vector<uint64_t> v;
  Powers(uint64_t g, uint64_t N, uint64_t r) : v(r) {
    uint64_t x = 1 % N;
    for (uint64_t k = 0; k < r; ++k) v[k] = x, x = mulmod_u64(x, g, N);
  }
};

std::pair<double, double> column_success_impl(const PeakModel &pm,
                                              const std::vector<uint64_t> &pw,
                                              uint64_t width, uint64_t V,
                                              Dft &dft) {
  uint64_t count = 0;
  for (uint64_t k = 0; k < pm.r; ++k) {
    bool in = (V + pm.N - pw[k]) % pm.N < width;
    dft.set(k, in ? 1.0 : 0.0);
    count += in;
  }
  if (count == 0) return {0, 0};
  dft.run();
  double norm = static_cast<double>(pm.r) * static_cast<double>(count);
  double success = 0;
  for (uint64_t j = 0; j < pm.r; ++j) {
    success += dft.power(j) / norm * pm.peak_success[j];
  }
  return {success, dft.power(0) / norm};
}

}  // namespace

uint64_t multiplicative_order(uint64_t g, uint64_t N) {
  if (N < 2 || std::gcd(g, N) != 1) throw PeriodError("g not a unit mod N");
  uint64_t lam = carmichael(N), r = lam;
  for (uint64_t q : factor_u64(lam)) {
    while (r % q == 0 && powmod_u64(g, r / q, N) == 1 % N) r /= q;
  }
  return r;
}

uint64_t mask_width(double S, uint64_t N) {
  if (!(S >= 0) || S > 1) throw PeriodError("S must lie in [0, 1]");
  double w = std::ceil(S * static_cast<double>(N) - 1e-9);
  return std::clamp<uint64_t>(static_cast<uint64_t>(std::max(w, 1.0)), 1, N);
}

double DenseState::norm() const {
  double s = 0;
  for (double a : amp) s += a * a;
  return std::sqrt(s);
}

DenseState masked_premeasure_state(uint64_t N, uint64_t g, int m, double S) {
  check_m(m);
  if (N < 2 || N > (1u << 16)) throw PeriodError("N outside desk scale");
  if (std::gcd(g, N) != 1) throw PeriodError("g not coprime to N");
  uint64_t rows = 1ull << m;
  if (rows * N > (1ull << 26)) throw PeriodError("dense state too large");
  DenseState s;
  s.N = N;
  s.g = g;
  s.m = m;
  s.width = mask_width(S, N);
  s.amp.assign(rows * N, 0.0);
  double a = 1 / std::sqrt(static_cast<double>(rows * s.width));
  uint64_t x = 1 % N;
  for (uint64_t e = 0; e < rows; ++e) {
    for (uint64_t t = 0; t < s.width; ++t) s.amp[e * N + (t + x) % N] = a;
    x = mulmod_u64(x, g, N);
  }
  return s;
}

double PeakSpectrum::total() const {
  return std::accumulate(prob.begin(), prob.end(), 0.0);
}

uint64_t PeakSpectrum::bucket(uint64_t y) const {
  unsigned __int128 t = static_cast<unsigned __int128>(y) * period;
  t += static_cast<unsigned __int128>(1) << (m - 1);
  return static_cast<uint64_t>(t >> m) % period;
}

std::vector<double> PeakSpectrum::bucket_masses() const {
  std::vector<double> out(period, 0.0);
  for (uint64_t y = 0; y < prob.size(); ++y) out[bucket(y)] += prob[y];
  return out;
}

PeakSpectrum collapse_and_spectrum(const DenseState &s, uint64_t V) {
  if (V >= s.N) throw PeriodError("V out of range");
  size_t rows = size_t{1} << s.m;
  Dft dft(rows);
  double marginal = 0;
  for (size_t e = 0; e < rows; ++e) {
    double a = s.amplitude(e, V);
    marginal += a * a;
    dft.set(e, a);
  }
  if (marginal == 0) throw PeriodError("V has zero marginal");
  PeakSpectrum ps;
  ps.m = s.m;
  ps.period = multiplicative_order(s.g, s.N);
  ps.prob = power_spectrum(dft);
  return ps;
}

PeakSpectrum periodic_spectrum(uint64_t P, const std::vector<uint64_t> &residues,
                               int m) {
  check_m(m);
  if (P == 0 || residues.empty()) throw PeriodError("empty residue set");
  std::vector<uint8_t> in(P, 0);
  for (uint64_t x : residues) {
    if (x >= P) throw PeriodError("residue out of range");
    in[x] = 1;
  }
  size_t rows = size_t{1} << m;
  Dft dft(rows);
  for (size_t e = 0; e < rows; ++e) dft.set(e, in[e % P]);
  PeakSpectrum ps;
  ps.m = m;
  ps.period = P;
  ps.prob = power_spectrum(dft);
  return ps;
}

std::vector<double> residue_peak_probs(uint64_t P,
                                       const std::vector<uint64_t> &residues) {
  if (P == 0 || residues.empty()) throw PeriodError("empty residue set");
  Dft dft(P);
  for (uint64_t k = 0; k < P; ++k) dft.set(k, 0);
  for (uint64_t x : residues) dft.set(x % P, 1);
  return power_spectrum(dft);
}

bool recovers_order(uint64_t y, int m, uint64_t r, uint64_t N) {
  uint64_t n = y, d = 1ull << m;
  uint64_t q2 = 1, q1 = 0;
  while (d != 0) {
    uint64_t a = n / d;
    unsigned __int128 q = static_cast<unsigned __int128>(a) * q1 + q2;
    if (q > N) break;
    if (q == r) return true;
    q2 = q1;
    q1 = static_cast<uint64_t>(q);
    uint64_t t = n % d;
    n = d;
    d = t;
  }
  return false;
}

Rational peak_prob_random_R(uint64_t P, uint64_t w, uint64_t k) {
  if (w < 1 || w > P) throw PeriodError("need 1 <= w <= P");
  if (k >= P) throw PeriodError("k out of range");
  Rational r;
  if (k == 0) {
    r = Rational(big_from_u64(w), big_from_u64(P));
  } else {
    r = Rational(big_from_u64(P - w), big_from_u64(P) * big_from_u64(P - 1));
  }
  r.canonicalize();
  return r;
}

std::vector<ExhaustiveR> exhaustive_random_R(uint64_t P) {
  if (P < 1 || P > 30) throw PeriodError("exhaustive averaging needs P <= 30");
  const uint64_t full = (1ull << P) - 1;
  const uint64_t half = P / 2;
  // Pair counts c(d) = #{x in R : x + d in R}, summed by subset size.
  const size_t chunks = P > 16 ? 256 : 1;
  const uint64_t per = (full + 1) / chunks;
  std::vector<std::vector<uint64_t>> acc(
      chunks, std::vector<uint64_t>((P + 1) * (half + 1), 0));
  parallel_for(chunks, [&](size_t c) {
    auto &a = acc[c];
    for (uint64_t mask = c * per; mask < (c + 1) * per; ++mask) {
      uint64_t w = static_cast<uint64_t>(std::popcount(mask));
      uint64_t *row = &a[w * (half + 1)];
      for (uint64_t d = 1; d <= half; ++d) {
        uint64_t rot = ((mask << d) | (mask >> (P - d))) & full;
        row[d] += static_cast<uint64_t>(std::popcount(mask & rot));
      }
    }
  });
  std::vector<ExhaustiveR> out;
  for (uint64_t w = 1; w <= P; ++w) {
    ExhaustiveR e;
    e.P = P;
    e.w = w;
    BigInt binom;
    mpz_bin_uiui(binom.get_mpz_t(), P, w);
    e.subsets = big_to_u64(binom);
    std::vector<uint64_t> c(P, 0);
    for (uint64_t d = 1; d <= half; ++d) {
      for (auto &a : acc) c[d] += a[w * (half + 1) + d];
      c[P - d] = c[d];
    }
    e.shifts_uniform = true;
    BigInt shift_sum = 0;
    for (uint64_t d = 1; d < P; ++d) {
      shift_sum += big_from_u64(c[d]);
      if (c[d] != c[1]) e.shifts_uniform = false;
    }
    BigInt diag = big_from_u64(w) * binom;
    BigInt denom = big_from_u64(P) * big_from_u64(w) * binom;
    // Sum over d != 0 of omega^(k d) is P - 1 at k = 0 and -1 otherwise.
    e.zero = Rational(diag + shift_sum, denom);
    e.zero.canonicalize();
    if (e.shifts_uniform && P > 1) {
      e.nonzero = Rational(diag - big_from_u64(c[1]), denom);
      e.nonzero.canonicalize();
    }
    out.push_back(e);
  }
  return out;
}

SampledR random_R_monte_carlo(uint64_t P, uint64_t w, uint64_t trials,
                              uint64_t seed) {
  if (P < 1 || P > (1u << 12)) throw PeriodError("P out of range");
  if (w < 1 || w > P) throw PeriodError("need 1 <= w <= P");
  if (trials < 2) throw PeriodError("need at least two trials");
  auto rng = SeedSplitter(seed).rng("random_R", P * 4096 + w);
  std::vector<uint64_t> pool(P);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<double> sum(P, 0), sq(P, 0);
  Dft dft(P);
  double norm = static_cast<double>(P) * static_cast<double>(w);
  for (uint64_t t = 0; t < trials; ++t) {
    for (uint64_t i = 0; i < w; ++i) {
      std::uniform_int_distribution<uint64_t> pick(i, P - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    for (uint64_t k = 0; k < P; ++k) dft.set(k, 0);
    for (uint64_t i = 0; i < w; ++i) dft.set(pool[i], 1);
    dft.run();
    for (uint64_t k = 0; k < P; ++k) {
      double b = dft.power(k) / norm;
      sum[k] += b;
      sq[k] += b * b;
    }
  }
  SampledR out;
  double n = static_cast<double>(trials);
  for (uint64_t k = 0; k < P; ++k) {
    double mean = sum[k] / n;
    double var = std::max(0.0, (sq[k] - n * mean * mean) / (n - 1));
    out.mean.push_back(mean);
    out.stderr_.push_back(std::sqrt(var / n));
  }
  return out;
}

PeakModel peak_model(uint64_t N, uint64_t g, int m) {
  PeakModel pm;
  pm.N = N;
  pm.g = g;
  pm.r = multiplicative_order(g, N);
  if (pm.r < 2) throw PeriodError("degenerate period");
  if (m == 0) m = 2 * len_u64(pm.r) + 1;
  check_m(m);
  pm.m = m;
  const uint64_t size = 1ull << m;
  const uint64_t J = size / pm.r;
  std::vector<double> mass(pm.r, 0), good(pm.r, 0);
  PeakSpectrum shape;
  shape.m = m;
  shape.period = pm.r;
  const double scale = std::numbers::pi / static_cast<double>(size);
  for (uint64_t y = 0; y < size; ++y) {
    // One coset of J evenly spaced exponents: a Dirichlet kernel.
    unsigned __int128 yr = static_cast<unsigned __int128>(y) * pm.r;
    double den = std::sin(scale * static_cast<double>(yr % size));
    double p;
    if (std::abs(den) < 1e-300) {
      p = static_cast<double>(J) / static_cast<double>(size);
    } else {
      double num = std::sin(scale * static_cast<double>((yr * J) % size));
      p = num * num / (den * den) / static_cast<double>(J * size);
    }
    uint64_t j = shape.bucket(y);
    mass[j] += p;
    if (recovers_order(y, m, pm.r, N)) good[j] += p;
  }
  pm.peak_success.resize(pm.r);
  for (uint64_t j = 0; j < pm.r; ++j) {
    pm.peak_success[j] = mass[j] > 0 ? good[j] / mass[j] : 0;
    pm.unmasked_success += pm.peak_success[j] / static_cast<double>(pm.r);
  }
  return pm;
}

std::pair<double, double> column_success(const PeakModel &pm,
                                         const std::vector<uint64_t> &powers,
                                         uint64_t width, uint64_t V) {
  if (powers.size() != pm.r) throw PeriodError("power table size");
  Dft dft(pm.r);
  return column_success_impl(pm, powers, width, V, dft);
}

std::pair<double, double> binomial_lr_interval(double x, double n,
                                               double threshold) {
  if (n <= 0 || x < 0 || x > n) throw PeriodError("bad binomial counts");
  auto ll = [&](double p) {
    double a = x > 0 ? x * std::log(p) : 0;
    double b = n - x > 0 ? (n - x) * std::log1p(-p) : 0;
    return a + b;
  };
  double phat = x / n;
  double top = ll(std::clamp(phat, 1e-300, 1 - 1e-16));
  auto inside = [&](double p) { return 2 * (top - ll(p)) <= threshold; };
  auto solve = [&](double in, double out) {
    for (int i = 0; i < 200; ++i) {
      double mid = (in + out) / 2;
      (inside(mid) ? in : out) = mid;
    }
    return in;
  };
  double lo = x <= 0 ? 0 : solve(phat, 0);
  double hi = x >= n ? 1 : solve(phat, 1);
  return {lo, hi};
}

Suppression suppression_experiment(const PeakModel &pm, double S,
                                   uint64_t shots, uint64_t seed) {
  if (shots == 0) throw PeriodError("need shots");
  Suppression out;
  out.N = pm.N;
  out.g = pm.g;
  out.r = pm.r;
  out.m = pm.m;
  out.S = S;
  out.width = mask_width(S, pm.N);
  out.shots = shots;
  Powers pw(pm.g, pm.N, pm.r);
  Dft dft(pm.r);
  auto rng = SeedSplitter(seed).rng("suppression", pm.N * 1000003 + out.width);
  std::uniform_int_distribution<uint64_t> pick_e(0, (1ull << pm.m) - 1);
  std::uniform_int_distribution<uint64_t> pick_s(0, out.width - 1);
  std::unordered_map<uint64_t, std::pair<double, double>> cache;
  double succ = 0, zero = 0;
  for (uint64_t t = 0; t < shots; ++t) {
    uint64_t e = pick_e(rng);
    uint64_t V = (pick_s(rng) + pw.v[e % pm.r]) % pm.N;
    auto it = cache.find(V);
    if (it == cache.end()) {
      it = cache.emplace(V, column_success_impl(pm, pw.v, out.width, V, dft))
               .first;
    }
    // Exact success probability of the sampled column rather than a coin.
    succ += it->second.first;
    zero += it->second.second;
  }
  double n = static_cast<double>(shots);
  out.masked = succ / n;
  out.zero_peak_masked = zero / n;
  out.unmasked = pm.unmasked_success;
  out.zero_peak_unmasked = 1.0 / static_cast<double>(pm.r);
  out.suppression = out.masked / out.unmasked;
  auto ci = binomial_lr_interval(succ, n, 3.841458820694124);
  out.ci_low = ci.first / out.unmasked;
  out.ci_high = ci.second / out.unmasked;
  auto wide = binomial_lr_interval(succ, n, 2 * std::log(100.0));
  out.bespoke_low = wide.first / out.unmasked;
  out.bespoke_high = wide.second / out.unmasked;
  return out;
}

Suppression suppression_experiment(uint64_t N, uint64_t g, double S,
                                   uint64_t shots, uint64_t seed, int m) {
  return suppression_experiment(peak_model(N, g, m), S, shots, seed);
}

uint64_t max_order_generator(uint64_t N) {
  uint64_t lam = carmichael(N);
  auto qs = factor_u64(lam);
  for (uint64_t g = 2; g < N; ++g) {
    if (std::gcd(g, N) != 1) continue;
    bool full = std::all_of(qs.begin(), qs.end(), [&](uint64_t q) {
      return powmod_u64(g, lam / q, N) != 1;
    });
    if (full) return g;
  }
  throw PeriodError("no generator");
}

}  // namespace qfe::periodfind
