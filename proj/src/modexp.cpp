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

#include "qfe/modexp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qfe {

using qsim::BranchScope;
using qsim::OpKind;
using qsim::QuintView;
using qsim::Routine;
using qsim::RoutineScope;
using qsim::SimState;
using qsim::UncomputeInfo;
using qsim::Vent;

namespace {

uint64_t low_mask(int bits) {
  return bits >= 64 ? ~0ull : ((1ull << bits) - 1);
}

uint64_t bits_of(const std::vector<uint64_t> &words, int lo, int width) {
  uint64_t v = 0;
  for (int b = 0; b < width; ++b) {
    int pos = lo + b;
    size_t w = static_cast<size_t>(pos / 64);
    if (w < words.size() && ((words[w] >> (pos % 64)) & 1)) v |= 1ull << b;
  }
  return v;
}

std::vector<uint64_t> complement(const std::vector<uint64_t> &t,
                                 uint64_t mod) {
  std::vector<uint64_t> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) out[i] = mod - t[i];
  return out;
}

// target -= table[addr] (mod `mod`) with an underflow qubit Q. Leaves the X
// measurement result of Q, which owes the phase (-1)^(b Q) with
// Q = [target >= mod - table[addr]].
uint64_t mod_subtract(SimState &s, const QuintView &target,
                      const QuintView &addr, const std::vector<uint64_t> &table,
                      uint64_t mod, Vent &vent) {
  QuintView x = s.alloc(target.size(), "x");
  s.lookup(table, addr, x);
  QuintView q = s.alloc(1, "q");
  s.sub(target.concat(q), x);
  s.unlookup(table, x, vent);
  s.add_ghz(target, q, mod);
  return s.del_measure_x(q, "q");
}

// Pays (-1)^[target >= comp[addr]] when taken, as a 50% branch.
void branch_fix(SimState &s, bool taken, const QuintView &target,
                const QuintView &addr, const std::vector<uint64_t> &comp,
                Vent &vent) {
  BranchScope scope(s, taken);
  if (!taken) return;
  QuintView y = s.alloc(target.size(), "y");
  s.lookup(comp, addr, y);
  s.flip_if_geq(target, y);
  s.unlookup(comp, y, vent);
}

uint64_t pow_2k(uint64_t g, int k, uint64_t p) {
  uint64_t c = g % p;
  for (int i = 0; i < k; ++i) c = mulmod_u64(c, c, p);
  return c;
}

QuintView window(const QuintView &v, int i, int w) {
  return v.slice(i * w, (i + 1) * w);
}

std::vector<uint64_t> exponent_table(uint64_t p, uint64_t g, int width) {
  std::vector<uint64_t> t(size_t{1} << width);
  uint64_t acc = 1 % p;
  for (size_t a = 0; a < t.size(); ++a) {
    t[a] = acc;
    acc = mulmod_u64(acc, g, p);
  }
  return t;
}

}  // namespace

int eh_y_bits(int n, int s) { return static_cast<int>(ceil_div(n, 2ull * s)); }

std::vector<uint64_t> multiply_table(uint64_t p, uint64_t base, bool inverse,
                                     int xw, int yw, int shift) {
  uint64_t b = inverse ? invmod_u64(base % p, p) : base % p;
  uint64_t scale = powmod_u64(2, static_cast<uint64_t>(shift), p);
  std::vector<uint64_t> t(size_t{1} << (xw + yw));
  uint64_t bx = 1 % p;
  for (uint64_t x = 0; x < (1ull << xw); ++x) {
    uint64_t k = mulmod_u64(bx, scale, p);
    for (uint64_t y = 0; y < (1ull << yw); ++y) {
      t[x + (y << xw)] = mulmod_u64(k, y % p, p);
    }
    bx = mulmod_u64(bx, b, p);
  }
  return t;
}

ExecutionConfig build_config(const Modulus &N, const BigInt &g,
                             const AlgorithmParams &params,
                             const ConfigOptions &opts) {
  std::string why = params.validate();
  if (!why.empty()) throw std::invalid_argument(why);
  if (params.n != N.n) {
    throw std::invalid_argument("params.n does not match the modulus");
  }
  BigInt gg = g % N.value;
  BigInt gcd;
  mpz_gcd(gcd.get_mpz_t(), gg.get_mpz_t(), N.value.get_mpz_t());
  if (gg <= 1 || gcd != 1) throw std::invalid_argument("g must be a unit > 1");

  ExecutionConfig c;
  c.N = N;
  c.g = gg;
  c.params = params;
  c.eh_mode = opts.eh_mode;
  c.y_bits = opts.eh_mode ? eh_y_bits(N.n, params.s) : 0;
  if (c.y_bits >= params.m) {
    throw std::invalid_argument("m too small for the y register");
  }
  c.x_bits = params.m - c.y_bits;
  BigInt exp = N.value - 1;
  mpz_powm(c.h.get_mpz_t(), gg.get_mpz_t(), exp.get_mpz_t(),
           N.value.get_mpz_t());

  BigInt cur = gg;
  for (int k = 0; k < c.x_bits; ++k) {
    c.multipliers.push_back(cur);
    cur = cur * cur % N.value;
  }
  cur = c.h;
  for (int k = 0; k < c.y_bits; ++k) {
    c.multipliers.push_back(cur);
    cur = cur * cur % N.value;
  }
  c.windows = window_products(c.multipliers, params.w1, N.value);

  const auto &windows = c.windows;
  const BigInt &Nv = N.value;
  PrimeExclusion excluded = [&windows, &Nv](uint64_t p) {
    return mpz_fdiv_ui(Nv.get_mpz_t(), p) == 0 || divides_any(p, windows);
  };
  c.system = find_prime_set(N, params.W1(), params.ell, params.f, excluded,
                            opts.search);
  c.contrib = contribution_table(c.system, N, params.f);
  c.dlogs = dlog_tables(c.system, c.windows);
  c.t = N.n - params.f;
  c.Nt = c.contrib.n_shift;

  const size_t P = c.system.primes.size();
  const int sw = c.sum_width();
  const uint64_t smask = low_mask(sw);
  const int W4 = params.W4();
  c.primes.resize(P);
  for (size_t j = 0; j < P; ++j) {
    PrimeTables &pt = c.primes[j];
    pt.p = c.system.primes[j];
    pt.g = c.dlogs.generators[j];
    pt.loop1.resize(c.windows.products.size());
    for (size_t i = 0; i < pt.loop1.size(); ++i) {
      auto &row = pt.loop1[i];
      row.resize(c.windows.products[i].size());
      for (size_t v = 0; v < row.size(); ++v) {
        row[v] = static_cast<uint64_t>(c.dlogs.diff(j, i, v)) & smask;
      }
    }
    pt.loop4.resize(static_cast<size_t>(W4));
    for (int i = 0; i < W4; ++i) {
      int width = std::min(params.w4, params.ell - i * params.w4);
      auto &row = pt.loop4[static_cast<size_t>(i)];
      row.resize(size_t{1} << width);
      for (uint64_t v = 0; v < row.size(); ++v) {
        BigInt term = c.contrib.u[j] * big_from_u64(v);
        term <<= static_cast<unsigned>(i * params.w4);
        term %= c.system.L;
        term %= Nv;
        term >>= static_cast<unsigned>(c.t);
        term %= big_from_u64(c.Nt);
        row[v] = big_to_u64(term);
      }
    }
    for (const auto &row : pt.loop4) {
      pt.loop4_sub.push_back(complement(row, c.Nt));
    }
  }
  c.loop1_final.resize(c.windows.products.size());
  for (size_t i = 0; i < c.loop1_final.size(); ++i) {
    auto &row = c.loop1_final[i];
    row.resize(c.windows.products[i].size());
    for (size_t v = 0; v < row.size(); ++v) {
      uint64_t d = P == 0 ? 0 : c.dlogs.D[P - 1][i][v];
      row[v] = (0 - d) & smask;
    }
  }

  c.epsilon = epsilon_model(P, W4, params.f);
  BigInt A = big_from_u64(P * static_cast<uint64_t>(W4));
  BigInt two_t = BigInt(1) << static_cast<unsigned>(c.t);
  BigInt n_low = Nv % two_t;
  c.epsilon_cert = Rational(A * ((two_t - 1) + n_low), Nv);
  c.epsilon_cert.canonicalize();
  c.epsilon_cert += Rational(A) * c.system.deviation;
  long double bound =
      std::ceil(std::sqrt(static_cast<long double>(c.epsilon)) *
                static_cast<long double>(c.Nt));
  if (bound < 1) bound = 1;
  if (bound > static_cast<long double>(c.Nt)) {
    bound = static_cast<long double>(c.Nt);
  }
  c.mask_bound = static_cast<uint64_t>(bound);
  return c;
}

std::vector<uint64_t> exponent_residues(const ExecutionConfig &c,
                                        const std::vector<uint64_t> &e) {
  const auto &prods = c.windows.products;
  std::vector<uint64_t> out(c.system.primes.size());
  for (size_t j = 0; j < out.size(); ++j) {
    uint64_t p = c.system.primes[j];
    uint64_t r = 1 % p;
    for (size_t i = 0; i < prods.size(); ++i) {
      int lo = static_cast<int>(i) * c.params.w1;
      int width = std::min(c.params.w1, c.params.m - lo);
      uint64_t v = bits_of(e, lo, width);
      r = mulmod_u64(r, mpz_fdiv_ui(prods[i][v].get_mpz_t(), p), p);
    }
    out[j] = r;
  }
  return out;
}

uint64_t classical_oracle(const ExecutionConfig &c,
                          const std::vector<uint64_t> &e) {
  std::vector<uint64_t> r = exponent_residues(c, e);
  unsigned __int128 acc = 0;
  for (size_t j = 0; j < r.size(); ++j) {
    const auto &tabs = c.primes[j].loop4;
    for (size_t i = 0; i < tabs.size(); ++i) {
      int width = std::bit_width(tabs[i].size() - 1);
      uint64_t v = (r[j] >> (i * static_cast<size_t>(c.params.w4))) &
                   low_mask(width);
      acc += tabs[i][v];
    }
    acc %= c.Nt;
  }
  return static_cast<uint64_t>(acc % c.Nt);
}

BigInt exact_power(const ExecutionConfig &c, const std::vector<uint64_t> &e) {
  BigInt x = 0, y = 0;
  for (int b = c.x_bits - 1; b >= 0; --b) {
    x <<= 1;
    if (bits_of(e, b, 1)) x += 1;
  }
  for (int b = c.y_bits - 1; b >= 0; --b) {
    y <<= 1;
    if (bits_of(e, c.x_bits + b, 1)) y += 1;
  }
  BigInt gx, hy;
  mpz_powm(gx.get_mpz_t(), c.g.get_mpz_t(), x.get_mpz_t(),
           c.N.value.get_mpz_t());
  mpz_powm(hy.get_mpz_t(), c.h.get_mpz_t(), y.get_mpz_t(),
           c.N.value.get_mpz_t());
  return gx * hy % c.N.value;
}

Rational approximation_deviation(const ExecutionConfig &c,
                                 const std::vector<uint64_t> &e) {
  BigInt approx = big_from_u64(classical_oracle(c, e));
  approx <<= static_cast<unsigned>(c.t);
  return modular_deviation(exact_power(c, e) - approx, c.N.value);
}

void loop1(SimState &s, const ExecutionConfig &c, size_t j, ShotRegisters &r) {
  RoutineScope scope(s, Routine::kLoop1);
  const auto &tables =
      j < c.primes.size() ? c.primes[j].loop1 : c.loop1_final;
  for (size_t i = 0; i < tables.size(); ++i) {
    QuintView ei = window(r.e, static_cast<int>(i), c.params.w1);
    QuintView x = s.alloc(r.sum.size(), "l1");
    s.lookup(tables[i], ei, x);
    s.add(r.sum, x);
    s.unlookup(tables[i], x, s.vent(r.e_vents[i]));
  }
}

void loop2(SimState &s, uint64_t p, const QuintView &sum, int ell) {
  RoutineScope scope(s, Routine::kLoop2);
  int lm = sum.size() - ell;
  for (int k = lm - 1; k >= 0; --k) {
    s.sub_const(sum.slice(k, k + ell + 1), p - 1);
    s.add_ghz(sum.slice(k, k + ell), sum.bit(k + ell), p - 1);
  }
}

void unloop2(SimState &s, uint64_t p, const QuintView &sum, int ell) {
  RoutineScope scope(s, Routine::kUnloop2);
  int lm = sum.size() - ell;
  for (int k = 0; k < lm; ++k) {
    s.sub_ghz(sum.slice(k, k + ell), sum.bit(k + ell), p - 1);
    s.add_const(sum.slice(k, k + ell + 1), p - 1);
  }
}

void loop3(SimState &s, uint64_t p, uint64_t g, int w3,
           const QuintView &exponent, ShotRegisters &r) {
  const int ell = exponent.size();
  const int W3 = static_cast<int>(ceil_div(ell, w3));
  const int a0 = std::min(2 * w3, ell);
  QuintView a;
  {
    RoutineScope scope(s, Routine::kLoop3Startup);
    a = s.alloc(ell, "v");
    s.lookup(exponent_table(p, g, a0), exponent.slice(0, a0), a);
  }
  RoutineScope scope(s, Routine::kLoop3Body);
  for (int i = 2; i < W3; ++i) {
    QuintView xi = window(exponent, i, w3);
    uint64_t ci = pow_2k(g, i * w3, p);
    QuintView b = s.alloc(ell, "v");
    for (int k = 0; k < W3; ++k) {
      QuintView ak = window(a, k, w3);
      auto t = multiply_table(p, ci, false, xi.size(), ak.size(), k * w3);
      QuintView addr = xi.concat(ak);
      Vent vent(addr.size());
      uint64_t bit = mod_subtract(s, b, addr, complement(t, p), p, vent);
      s.push_uncompute_info({std::move(vent), bit});
    }
    uint64_t res = s.del_measure_x(a, "v");
    s.push_uncompute_info({Vent(0), res});
    a = b;
  }
  r.v = a;
}

void unloop3(SimState &s, uint64_t p, uint64_t g, int w3,
             const QuintView &exponent, ShotRegisters &r) {
  const int ell = exponent.size();
  const int W3 = static_cast<int>(ceil_div(ell, w3));
  const int a0 = std::min(2 * w3, ell);
  QuintView cur = r.v;
  {
    RoutineScope scope(s, Routine::kUnloop3Body);
    for (int i = W3 - 1; i >= 2; --i) {
      QuintView xi = window(exponent, i, w3);
      uint64_t ci = pow_2k(g, i * w3, p);
      uint64_t res = s.pop_uncompute_info().bits;

      // Recompute the previous accumulator from the current one.
      QuintView old = s.alloc(ell, "v");
      for (int k = 0; k < W3; ++k) {
        QuintView bk = window(cur, k, w3);
        auto t = multiply_table(p, ci, true, xi.size(), bk.size(), k * w3);
        QuintView addr = xi.concat(bk);
        Vent vent(addr.size());
        uint64_t bit = mod_subtract(s, old, addr, complement(t, p), p, vent);
        branch_fix(s, bit != 0, old, addr, t, vent);
        s.phaseup(vent, addr);
      }
      s.phase_flip_if(std::popcount(res & s.value(old)) & 1);

      // Erase the current accumulator, settling the deferred corrections.
      for (int k = W3 - 1; k >= 0; --k) {
        UncomputeInfo info = s.pop_uncompute_info();
        QuintView ak = window(old, k, w3);
        auto t = multiply_table(p, ci, false, xi.size(), ak.size(), k * w3);
        QuintView addr = xi.concat(ak);
        uint64_t bit = mod_subtract(s, cur, addr, t, p, info.vent);
        if (info.bits) {
          if (r.opts.fault == Fault::kSkipDeferredFlip && !r.fault_fired) {
            r.fault_fired = true;
          } else {
            s.phase_flip_if(true);
          }
        }
        branch_fix(s, bit != info.bits, cur, addr, complement(t, p),
                   info.vent);
        s.phaseup(info.vent, addr);
      }
      s.del_by_equal_to(cur, 0);
      cur = old;
    }
  }
  RoutineScope scope(s, Routine::kUnloop3Cleanup);
  Vent vent(a0);
  s.unlookup(exponent_table(p, g, a0), cur, vent);
  s.phaseup(vent, exponent.slice(0, a0));
  r.v = QuintView();
}

void loop4(SimState &s, const ExecutionConfig &c, size_t j, ShotRegisters &r) {
  RoutineScope scope(s, Routine::kLoop4);
  const PrimeTables &pt = c.primes[j];
  for (size_t i = 0; i < pt.loop4.size(); ++i) {
    QuintView vi = window(r.v, static_cast<int>(i), c.params.w4);
    Vent vent(vi.size());
    uint64_t bit =
        mod_subtract(s, r.acc, vi, pt.loop4_sub[i], c.Nt, vent);
    branch_fix(s, bit != 0, r.acc, vi, pt.loop4[i], vent);
    if (r.opts.fault == Fault::kSkipLoop4Phaseup && !r.fault_fired &&
        vent.get(s.value(vi))) {
      r.fault_fired = true;
      vent.clear();
      continue;
    }
    s.phaseup(vent, vi);
  }
}

ShotRecord run_shot(const ExecutionConfig &c, uint64_t seed,
                    const ShotOptions &opts) {
  ShotRecord rec;
  rec.seed = seed;
  SimState s(seed);
  s.set_trace(opts.trace);
  ShotRegisters r;
  r.opts = opts;
  const AlgorithmParams &p = c.params;
  try {
    r.e = s.alloc_uniform(p.m, "e");
    if (opts.forced_e) {
      for (int lo = 0; lo < p.m; lo += 64) {
        size_t w = static_cast<size_t>(lo / 64);
        uint64_t v = w < opts.forced_e->size() ? (*opts.forced_e)[w] : 0;
        int width = std::min(64, p.m - lo);
        s.force_value(r.e.slice(lo, lo + width), v & low_mask(width));
      }
    }
    rec.e = s.value_words(r.e);
    r.acc = s.alloc_uniform_range(c.mask_bound, p.f, "acc");
    if (opts.forced_mask) s.force_value(r.acc, *opts.forced_mask);
    rec.mask = s.value(r.acc);
    r.sum = s.alloc(c.sum_width(), "sum");
    for (size_t i = 0; i < c.windows.products.size(); ++i) {
      r.e_vents.push_back(
          s.new_vent(window(r.e, static_cast<int>(i), p.w1).size()));
    }

    for (size_t j = 0; j < c.primes.size(); ++j) {
      const PrimeTables &pt = c.primes[j];
      QuintView exponent = r.sum.slice(0, p.ell);
      loop1(s, c, j, r);
      loop2(s, pt.p, r.sum, p.ell);
      loop3(s, pt.p, pt.g, p.w3, exponent, r);
      loop4(s, c, j, r);
      unloop3(s, pt.p, pt.g, p.w3, exponent, r);
      unloop2(s, pt.p, r.sum, p.ell);
    }
    loop1(s, c, c.primes.size(), r);
    s.del_by_equal_to(r.sum, 0);
    {
      RoutineScope scope(s, Routine::kFinish);
      for (size_t i = 0; i < r.e_vents.size(); ++i) {
        QuintView ei = window(r.e, static_cast<int>(i), p.w1);
        s.phaseup(s.vent(r.e_vents[i]), ei);
        s.release_vent(r.e_vents[i]);
      }
    }
    rec.measurement = s.del_measure_z(r.acc, "result");
    s.del_measure_z(r.e, "e");
    rec.expected = (rec.mask + classical_oracle(c, rec.e)) % c.Nt;
    s.verify_clean_finish();
    rec.clean = true;
  } catch (const qsim::SimError &err) {
    rec.clean = false;
    rec.error = err.what();
    if (rec.expected == 0 && !rec.e.empty()) {
      rec.expected = (rec.mask + classical_oracle(c, rec.e)) % c.Nt;
    }
  }
  rec.high_water = s.high_water();
  rec.counters = s.counters();
  return rec;
}

std::vector<std::string> compare_counters(const qsim::Counters &got,
                                          const SubroutineTally &want,
                                          double sigmas) {
  std::vector<std::string> out;
  std::vector<bool> seen(qsim::kRoutineCount, false);
  auto note = [&](Routine r, const std::string &what, uint64_t g,
                  uint64_t w) {
    std::ostringstream msg;
    msg << qsim::routine_name(r) << ' ' << what << ": got " << g
        << ", want " << w;
    out.push_back(msg.str());
  };
  for (const TallyRow &row : want.rows) {
    const auto &c = got[static_cast<size_t>(row.routine)];
    seen[static_cast<size_t>(row.routine)] = true;
    for (int k = 0; k < qsim::kOpKindCount; ++k) {
      auto kk = static_cast<size_t>(k);
      auto name = qsim::op_kind_name(static_cast<OpKind>(k));
      uint64_t wf = row.iterations * row.fixed[kk];
      if (c.fixed[kk] != wf) note(row.routine, std::string(name), c.fixed[kk], wf);
      uint64_t wc = c.branches_taken * row.branch_ops[kk];
      if (c.conditional[kk] != wc) {
        note(row.routine, std::string("conditional ") + name,
             c.conditional[kk], wc);
      }
      bool used = wf + wc > 0;
      if (used && k != static_cast<int>(OpKind::kAddition) &&
          c.max_address_width[kk] != row.address_width) {
        note(row.routine, std::string(name) + " address width",
             static_cast<uint64_t>(c.max_address_width[kk]),
             static_cast<uint64_t>(row.address_width));
      }
    }
    uint64_t offered = row.iterations * row.branches;
    if (c.branches_offered != offered) {
      note(row.routine, "branches offered", c.branches_offered, offered);
    }
    if (offered > 0) {
      double mean = 0.5 * static_cast<double>(offered);
      double sd = 0.5 * std::sqrt(static_cast<double>(offered));
      double dev = std::abs(static_cast<double>(c.branches_taken) - mean);
      if (dev > sigmas * sd + 0.5) {
        note(row.routine, "branches taken (outside band)", c.branches_taken,
             static_cast<uint64_t>(mean));
      }
    }
  }
  for (int r = 0; r < qsim::kRoutineCount; ++r) {
    if (seen[static_cast<size_t>(r)]) continue;
    const auto &c = got[static_cast<size_t>(r)];
    uint64_t any = c.branches_offered;
    for (int k = 0; k < qsim::kOpKindCount; ++k) {
      any += c.fixed[static_cast<size_t>(k)] +
             c.conditional[static_cast<size_t>(k)];
    }
    if (any) note(static_cast<Routine>(r), "untallied operations", any, 0);
  }
  return out;
}

std::string words_to_hex(const std::vector<uint64_t> &w) {
  BigInt v = 0;
  for (size_t i = w.size(); i-- > 0;) {
    v <<= 64;
    v += big_from_u64(w[i]);
  }
  return big_to_hex(v);
}

void write_shot(std::ostream &out, const ShotRecord &r) {
  out << "seed " << r.seed << " e " << words_to_hex(r.e) << " mask " << r.mask
      << " measurement " << r.measurement << " expected " << r.expected
      << " clean " << (r.clean ? 1 : 0) << " high_water " << r.high_water;
  for (int k = 0; k < qsim::kRoutineCount; ++k) {
    const auto &c = r.counters[static_cast<size_t>(k)];
    uint64_t total = c.branches_offered;
    for (int o = 0; o < qsim::kOpKindCount; ++o) {
      total += c.fixed[static_cast<size_t>(o)] +
               c.conditional[static_cast<size_t>(o)];
    }
    if (!total) continue;
    out << ' ' << qsim::routine_name(static_cast<Routine>(k)) << '='
        << c.fixed[0] + c.conditional[0] << '/'
        << c.fixed[1] + c.conditional[1] << '/'
        << c.fixed[2] + c.conditional[2] << '/' << c.branches_taken << '/'
        << c.branches_offered;
  }
  if (!r.error.empty()) out << " error \"" << r.error << '"';
  out << '\n';
}

}  // namespace qfe
