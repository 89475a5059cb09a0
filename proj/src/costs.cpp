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

#include "qfe/costs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qfe/common.hpp"
#include "qfe/residue.hpp"

namespace qfe {

using qsim::OpKind;
using qsim::Routine;

int AlgorithmParams::len_m() const { return len_u64(static_cast<uint64_t>(m)); }
uint64_t AlgorithmParams::W1() const { return ceil_div(m, w1); }
int AlgorithmParams::W3() const { return static_cast<int>(ceil_div(ell, w3)); }
int AlgorithmParams::W4() const { return static_cast<int>(ceil_div(ell, w4)); }

int standard_m(int n, int s) {
  // ceil(n/2 + n/s) = ceil((n s + 2 n) / (2 s)).
  return static_cast<int>(ceil_div(static_cast<uint64_t>(n) * s + 2ull * n,
                                   2ull * s));
}

int eh_register_m(int n, int s) {
  return n / 2 + 2 * static_cast<int>(ceil_div(n, 2ull * s));
}

AlgorithmParams AlgorithmParams::standard(int n, int s, int ell, int w1,
                                          int w3, int w4, int f) {
  AlgorithmParams p;
  p.n = n;
  p.s = s;
  p.ell = ell;
  p.w1 = w1;
  p.w3 = w3;
  p.w4 = w4;
  p.f = f;
  p.m = standard_m(n, s);
  return p;
}

std::string AlgorithmParams::validate() const {
  if (n < 2) return "n must be at least 2";
  if (s < 1) return "s must be at least 1";
  if (m < 1) return "m must be at least 1";
  if (ell < 2 || ell > 32) return "ell must be in [2, 32]";
  if (w1 < 1 || w3 < 1 || w4 < 1) return "windows must be at least 1";
  if (w1 > 20 || w4 > 20 || 2 * w3 > 24) return "window too large";
  if (f < 1 || f > n) return "f must be in [1, n]";
  if (f > 63) return "f must be at most 63";
  if (W3() < 2) return "W3 must be at least 2";
  return "";
}

double TallyRow::expected(OpKind k) const {
  auto i = static_cast<size_t>(k);
  return static_cast<double>(fixed[i]) +
         0.5 * static_cast<double>(branches * branch_ops[i]);
}

const TallyRow *SubroutineTally::find(Routine r) const {
  for (const auto &row : rows) {
    if (row.routine == r) return &row;
  }
  return nullptr;
}

uint64_t estimated_prime_count(int n, uint64_t W1, int ell,
                               bool ell_minus_one) {
  uint64_t bits = static_cast<uint64_t>(ell_minus_one ? ell - 1 : ell);
  return ceil_div(static_cast<uint64_t>(n) * W1, bits);
}

SubroutineTally tally(const AlgorithmParams &p, const TallyOptions &opts) {
  std::string why = p.validate();
  if (!why.empty()) throw std::invalid_argument(why);
  SubroutineTally t;
  uint64_t P = opts.prime_count
                   ? *opts.prime_count
                   : estimated_prime_count(p.n, p.W1(), p.ell,
                                           opts.ell_minus_one);
  t.prime_count = P;
  uint64_t W1 = p.W1();
  uint64_t W3 = static_cast<uint64_t>(p.W3());
  uint64_t W4 = static_cast<uint64_t>(p.W4());
  uint64_t lm = static_cast<uint64_t>(p.len_m());
  int sw = p.ell + p.len_m();
  int startup_addr = std::min(2 * p.w3, p.ell);
  int w1 = std::min(p.w1, p.m);
  int w4 = std::min(p.w4, p.ell);

  auto row = [](Routine r, uint64_t it, int reg, int addr,
                std::array<uint64_t, 3> fixed, uint64_t br = 0,
                std::array<uint64_t, 3> bops = {}) {
    TallyRow x;
    x.routine = r;
    x.iterations = it;
    x.register_width = reg;
    x.address_width = addr;
    x.fixed = fixed;
    x.branches = br;
    x.branch_ops = bops;
    return x;
  };
  // Ops per iteration are {additions, lookups, phaseups}.
  t.rows.push_back(row(Routine::kLoop1, (P + 1) * W1, sw, w1, {1, 1, 0}));
  t.rows.push_back(row(Routine::kLoop2, P * lm, sw, 0, {2, 0, 0}));
  t.rows.push_back(
      row(Routine::kLoop3Startup, P, p.ell, startup_addr, {0, 1, 0}));
  // The body addresses an exponent window joined with an accumulator
  // window; only the last exponent window can be short.
  int body_addr = p.w3 + std::min(p.w3, p.ell - 2 * p.w3);
  t.rows.push_back(row(Routine::kLoop3Body, P * (W3 - 2) * W3, p.ell,
                       body_addr, {2, 1, 0}));
  if (opts.printed_loop4) {
    t.rows.push_back(
        row(Routine::kLoop4, P * W4, p.f, w4, {1, 2, 1}, 1, {1, 1, 0}));
  } else {
    t.rows.push_back(
        row(Routine::kLoop4, P * W4, p.f, w4, {2, 1, 1}, 1, {1, 1, 0}));
  }
  t.rows.push_back(row(Routine::kUnloop3Body, P * (W3 - 2) * 2 * W3, p.ell,
                       body_addr, {2, 1, 1}, 1, {1, 1, 0}));
  t.rows.push_back(
      row(Routine::kUnloop3Cleanup, P, p.ell, startup_addr, {0, 0, 1}));
  t.rows.push_back(row(Routine::kUnloop2, P * lm, sw, 0, {2, 0, 0}));
  t.rows.push_back(row(Routine::kFinish, W1, p.m, w1, {0, 0, 1}));
  return t;
}

uint64_t addition_toffolis(int width) {
  return width <= 1 ? 0 : static_cast<uint64_t>(width - 1);
}

uint64_t lookup_toffolis(int a) {
  if (a <= 0) return 0;
  return (1ull << a) - static_cast<uint64_t>(a) - 1;
}

uint64_t phaseup_toffolis(int a) {
  if (a <= 0) return 0;
  // ceil(sqrt(2^a)) = 2^ceil(a/2) for odd a rounded up exactly.
  if (a % 2 == 0) return 1ull << (a / 2);
  return static_cast<uint64_t>(std::ceil(std::sqrt(std::ldexp(1.0, a))));
}

double toffoli_count(const SubroutineTally &t) {
  double total = 0;
  for (const auto &r : t.rows) {
    double per = r.expected(OpKind::kAddition) *
                     static_cast<double>(addition_toffolis(r.register_width)) +
                 r.expected(OpKind::kLookup) *
                     static_cast<double>(lookup_toffolis(r.address_width)) +
                 r.expected(OpKind::kPhaseup) *
                     static_cast<double>(phaseup_toffolis(r.address_width));
    total += static_cast<double>(r.iterations) * per;
  }
  return total;
}

double epsilon_model(uint64_t prime_count, int W4, int f) {
  return 3.0 * static_cast<double>(prime_count) * W4 * std::ldexp(1.0, -f);
}

double p_deviant(double epsilon) { return 2.0 * std::sqrt(epsilon); }

double expected_shots(int s, double p_dev) {
  if (p_dev < 0 || p_dev >= 1) throw std::domain_error("p_dev out of range");
  return (s + 1) / (1.0 - p_dev) / 0.99;
}

std::vector<QubitPhase> qubit_profile(const AlgorithmParams &p,
                                      QubitConvention c) {
  const int64_t m = p.m, f = p.f, ell = p.ell, lm = p.len_m();
  const int64_t sw = ell + lm;
  std::vector<QubitPhase> out;
  int64_t base = 0;
  // Released registers stay live until their phase ends.
  auto add = [&](const char *name, int64_t added, int64_t temp) {
    out.push_back({name, added, temp, base + std::max<int64_t>(added, 0) + temp});
    base += added;
  };
  if (c == QubitConvention::kTable) {
    add("startup", m + f, 0);
    add("enter outer loop", sw, 0);
    add("loop1", 0, 2 * sw);
    add("loop2", 0, sw);
    add("loop3", ell, 2 * ell);
    add("loop4", 0, 2 * f);
    add("unloop3", -ell, 2 * ell);
    add("unloop2", 0, sw);
    add("exit outer loop", -sw, 2 * sw);
    add("measure result", -f, 0);
    return out;
  }
  // Registers the simulator holds. Underflow qubits of modular additions
  // count; adder carry workspace does not.
  int64_t loop3_temp = p.W3() > 2 ? 2 * ell + 1 : 0;
  add("startup", m + f, 0);
  add("enter outer loop", sw, 0);
  add("loop1", 0, sw);
  add("loop2", 0, 0);
  add("loop3", ell, loop3_temp);
  add("loop4", 0, f + 1);
  add("unloop3", -ell, loop3_temp);
  add("unloop2", 0, 0);
  add("exit outer loop", -sw, sw);
  add("measure result", -f, 0);
  return out;
}

int64_t logical_qubits(const AlgorithmParams &p, QubitConvention c) {
  int64_t best = 0;
  for (const auto &ph : qubit_profile(p, c)) best = std::max(best, ph.total);
  return best;
}

int64_t hot_qubits_symbolic(const AlgorithmParams &p) {
  return 3ll * p.f + 2ll * p.ell + p.len_m();
}

std::optional<CostEstimate> estimate(const AlgorithmParams &p,
                                     const TallyOptions &opts,
                                     std::string *why) {
  auto fail = [&](const std::string &w) -> std::optional<CostEstimate> {
    if (why) *why = w;
    return std::nullopt;
  };
  std::string v = p.validate();
  if (!v.empty()) return fail(v);
  SubroutineTally t = tally(p, opts);
  if (!opts.prime_count && t.prime_count > prime_count_with_bits(p.ell)) {
    return fail("not enough primes with ell bits");
  }
  CostEstimate e;
  e.params = p;
  e.prime_count = t.prime_count;
  e.epsilon = epsilon_model(t.prime_count, p.W4(), p.f);
  if (e.epsilon >= 0.25) return fail("deviation bound too large");
  e.p_deviant = p_deviant(e.epsilon);
  e.expected_shots = expected_shots(p.s, e.p_deviant);
  e.toffolis_per_shot = toffoli_count(t);
  e.expected_toffolis = e.toffolis_per_shot * e.expected_shots;
  e.qubits = logical_qubits(p, QubitConvention::kRegister);
  e.qubits_table = logical_qubits(p, QubitConvention::kTable);
  double q = static_cast<double>(e.qubits);
  e.q3t = q * q * q * e.expected_toffolis;
  return e;
}

std::vector<CostEstimate> grid_scan(int n, const ScanRanges &r,
                                    const TallyOptions &opts, int threads) {
  std::vector<AlgorithmParams> points;
  for (int s = r.s.lo; s <= r.s.hi; ++s)
    for (int ell = r.ell.lo; ell <= r.ell.hi; ++ell)
      for (int w1 = r.w1.lo; w1 <= r.w1.hi; ++w1)
        for (int w3 = r.w3.lo; w3 <= r.w3.hi; ++w3)
          for (int w4 = r.w4.lo; w4 <= r.w4.hi; ++w4)
            for (int f = r.f.lo; f <= r.f.hi; ++f)
              points.push_back(
                  AlgorithmParams::standard(n, s, ell, w1, w3, w4, f));
  // Warm the prime-count cache before going parallel.
  for (int ell = r.ell.lo; ell <= r.ell.hi; ++ell) {
    if (ell >= 2 && ell <= 32) prime_count_with_bits(ell);
  }
  std::vector<std::optional<CostEstimate>> slots(points.size());
  parallel_for(
      points.size(),
      [&](size_t i) { slots[i] = estimate(points[i], opts); }, threads);
  std::vector<CostEstimate> out;
  for (auto &s : slots) {
    if (s) out.push_back(*s);
  }
  mark_pareto(out);
  return out;
}

void mark_pareto(std::vector<CostEstimate> &points) {
  std::vector<size_t> order(points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto &x = points[a], &y = points[b];
    if (x.qubits != y.qubits) return x.qubits < y.qubits;
    if (x.expected_toffolis != y.expected_toffolis)
      return x.expected_toffolis < y.expected_toffolis;
    return a < b;
  });
  double best = INFINITY;
  for (size_t k = 0; k < order.size(); ++k) {
    auto &pt = points[order[k]];
    pt.pareto = false;
    if (pt.expected_toffolis < best) {
      pt.pareto = true;
      best = pt.expected_toffolis;
    }
  }
}

size_t q3t_optimum(const std::vector<CostEstimate> &points) {
  if (points.empty()) throw std::invalid_argument("no feasible points");
  size_t best = 0;
  for (size_t i = 1; i < points.size(); ++i) {
    if (points[i].q3t < points[best].q3t) best = i;
  }
  return best;
}

void write_csv_header(std::ostream &out) {
  out << "n,s,ell,w1,w3,w4,f,m,P_deviant,expected_shots,toffolis,qubits,q3t,"
         "pareto_flag\n";
}

void write_csv_row(std::ostream &out, const CostEstimate &e) {
  const auto &p = e.params;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%d,%d,%d,%d,%d,%d,%d,%d,%.6g,%.6g,%.6g,%lld,%.6g,%d\n", p.n,
                p.s, p.ell, p.w1, p.w3, p.w4, p.f, p.m, e.p_deviant,
                e.expected_shots, e.expected_toffolis,
                static_cast<long long>(e.qubits), e.q3t, e.pareto ? 1 : 0);
  out << buf;
}

}  // namespace qfe
