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

// Acceptance run: one PASS/FAIL line per criterion, details indented below.

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfe/costs.hpp"
#include "qfe/kernels.hpp"
#include "qfe/modexp.hpp"
#include "qfe/periodfind.hpp"
#include "qfe/physical.hpp"
#include "qfe/residue.hpp"

#ifndef QFE_DATA_DIR
#define QFE_DATA_DIR "data"
#endif

using namespace qfe;
using boost::multiprecision::cpp_int;

namespace {

struct Report {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAIL " + what);
    }
  }
  void note(const std::string &s) { notes.push_back(s); }
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

cpp_int to_cpp(const BigInt &a) { return cpp_int(a.get_str()); }

std::vector<uint64_t> random_exponent(int m, std::mt19937_64 &rng) {
  std::vector<uint64_t> e(static_cast<size_t>((m + 63) / 64));
  for (auto &w : e) w = rng();
  if (m % 64) e.back() &= (1ull << (m % 64)) - 1;
  return e;
}

cpp_int exponent_value(const std::vector<uint64_t> &words, int lo, int hi) {
  cpp_int v = 0;
  for (int b = hi - 1; b >= lo; --b) {
    v <<= 1;
    if ((words[static_cast<size_t>(b / 64)] >> (b % 64)) & 1) v += 1;
  }
  return v;
}

// 1. Logical cost table.
Report logical_costs() {
  struct Row {
    int n, s, ell, w1, w3, w4, f, m;
    double pdev, shots, toffolis;
    int qubits;
  };
  const Row rows[] = {
      {1024, 8, 18, 6, 3, 6, 28, 640, 0.0287, 9.4, 1.1e9, 742},
      {1536, 8, 21, 6, 3, 5, 31, 960, 0.0183, 9.3, 3.1e9, 1074},
      {2048, 8, 21, 6, 3, 5, 33, 1280, 0.0125, 9.2, 6.5e9, 1399},
      {3072, 8, 21, 6, 3, 5, 35, 1920, 0.0091, 9.2, 1.9e10, 2043},
      {4096, 8, 24, 6, 3, 5, 36, 2560, 0.0080, 9.2, 4.0e10, 2692},
      {6144, 8, 24, 6, 3, 5, 39, 3840, 0.0042, 9.1, 1.2e11, 3978},
      {8192, 8, 24, 6, 3, 5, 40, 5120, 0.0040, 9.1, 2.7e11, 5261},
  };
  Report r;
  for (const auto &w : rows) {
    auto p = AlgorithmParams::standard(w.n, w.s, w.ell, w.w1, w.w3, w.w4, w.f);
    std::string why;
    auto e = estimate(p, {}, &why);
    if (!e) {
      r.check(false, fmt("n=%d infeasible: %s", w.n, why.c_str()));
      continue;
    }
    double shots_given = expected_shots(w.s, w.pdev);
    r.check(p.m == w.m, fmt("n=%d m %d != %d", w.n, p.m, w.m));
    r.check(rel(e->p_deviant, w.pdev) <= 0.10, fmt("n=%d P_deviant", w.n));
    r.check(std::abs(std::round(shots_given * 10) / 10 - w.shots) < 1e-9,
            fmt("n=%d E(shots) from published P_deviant", w.n));
    r.check(rel(static_cast<double>(e->qubits), w.qubits) <= 0.03,
            fmt("n=%d qubits", w.n));
    r.check(rel(e->expected_toffolis, w.toffolis) <= 0.30, fmt("n=%d Toffolis", w.n));
    r.note(fmt("n=%d m=%d P_dev=%.3f%% (%.2f%%) shots=%.2f (%.1f) Toffolis=%.3g (%.2g) "
               "qubits=%lld (%d)",
               w.n, p.m, 100 * e->p_deviant, 100 * w.pdev, e->expected_shots, w.shots,
               e->expected_toffolis, w.toffolis, static_cast<long long>(e->qubits),
               w.qubits));
  }
  return r;
}

// 2. Physical layout at n = 2048.
Report physical() {
  Report r;
  PhysicalAssumptions a;
  auto p = AlgorithmParams::standard(2048, 8, 21, 6, 3, 5, 33);
  auto e = physical_estimate(p, a);
  double success = success_probability(1600, 12, a);
  r.check(e.footprint.total == 897864, "physical qubits");
  r.check(e.timing.ccz_period_us == 25, "CCZ period");
  r.check(e.durations.addition_us == 1600, "addition duration");
  r.check(e.durations.lookup_us == 1575, "lookup duration");
  r.check(rel(e.shot_hours, 12.07) <= 0.20, "shot hours");
  r.check(rel(e.expected_days, 4.96) <= 0.20, "expected days");
  r.check(std::abs(success - 0.933) <= 0.001, "success expression");
  r.note(fmt("qubits=%lld ccz=%.0fus add=%.0fus lookup=%.0fus shot=%.2fh days=%.2f "
             "success(1600 x 12h)=%.4f success(layout)=%.4f",
             static_cast<long long>(e.footprint.total), e.timing.ccz_period_us,
             e.durations.addition_us, e.durations.lookup_us, e.shot_hours,
             e.expected_days, success, e.success));
  return r;
}

struct SimCase {
  const char *N;
  int s, ell, w1, w3, w4, f;
};

const SimCase kSimCases[] = {
    {"16777207", 4, 12, 3, 3, 3, 16},
    {"4292870399", 4, 14, 3, 2, 5, 18},
    {"281337470672899", 3, 16, 4, 3, 4, 18},
};

ExecutionConfig make_config(const SimCase &c) {
  Modulus N{BigInt(c.N)};
  auto p = AlgorithmParams::standard(N.n, c.s, c.ell, c.w1, c.w3, c.w4, c.f);
  ConfigOptions o;
  o.search.seed = 1;
  return build_config(N, BigInt(3), p, o);
}

// 3. End-to-end shots.
Report simulation() {
  Report r;
  int match = 0, clean = 0, counters = 0, in_band = 0, total = 0;
  for (const auto &c : kSimCases) {
    auto cfg = make_config(c);
    TallyOptions to;
    to.prime_count = cfg.system.primes.size();
    auto want = tally(cfg.params, to);
    cpp_int Nt(cfg.Nt);
    for (uint64_t seed = 0; seed < 100; ++seed) {
      auto s = run_shot(cfg, seed);
      ++total;
      cpp_int v_oracle = (cpp_int(s.mask) + classical_oracle(cfg, s.e)) % Nt;
      clean += s.clean;
      match += s.clean && cpp_int(s.measurement) == v_oracle &&
               s.measurement == s.expected;
      // Exact counts given the branches taken; the band on how many
      // 50% branches fire is statistical and only reported.
      counters += compare_counters(s.counters, want, 1e18).empty();
      in_band += compare_counters(s.counters, want, 3.0).empty();
    }
    r.note(fmt("N=%s bits=%d primes=%zu t=%d", c.N, cfg.N.n, cfg.system.primes.size(),
               cfg.t));
  }
  r.check(match == total, fmt("measurement matches %d/%d", match, total));
  r.check(clean == total, fmt("clean finish %d/%d", clean, total));
  r.check(counters == total, fmt("counters equal tally %d/%d", counters, total));
  r.note(fmt("match %d/%d clean %d/%d counters %d/%d branch counts within 3 sigma %d/%d",
             match, total, clean, total, counters, total, in_band, total));
  return r;
}

// 4. Approximation deviation.
Report deviation() {
  Report r;
  for (const auto &c : kSimCases) {
    auto cfg = make_config(c);
    std::mt19937_64 rng(2026);
    cpp_int N = to_cpp(cfg.N.value), g = to_cpp(cfg.g), h = to_cpp(cfg.h);
    int ok = 0;
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      auto e = random_exponent(cfg.params.m, rng);
      cpp_int x = exponent_value(e, 0, cfg.x_bits);
      cpp_int y = exponent_value(e, cfg.x_bits, cfg.x_bits + cfg.y_bits);
      cpp_int exact =
          cpp_int(boost::multiprecision::powm(g, x, N)) * cpp_int(boost::multiprecision::powm(h, y, N)) % N;
      cpp_int approx = cpp_int(classical_oracle(cfg, e)) << cfg.t;
      cpp_int d = ((exact - approx) % N + N) % N;
      cpp_int side = std::min<cpp_int>(d, N - d);
      // side / N <= eps, in exact arithmetic against the double eps.
      mpq_class delta(BigInt(side.str()), cfg.N.value);
      ok += delta <= mpq_class(cfg.epsilon);
      worst = std::max(worst, delta.get_d());
    }
    r.check(ok == 1000, fmt("N=%s %d/1000 within epsilon", c.N, ok));
    r.note(fmt("N=%s worst=%.3e epsilon=%.3e", c.N, worst, cfg.epsilon));
  }
  return r;
}

// 5. Masking suppression floors.
Report masking() {
  Report r;
  const uint64_t moduli[] = {221, 323, 437, 667, 899, 1147, 1517, 2021, 2491, 3127, 3599, 4087};
  double lo1 = 1e9, lo2 = 1e9;
  for (uint64_t N : moduli) {
    auto pm = periodfind::peak_model(N, periodfind::max_order_generator(N));
    auto a = periodfind::suppression_experiment(pm, 0.1, 10000, 7);
    auto b = periodfind::suppression_experiment(pm, 0.01, 10000, 7);
    r.check(a.suppression >= 0.80, fmt("N=%llu S=0.1 %.4f", (unsigned long long)N, a.suppression));
    r.check(b.suppression >= 0.97, fmt("N=%llu S=0.01 %.4f", (unsigned long long)N, b.suppression));
    lo1 = std::min(lo1, a.suppression);
    lo2 = std::min(lo2, b.suppression);
    r.note(fmt("N=%llu r=%llu S=0.1 %.4f [%.4f, %.4f] S=0.01 %.4f [%.4f, %.4f]",
               (unsigned long long)N, (unsigned long long)pm.r, a.suppression, a.ci_low,
               a.ci_high, b.suppression, b.ci_low, b.ci_high));
  }
  r.note(fmt("min suppression %.4f at S=0.1, %.4f at S=0.01", lo1, lo2));
  return r;
}

// 6. Randomized residue law.
Report random_R() {
  Report r;
  int groups = 0;
  for (uint64_t P = 1; P <= 30; ++P) {
    for (const auto &e : periodfind::exhaustive_random_R(P)) {
      ++groups;
      Rational zero(big_from_u64(e.w), big_from_u64(P));
      zero.canonicalize();
      r.check(e.shifts_uniform, fmt("P=%llu w=%llu shifts", (unsigned long long)P,
                                    (unsigned long long)e.w));
      r.check(e.zero == zero, fmt("P=%llu w=%llu zero peak", (unsigned long long)P,
                                  (unsigned long long)e.w));
      if (P > 1) {
        Rational nz(big_from_u64(P - e.w), big_from_u64(P * (P - 1)));
        nz.canonicalize();
        r.check(e.nonzero == nz, fmt("P=%llu w=%llu other peaks", (unsigned long long)P,
                                     (unsigned long long)e.w));
      }
    }
  }
  r.note(fmt("exhaustive: %d (P, w) groups, P <= 30", groups));
  const std::pair<uint64_t, uint64_t> sampled[] = {{7, 3}, {64, 20}, {257, 128}, {1024, 100}};
  double worst = 0;
  for (auto [P, w] : sampled) {
    auto s = periodfind::random_R_monte_carlo(P, w, 2000, 5);
    for (uint64_t k : {uint64_t{0}, uint64_t{1}, P / 2}) {
      double want = k == 0 ? static_cast<double>(w) / P
                           : static_cast<double>(P - w) / (static_cast<double>(P) * (P - 1));
      double dev = std::abs(s.mean[k] - want);
      double z = s.stderr_[k] > 0 ? dev / s.stderr_[k] : (dev < 1e-12 ? 0 : 1e9);
      worst = std::max(worst, z);
      r.check(z <= 3, fmt("P=%llu w=%llu k=%llu z=%.2f", (unsigned long long)P,
                          (unsigned long long)w, (unsigned long long)k, z));
    }
  }
  r.note(fmt("sampled: worst deviation %.2f sigma", worst));
  return r;
}

// 7. Kernel identities and gradient tables.
Report kernel_suite() {
  Report r;
  for (const auto &c : kernels::run_kernel_suite(QFE_DATA_DIR, 1)) {
    r.check(c.pass, c.name + " " + c.detail);
    r.note(c.name + ": " + (c.pass ? "ok " : "bad ") + c.detail);
  }
  // The listed ket |cba, cb, ca, c, ab, b, a, 1> for every basis state.
  bool order = true;
  for (int v = 0; v < 8; ++v) {
    uint8_t a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
    uint8_t ket[8] = {uint8_t(c & b & a), uint8_t(c & b), uint8_t(c & a), c,
                      uint8_t(a & b), b, a, 1};
    auto pp = kernels::power_product({a, b, c});
    for (int i = 0; i < 8; ++i) order &= pp[static_cast<size_t>(7 - i)] == ket[i];
  }
  r.check(order, "power product order");
  struct Want {
    const char *file;
    int t;
    const char *inf;
  };
  for (const Want &w : {Want{"gradient_1e-6.txt", 159, "3.4e-06"},
                        Want{"gradient_1e-15.txt", 1102, "1.1e-14"}}) {
    auto t = kernels::load_gradient_table(std::string(QFE_DATA_DIR) + "/" + w.file);
    auto [tc, inf] = kernels::gradient_table_totals(t);
    std::string got = kernels::two_sig(kernels::ceil_two_sig(inf));
    r.check(tc == w.t && got == w.inf, fmt("%s totals %d %s", w.file, tc, got.c_str()));
    r.note(fmt("%s: T=%d infidelity sum=%.4e", w.file, tc, inf));
  }
  return r;
}

// 8. Residue system for a 1024-bit modulus.
Report residue_search() {
  Report r;
  const int ell = 20, f = 20;
  Modulus N{random_semiprime(1024, 2026)};
  uint64_t W1 = ceil_div(static_cast<uint64_t>(standard_m(1024, 8)), 6);
  SearchOptions so;
  so.seed = 1;
  SearchStats stats;
  auto t0 = std::chrono::steady_clock::now();
  ResidueSystem sys;
  try {
    sys = find_prime_set(
        N, W1, ell, f, [&](uint64_t p) { return mpz_divisible_ui_p(N.value.get_mpz_t(), p) != 0; },
        so, &stats);
  } catch (const std::exception &e) {
    r.check(false, std::string("search: ") + e.what());
    return r;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Independent recomputation.
  cpp_int n = to_cpp(N.value), L = 1;
  std::set<uint64_t> seen;
  bool primes_ok = !sys.primes.empty();
  std::mt19937_64 rng(9);
  for (uint64_t p : sys.primes) {
    primes_ok &= p >> (ell - 1) == 1 && seen.insert(p).second &&
                 boost::multiprecision::miller_rabin_test(cpp_int(p), 25, rng) &&
                 n % p != 0;
    L *= p;
  }
  cpp_int bound = boost::multiprecision::pow(n, static_cast<unsigned>(W1));
  cpp_int rem = L % n, side = std::min<cpp_int>(rem, n - rem);
  bool covers = L >= bound;
  bool close = (side << f) < n;
  r.check(primes_ok, "distinct 20-bit primes coprime to N");
  r.check(covers, "product reaches N^W1");
  r.check(close, "deviation below 2^-20");
  r.check(check_system(sys, N).empty(), "library certificate check");
  r.check(secs <= 300, fmt("search took %.1f s", secs));
  double dev = 0;
  if (side > 0) {
    long e2 = 0;
    double m = mpz_get_d_2exp(&e2, BigInt(side.str()).get_mpz_t());
    long e1 = 0;
    double mn = mpz_get_d_2exp(&e1, N.value.get_mpz_t());
    dev = std::log2(m / mn) + static_cast<double>(e2 - e1);
  }
  r.note(fmt("W1=%llu primes=%zu swaps=%llu log2 deviation=%.2f time=%.1fs threads=%d",
             (unsigned long long)W1, sys.primes.size(),
             (unsigned long long)stats.swaps_tried, dev, secs, thread_count()));
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char *name;
    std::function<Report()> run;
  };
  const Criterion all[] = {
      {"logical cost table", logical_costs},
      {"physical layout", physical},
      {"end-to-end simulation", simulation},
      {"deviation bound", deviation},
      {"masking floors", masking},
      {"randomized residue law", random_R},
      {"kernel suite", kernel_suite},
      {"residue search 1024-bit", residue_search},
  };
  int failed = 0, i = 0;
  for (const auto &c : all) {
    ++i;
    auto t0 = std::chrono::steady_clock::now();
    Report r;
    try {
      r = c.run();
    } catch (const std::exception &e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", i, c.name, secs);
    for (const auto &n : r.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
