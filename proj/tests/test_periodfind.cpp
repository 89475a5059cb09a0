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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include "qfe/periodfind.hpp"

using namespace qfe;
using namespace qfe::periodfind;

namespace {

// Direct O(n^2) DFT power spectrum, normalized.
std::vector<double> naive_spectrum(const std::vector<double> &x) {
  size_t n = x.size();
  std::vector<double> p(n);
  double s = 0;
  for (size_t y = 0; y < n; ++y) {
    std::complex<double> acc = 0;
    for (size_t e = 0; e < n; ++e) {
      double ang = -2 * std::numbers::pi * static_cast<double>((y * e) % n) / static_cast<double>(n);
      acc += x[e] * std::polar(1.0, ang);
    }
    s += p[y] = std::norm(acc);
  }
  for (auto &v : p) v /= s;
  return p;
}

uint64_t brute_order(uint64_t g, uint64_t N) {
  uint64_t x = g % N, r = 1;
  while (x != 1) x = x * g % N, ++r;
  return r;
}

}  // namespace

TEST(periodfind, orders_and_generators) {
  for (uint64_t N : {15ull, 21ull, 221ull, 3599ull, 4087ull}) {
    for (uint64_t g = 2; g < std::min<uint64_t>(N, 60); ++g) {
      if (std::gcd(g, N) != 1) continue;
      ASSERT_EQ(multiplicative_order(g, N), brute_order(g, N)) << g << " " << N;
    }
    uint64_t g = max_order_generator(N);
    uint64_t best = 0;
    for (uint64_t h = 2; h < N; ++h)
      if (std::gcd(h, N) == 1) best = std::max(best, brute_order(h, N));
    EXPECT_EQ(brute_order(g, N), best);
  }
  EXPECT_THROW(multiplicative_order(3, 21), PeriodError);
}

TEST(periodfind, dense_state_has_unit_norm_and_mask_support) {
  for (double S : {0.0, 0.1, 0.5, 1.0}) {
    auto s = masked_premeasure_state(21, 2, 6, S);
    EXPECT_NEAR(s.norm(), 1.0, 1e-10);
    EXPECT_EQ(s.width, mask_width(S, 21));
    uint64_t x = 1;
    for (uint64_t e = 0; e < 64; ++e) {
      for (uint64_t v = 0; v < 21; ++v) {
        bool in = (v + 21 - x) % 21 < s.width;
        EXPECT_EQ(s.amplitude(e, v) > 0, in);
        EXPECT_GE(s.amplitude(e, v), 0.0);
      }
      x = x * 2 % 21;
    }
  }
  EXPECT_THROW(masked_premeasure_state(21, 3, 6, 0.1), PeriodError);
  EXPECT_THROW(masked_premeasure_state(70001, 2, 6, 0.1), PeriodError);
}

TEST(periodfind, spectrum_matches_naive_dft) {
  auto s = masked_premeasure_state(15, 2, 7, 0.2);
  for (uint64_t V = 0; V < 15; ++V) {
    std::vector<double> col(128);
    double m = 0;
    for (size_t e = 0; e < 128; ++e) m += col[e] = s.amplitude(e, V);
    if (m == 0) {
      EXPECT_THROW(collapse_and_spectrum(s, V), PeriodError);
      continue;
    }
    auto ps = collapse_and_spectrum(s, V);
    EXPECT_NEAR(ps.total(), 1.0, 1e-10);
    EXPECT_EQ(ps.period, 4u);
    auto want = naive_spectrum(col);
    for (size_t y = 0; y < 128; ++y) ASSERT_NEAR(ps.prob[y], want[y], 1e-12);
  }
}

TEST(periodfind, peaks_exact_when_period_divides_register) {
  std::vector<uint64_t> R = {0, 3, 5};
  auto beta = residue_peak_probs(8, R);
  auto ps = periodic_spectrum(8, R, 10);
  for (uint64_t y = 0; y < 1024; ++y) {
    if (y % 128 == 0) {
      EXPECT_NEAR(ps.prob[y], beta[y / 128], 1e-12);
    } else {
      EXPECT_NEAR(ps.prob[y], 0.0, 1e-12);
    }
  }
  auto masses = ps.bucket_masses();
  for (size_t k = 0; k < 8; ++k) EXPECT_NEAR(masses[k], beta[k], 1e-12);
}

TEST(periodfind, peak_mass_error_shrinks_with_register_size) {
  std::vector<uint64_t> R = {0, 2, 3, 9};
  uint64_t P = 13;
  auto beta = residue_peak_probs(P, R);
  // A partial last period moves O(P / 2^m) of mass between buckets.
  double first = 0, last = 0;
  for (int m = 8; m <= 20; ++m) {
    auto masses = periodic_spectrum(P, R, m).bucket_masses();
    double err = 0;
    for (size_t k = 0; k < P; ++k) err = std::max(err, std::abs(masses[k] - beta[k]));
    EXPECT_LE(err, static_cast<double>(P) / std::ldexp(1.0, m)) << m;
    if (m == 8) first = err;
    last = err;
  }
  EXPECT_LT(last, first / 100);
}

TEST(periodfind, continued_fraction_recovery) {
  int m = 16;
  uint64_t r = 12, N = 35;
  // Exact multiples j/r with gcd(j, r) = 1 recover r.
  for (uint64_t j = 1; j < r; ++j) {
    uint64_t y = static_cast<uint64_t>(std::llround(std::ldexp(static_cast<double>(j) / r, m)));
    EXPECT_EQ(recovers_order(y, m, r, N), std::gcd(j, r) == 1) << j;
  }
  EXPECT_FALSE(recovers_order(0, m, r, N));
}

TEST(periodfind, closed_form_law) {
  EXPECT_EQ(peak_prob_random_R(10, 3, 0), Rational(3, 10));
  EXPECT_EQ(peak_prob_random_R(10, 3, 4), Rational(7, 90));
  EXPECT_EQ(peak_prob_random_R(10, 10, 4), Rational(0));
  EXPECT_EQ(peak_prob_random_R(1, 1, 0), Rational(1));
  EXPECT_THROW(peak_prob_random_R(10, 0, 0), PeriodError);
  // Total mass is one.
  for (uint64_t P = 2; P < 40; ++P)
    for (uint64_t w = 1; w <= P; ++w) {
      Rational t = peak_prob_random_R(P, w, 0) + (P - 1) * peak_prob_random_R(P, w, 1);
      ASSERT_EQ(t, Rational(1));
    }
}

TEST(periodfind, exhaustive_subsets_match_closed_form) {
  for (uint64_t P = 1; P <= 20; ++P) {
    for (const auto &e : exhaustive_random_R(P)) {
      ASSERT_TRUE(e.shifts_uniform);
      ASSERT_EQ(e.zero, peak_prob_random_R(P, e.w, 0)) << P << " " << e.w;
      if (P > 1) ASSERT_EQ(e.nonzero, peak_prob_random_R(P, e.w, 1)) << P << " " << e.w;
    }
  }
}

TEST(periodfind, sampled_subsets_within_three_sigma) {
  for (auto [P, w] : {std::pair<uint64_t, uint64_t>{64, 5}, {101, 30}, {256, 200}}) {
    auto s = random_R_monte_carlo(P, w, 4000, 11);
    for (uint64_t k : {uint64_t{0}, uint64_t{1}, P / 2}) {
      double want = peak_prob_random_R(P, w, k).get_d();
      EXPECT_LE(std::abs(s.mean[k] - want), 3 * s.stderr_[k] + 1e-12) << P << " " << k;
    }
  }
}

TEST(periodfind, peak_model_matches_dense_simulation) {
  // Exact success, summing every output column, against the model.
  uint64_t N = 55, g = 2;
  int m = 12;
  uint64_t r = multiplicative_order(g, N);
  auto pm = peak_model(N, g, m);
  for (double S : {0.0, 0.2}) {
    auto s = masked_premeasure_state(N, g, m, S);
    double exact = 0, model = 0;
    std::vector<uint64_t> pw(r);
    for (uint64_t k = 0, x = 1; k < r; ++k, x = x * g % N) pw[k] = x;
    for (uint64_t V = 0; V < N; ++V) {
      double marg = 0;
      for (uint64_t e = 0; e < (1u << m); ++e) marg += s.amplitude(e, V) * s.amplitude(e, V);
      if (marg == 0) continue;
      auto ps = collapse_and_spectrum(s, V);
      double succ = 0;
      for (uint64_t y = 0; y < ps.prob.size(); ++y) {
        if (recovers_order(y, m, r, N)) succ += ps.prob[y];
      }
      exact += marg * succ;
      model += marg * column_success(pm, pw, s.width, V).first;
    }
    EXPECT_NEAR(model, exact, 0.01) << S;
  }
}

TEST(periodfind, masking_suppression_floors) {
  for (uint64_t N : {221ull, 899ull, 2021ull}) {
    auto pm = peak_model(N, max_order_generator(N));
    auto tiny = suppression_experiment(pm, 1e-9, 10000, 3);
    EXPECT_NEAR(tiny.suppression, 1.0, 1e-9);
    auto a = suppression_experiment(pm, 0.1, 10000, 3);
    EXPECT_GE(a.suppression, 0.8);
    EXPECT_LE(a.ci_low, a.suppression);
    EXPECT_GE(a.ci_high, a.suppression);
    EXPECT_LE(a.bespoke_low, a.ci_low);
    EXPECT_GE(a.zero_peak_masked, a.zero_peak_unmasked);
    auto b = suppression_experiment(pm, 0.01, 10000, 3);
    EXPECT_GE(b.suppression, 0.97);
    auto again = suppression_experiment(pm, 0.1, 10000, 3);
    EXPECT_EQ(again.masked, a.masked);
  }
  EXPECT_THROW(peak_model(15, 1), PeriodError);
}

TEST(periodfind, likelihood_interval) {
  auto [lo, hi] = binomial_lr_interval(50, 100, 3.841458820694124);
  // Wilson-like width near p = 1/2.
  EXPECT_NEAR(lo, 0.4028, 0.002);
  EXPECT_NEAR(hi, 0.5972, 0.002);
  auto z = binomial_lr_interval(0, 100, 3.84);
  EXPECT_EQ(z.first, 0.0);
  EXPECT_NEAR(z.second, 1 - std::exp(-3.84 / 200), 1e-3);
}
