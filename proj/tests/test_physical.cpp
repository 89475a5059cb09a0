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

#include "qfe/physical.hpp"

using namespace qfe;

TEST(physical, ccz_timing) {
  auto t = ccz_timing(PhysicalAssumptions{});
  // Cultivation volume over a 3x4 hot footprint at d = 25, eight T per CCZ.
  EXPECT_NEAR(t.cultivation_rounds, 30000.0 / (12 * 1352) * 8, 1e-9);
  EXPECT_NEAR(t.surgery_rounds, 100, 1e-9);
  EXPECT_LT(t.total_rounds, t.rounded_rounds);
  EXPECT_DOUBLE_EQ(t.ccz_period_us, 25);
  EXPECT_DOUBLE_EQ(t.surgery_period_us, 25);
}

TEST(physical, footprint_reproduces_layout) {
  PhysicalAssumptions a;
  EXPECT_EQ(a.hot_density(), 1352);
  auto f = qubit_footprint(1280, 131, 126, a);
  EXPECT_EQ(f.cold, 550400);
  EXPECT_EQ(f.hot, 177112);
  EXPECT_EQ(f.compute, 170352);
  EXPECT_EQ(f.total, 897864);
  EXPECT_THROW(qubit_footprint(-1, 0, 0, a), std::invalid_argument);
}

TEST(physical, durations_for_published_row) {
  auto p = AlgorithmParams::standard(2048, 8, 21, 6, 3, 5, 33);
  auto d = operation_durations(tally(p), PhysicalAssumptions{});
  EXPECT_EQ(d.largest_addition, 33);
  EXPECT_EQ(d.largest_lookup, 6);
  EXPECT_DOUBLE_EQ(d.addition_us, 1600);
  EXPECT_DOUBLE_EQ(d.lookup_us, 1575);
  EXPECT_DOUBLE_EQ(d.addition_ms, 2);
  EXPECT_DOUBLE_EQ(d.lookup_ms, 2);
  EXPECT_DOUBLE_EQ(d.phaseup_ms, 1);
}

TEST(physical, success_expression) {
  PhysicalAssumptions a;
  // (1 - eps)^n with eps^2 n far below double resolution.
  double want = std::exp(-1e-15 * 1600.0 * 12 * 3600 * 1e6);
  EXPECT_NEAR(success_probability(1600, 12, a), want, 1e-9);
  EXPECT_NEAR(success_probability(1600, 12, a), 0.933, 0.001);
  EXPECT_DOUBLE_EQ(success_probability(0, 12, a), 1.0);
}

TEST(physical, zero_op_tally_takes_no_time) {
  SubroutineTally t;
  EXPECT_DOUBLE_EQ(shot_hours(t, PhysicalAssumptions{}), 0.0);
  auto p = AlgorithmParams::standard(2048, 8, 21, 6, 3, 5, 33);
  TallyOptions o;
  o.prime_count = 0;
  auto z = tally(p, o);
  // The closing loop1 pass (one addition, one lookup per window) and the
  // finish phaseups remain.
  EXPECT_NEAR(shot_hours(z, PhysicalAssumptions{}), 214 * (2 + 2 + 1) * 1e-3 / 3600, 1e-12);
}

TEST(physical, shot_time_and_days) {
  auto p = AlgorithmParams::standard(2048, 8, 21, 6, 3, 5, 33);
  auto e = physical_estimate(p);
  EXPECT_EQ(e.footprint.total, 897864);
  EXPECT_EQ(e.hot_symbolic, 3 * 33 + 2 * 21 + 11);
  EXPECT_NE(e.footprint_symbolic.total, e.footprint.total);
  EXPECT_NEAR(e.shot_hours / 12.07, 1, 0.2);
  EXPECT_NEAR(e.expected_days / 4.96, 1, 0.2);
  double sum = 0;
  for (const auto &s : e.shares) sum += s.hours;
  EXPECT_NEAR(sum, e.shot_hours, 1e-9);
  EXPECT_NEAR(e.expected_days, e.shot_hours * e.expected_shots / 24 / e.success, 1e-9);
  EXPECT_THROW(expected_days(1, 1, 0), std::domain_error);
}
