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
#include <numbers>
#include <random>
#include <sstream>

#include "qfe/kernels.hpp"

using namespace qfe::kernels;

namespace {

std::string data(const char *name) { return std::string(QFE_DATA_DIR) + "/" + name; }

}  // namespace

TEST(kernels, adder_identity_exhaustive) {
  for (int c = 0; c < 32; ++c) {
    int ak = c & 1, bk = (c >> 1) & 1, sk = (c >> 2) & 1, ak1 = (c >> 3) & 1,
        bk1 = (c >> 4) & 1;
    int carry = ak ^ bk ^ sk;
    int want = (((ak + bk + carry) >> 1) + ak1 + bk1) & 1;
    EXPECT_EQ(adder_bit_step(ak, bk, sk, ak1, bk1), want == 1) << c;
  }
}

TEST(kernels, ripple_add_matches_integer_addition) {
  for (int w = 0; w <= 6; ++w)
    for (uint64_t a = 0; a < (1u << w); ++a)
      for (uint64_t b = 0; b < (1u << w); ++b)
        ASSERT_EQ(ripple_add_via_identity(a, b, w), a + b);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    uint64_t a = rng() >> 24, b = rng() >> 24;
    ASSERT_EQ(ripple_add_via_identity(a, b, 40), a + b);
  }
}

TEST(kernels, power_product_listed_order) {
  // |cba, cb, ca, c, ab, b, a, 1> from index 7 down to 0.
  for (int v = 0; v < 8; ++v) {
    int a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
    int listed[8] = {c & b & a, c & b, c & a, c, a & b, b, a, 1};
    auto pp = power_product({static_cast<uint8_t>(a), static_cast<uint8_t>(b),
                             static_cast<uint8_t>(c)});
    for (int i = 0; i < 8; ++i) EXPECT_EQ(pp[7 - i], listed[i]) << v << " " << i;
  }
  EXPECT_EQ(power_product({}).size(), 1u);
}

TEST(kernels, exor_transform_agrees_and_inverts) {
  std::mt19937_64 rng(2);
  for (int w = 1; w <= 10; ++w) {
    for (int k = 0; k < 20; ++k) {
      BitTable t(w);
      for (auto &b : t.bits) b = rng() & 1;
      int hl = w / 2, hh = w - hl;
      auto c = exor_transform(t, hl, hh);
      EXPECT_EQ(c, exor_transform_fast(t, hl, hh));
      EXPECT_EQ(exor_inverse(c, hl, hh).bits, t.bits);
    }
  }
}

TEST(kernels, exor_coefficients_of_simple_tables) {
  // A single set entry at v: coefficients are every superset pair of v.
  BitTable t(4);
  t.bits[0b0101] = 1;
  auto c = exor_transform(t, 2, 2);
  for (size_t h = 0; h < 4; ++h)
    for (size_t l = 0; l < 4; ++l)
      EXPECT_EQ(c.at(h, l), ((h & 1) == 1 && (l & 1) == 1) ? 1 : 0);
}

TEST(kernels, phaseup_equivalence_random_tables) {
  std::mt19937_64 rng(3);
  for (int w = 1; w <= 8; ++w) {
    for (int k = 0; k < 50; ++k) {
      BitTable t(w);
      for (auto &b : t.bits) b = rng() & 1;
      ASSERT_TRUE(phaseup_equivalence(t)) << w;
    }
  }
  BitTable zero(5), ones(5);
  for (auto &b : ones.bits) b = 1;
  EXPECT_TRUE(phaseup_equivalence(zero));
  EXPECT_TRUE(phaseup_equivalence(ones));
}

TEST(kernels, sequence_states_are_unit_norm) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    GateSequence s;
    s.init = "XYZ"[i % 3];
    for (int k = 0; k < 40; ++k) s.signs += (rng() & 1) ? '+' : '-';
    s.finish = {"H", "S"};
    auto v = sequence_state(s);
    EXPECT_NEAR(std::norm(v[0]) + std::norm(v[1]), 1.0, 1e-12);
  }
  GateSequence bad;
  bad.signs = "+x";
  EXPECT_THROW(sequence_state(bad), std::invalid_argument);
}

TEST(kernels, exact_targets_have_zero_infidelity) {
  // |+> is the k = 0 target up to nothing; Y eigenstate is k = 1.
  GateSequence plus;
  plus.init = 'Z';
  plus.finish = {"H", "Z"};
  // H|0> = |+>; Z|+> = |->, the k = 0 target (|0> - |1>)/sqrt 2.
  EXPECT_NEAR(gradient_infidelity(plus, 0), 0.0, 1e-15);
  GateSequence y;
  y.init = 'Y';
  EXPECT_NEAR(gradient_infidelity(y, 1), 0.0, 1e-15);
  // T_Z on |+> gives the k = 2 target, T_X-then-T_Z order starts with T_X.
  GateSequence t;
  t.init = 'X';
  t.signs = "++";
  EXPECT_NEAR(gradient_infidelity(t, 2), 0.0, 1e-15);
}

TEST(kernels, gradient_tables_reproduce_rows_and_totals) {
  struct Want {
    const char *file;
    int t;
    const char *total;
  } wants[] = {{"gradient_1e-6.txt", 159, "3.4e-06"}, {"gradient_1e-15.txt", 1102, "1.1e-14"}};
  for (const auto &w : wants) {
    auto t = load_gradient_table(data(w.file));
    for (const auto &r : t.rows) {
      double got = gradient_infidelity(r.seq, r.k);
      EXPECT_TRUE(infidelity_matches(got, r.infidelity_text))
          << w.file << " k=" << r.k << " got " << got << " table " << r.infidelity_text;
    }
    auto [tc, inf] = gradient_table_totals(t);
    EXPECT_EQ(tc, w.t);
    EXPECT_EQ(t.total_t, w.t);
    EXPECT_EQ(two_sig(ceil_two_sig(inf)), w.total);
  }
}

TEST(kernels, table_parser_rejects_malformed_rows) {
  std::istringstream missing("3 X ++ . 2 1e-3\n");
  EXPECT_THROW(read_gradient_table(missing), std::runtime_error);
  std::istringstream count("total 2 1e-3\n3 X +++ . 2 1e-3\n");
  EXPECT_THROW(read_gradient_table(count), std::runtime_error);
  std::istringstream ok("# c\ntotal 2 1e-3\n3 X ++ H,S 2 1e-3\n");
  auto t = read_gradient_table(ok);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].seq.finish.size(), 2u);
}

TEST(kernels, rounding_helpers) {
  EXPECT_EQ(two_sig(3.341e-6), "3.3e-06");
  EXPECT_DOUBLE_EQ(ceil_two_sig(3.341e-6), 3.4e-6);
  EXPECT_NEAR(ceil_two_sig(1.088e-14), 1.1e-14, 1e-28);
  EXPECT_NEAR(ceil_two_sig(2.0e-3), 2.0e-3, 1e-18);
  EXPECT_TRUE(infidelity_matches(7.6e-17, "0"));
  EXPECT_FALSE(infidelity_matches(2e-16, "0"));
}

TEST(kernels, suite_passes) {
  for (const auto &c : run_kernel_suite(QFE_DATA_DIR, 1)) EXPECT_TRUE(c.pass) << c.name << " " << c.detail;
}
