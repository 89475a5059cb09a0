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

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>
#include <random>
#include <set>
#include <sstream>

#include "qfe/residue.hpp"

using namespace qfe;
using boost::multiprecision::cpp_int;

namespace {

cpp_int to_cpp(const BigInt &a) { return cpp_int(a.get_str()); }

std::vector<uint64_t> sieve_primes_with_bits(int ell) {
  uint64_t lo = 1ull << (ell - 1), hi = 1ull << ell;
  std::vector<bool> comp(hi, false);
  std::vector<uint64_t> out;
  for (uint64_t i = 2; i < hi; ++i) {
    if (comp[i]) continue;
    if (i >= lo) out.push_back(i);
    for (uint64_t j = i * i; j < hi; j += i) comp[j] = true;
  }
  return out;
}

// Recomputes a system's claims with cpp_int only.
void independent_check(const ResidueSystem &sys, const BigInt &Nbig, int f) {
  cpp_int N = to_cpp(Nbig), L = 1;
  std::set<uint64_t> seen;
  boost::random::mt19937 brng(1);
  for (uint64_t p : sys.primes) {
    ASSERT_TRUE(seen.insert(p).second) << "duplicate " << p;
    ASSERT_GE(p, 1ull << (sys.ell - 1));
    ASSERT_LT(p, 1ull << sys.ell);
    ASSERT_TRUE(boost::multiprecision::miller_rabin_test(cpp_int(p), 25, brng));
    ASSERT_NE(N % p, 0);
    L *= p;
  }
  cpp_int NW = boost::multiprecision::pow(N, static_cast<unsigned>(sys.w1_count));
  EXPECT_GE(L, NW);
  cpp_int r = L % N;
  cpp_int side = std::min<cpp_int>(r, N - r);
  // side / N < 2^-f.
  EXPECT_LT(side << f, N);
  EXPECT_EQ(to_cpp(sys.L), L);
}

}  // namespace

TEST(residue, modular_deviation_brute_force) {
  for (int N = 3; N < 60; N += 2) {
    for (int a = -130; a < 130; ++a) {
      int r = ((a % N) + N) % N;
      Rational want(std::min(r, N - r), N);
      want.canonicalize();
      ASSERT_EQ(modular_deviation(BigInt(a), BigInt(N)), want) << a << " " << N;
    }
  }
}

TEST(residue, primes_with_bits_match_sieve) {
  for (int ell = 2; ell <= 18; ++ell) {
    auto want = sieve_primes_with_bits(ell);
    EXPECT_EQ(primes_with_bits(ell), want) << ell;
    EXPECT_EQ(prime_count_with_bits(ell), want.size());
  }
}

TEST(residue, primitive_root_generates_group) {
  for (uint64_t p : {3ull, 5ull, 7ull, 101ull, 65537ull, 1000003ull}) {
    uint64_t g = primitive_root(p);
    std::set<uint64_t> seen;
    if (p < 200000) {
      uint64_t x = 1;
      for (uint64_t k = 0; k + 1 < p; ++k) seen.insert(x), x = x * g % p;
      EXPECT_EQ(seen.size(), p - 1) << p;
    } else {
      for (uint64_t q = 2; q < p; ++q) {
        if ((p - 1) % q == 0 && is_prime_u64(q)) {
          EXPECT_NE(powmod_u64(g, (p - 1) / q, p), 1u);
        }
      }
    }
  }
}

TEST(residue, discrete_log_inverts_power) {
  std::mt19937_64 rng(2);
  for (uint64_t p : {11ull, 257ull, 65521ull, 1048573ull, 4194301ull}) {
    uint64_t g = primitive_root(p);
    DiscreteLog dl(p, g, 100);
    for (int i = 0; i < 200; ++i) {
      uint64_t e = rng() % (p - 1);
      ASSERT_EQ(dl.log(powmod_u64(g, e, p)), e);
    }
    EXPECT_THROW(dl.log(0), DlogError);
  }
}

TEST(residue, crt_reconstruct_round_trip) {
  std::vector<uint64_t> primes = {65521, 65519, 65497, 65479, 65449};
  cpp_int L = 1;
  for (auto p : primes) L *= p;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    cpp_int x = (cpp_int(rng()) << 64 | rng()) % L;
    std::vector<uint64_t> res;
    for (auto p : primes) res.push_back(static_cast<uint64_t>(x % p));
    EXPECT_EQ(to_cpp(crt_reconstruct(primes, res)), x);
  }
}

TEST(residue, window_products_and_dlogs) {
  BigInt N = BigInt("281337470672899");
  std::vector<BigInt> mult;
  BigInt g = 3;
  for (int i = 0; i < 7; ++i) {
    mult.push_back(g);
    g = g * g % N;
  }
  auto w = window_products(mult, 3, N);
  ASSERT_EQ(w.products.size(), 3u);
  for (size_t i = 0; i < w.products.size(); ++i) {
    for (size_t v = 0; v < w.products[i].size(); ++v) {
      cpp_int want = 1;
      for (int b = 0; b < 3; ++b) {
        size_t k = i * 3 + static_cast<size_t>(b);
        if ((v >> b) & 1 && k < mult.size()) want = want * to_cpp(mult[k]) % to_cpp(N);
      }
      ASSERT_EQ(to_cpp(w.products[i][v]), want);
    }
  }
  ResidueSystem sys;
  sys.primes = {65521, 65519, 65497};
  sys.ell = 16;
  auto d = dlog_tables(sys, w);
  for (size_t j = 0; j < sys.primes.size(); ++j) {
    uint64_t p = sys.primes[j];
    for (size_t i = 0; i < w.products.size(); ++i)
      for (size_t v = 0; v < w.products[i].size(); ++v) {
        uint64_t want = static_cast<uint64_t>(to_cpp(w.products[i][v]) % p);
        ASSERT_EQ(powmod_u64(d.generators[j], d.D[j][i][v], p), want);
      }
  }
  EXPECT_FALSE(divides_any(65521, w));
}

TEST(residue, find_prime_set_small_moduli) {
  for (const char *dec : {"16777207", "4292870399", "281337470672899"}) {
    Modulus N{BigInt(dec)};
    for (auto [W1, ell, f] : {std::tuple{3, 12, 16}, std::tuple{5, 14, 18},
                              std::tuple{4, 16, 18}}) {
      SearchOptions so;
      so.seed = 5;
      SearchStats st;
      auto excluded = [&](uint64_t p) { return N.value % p == 0; };
      auto sys = find_prime_set(N, static_cast<uint64_t>(W1), ell, f, excluded, so, &st);
      EXPECT_EQ(check_system(sys, N), "") << dec;
      independent_check(sys, N.value, f);
    }
  }
}

TEST(residue, search_is_deterministic_across_thread_counts) {
  Modulus N{BigInt("281337470672899")};
  auto run = [&](int threads) {
    SearchOptions so;
    so.seed = 99;
    so.threads = threads;
    return find_prime_set(N, 6, 16, 20, [](uint64_t) { return false; }, so).primes;
  };
  EXPECT_EQ(run(1), run(3));
}

TEST(residue, insufficient_primes_reported) {
  Modulus N{BigInt("281337470672899")};
  SearchOptions so;
  try {
    find_prime_set(N, 40, 6, 10, [](uint64_t) { return false; }, so);
    FAIL() << "expected an error";
  } catch (const ResidueError &e) {
    EXPECT_EQ(e.kind(), ResidueError::Kind::kInsufficientPrimes);
  }
}

TEST(residue, check_system_rejects_tampering) {
  Modulus N{BigInt("4292870399")};
  SearchOptions so;
  auto sys = find_prime_set(N, 4, 14, 16, [](uint64_t) { return false; }, so);
  ASSERT_EQ(check_system(sys, N), "");
  auto bad = sys;
  bad.primes.back() += 2;
  EXPECT_NE(check_system(bad, N), "");
  bad = sys;
  bad.primes.pop_back();
  EXPECT_NE(check_system(bad, N), "");
}

TEST(residue, system_serialization_round_trip) {
  Modulus N{BigInt("4292870399")};
  SearchOptions so;
  auto sys = find_prime_set(N, 4, 14, 16, [](uint64_t) { return false; }, so);
  std::stringstream ss;
  write_system(ss, sys);
  auto back = read_system(ss);
  EXPECT_EQ(back.primes, sys.primes);
  EXPECT_EQ(back.ell, sys.ell);
  EXPECT_EQ(check_system(back, N), "");
}

TEST(residue, contribution_table_sums_to_residue_reconstruction) {
  Modulus N{BigInt("281337470672899")};
  SearchOptions so;
  auto sys = find_prime_set(N, 4, 16, 18, [](uint64_t) { return false; }, so);
  auto ct = contribution_table(sys, N, 18);
  ASSERT_EQ(ct.u.size(), sys.primes.size());
  cpp_int L = to_cpp(sys.L);
  for (size_t j = 0; j < sys.primes.size(); ++j) {
    cpp_int u = to_cpp(ct.u[j]);
    // CRT basis element: 1 mod p_j, 0 mod the others.
    for (size_t k = 0; k < sys.primes.size(); ++k) {
      EXPECT_EQ(u % sys.primes[k], k == j ? 1 : 0);
    }
    EXPECT_LT(u, L);
  }
  EXPECT_EQ(ct.n_shift, big_to_u64(N.value) >> ct.t);
}
