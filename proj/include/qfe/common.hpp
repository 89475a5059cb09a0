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

#ifndef QFE_COMMON_HPP
#define QFE_COMMON_HPP

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qfe {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Bits needed to store a: ceil(log2(max(1, a))).
int len(const BigInt &a);
int len_u64(uint64_t a);

inline uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

BigInt big_from_hex(std::string_view hex);
std::string big_to_hex(const BigInt &a);
BigInt big_from_u64(uint64_t v);
uint64_t big_to_u64(const BigInt &v);

/// Odd composite challenge modulus with 617 decimal digits.
const BigInt &rsa2048();

/// Product of two distinct primes of bits/2 and bits - bits/2 bits, with
/// the top bit of each set; deterministic in the seed.
BigInt random_semiprime(int bits, uint64_t seed);

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m);
uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m);
/// Inverse of a modulo m; requires gcd(a, m) = 1.
uint64_t invmod_u64(uint64_t a, uint64_t m);
/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(uint64_t n);

/// Splits one 64-bit seed into stable, named sub-streams.
class SeedSplitter {
 public:
  explicit SeedSplitter(uint64_t seed) : seed_(seed) {}
  uint64_t stream(std::string_view name, uint64_t index = 0) const;
  std::mt19937_64 rng(std::string_view name, uint64_t index = 0) const {
    return std::mt19937_64(stream(name, index));
  }
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

uint64_t splitmix64(uint64_t x);

/// Worker count from QFE_THREADS, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` threads (0 = default).
/// Indices are split into contiguous blocks so results written by index are
/// independent of the thread count.
void parallel_for(size_t n, const std::function<void(size_t)> &body,
                  int threads = 0);

}  // namespace qfe

#endif  // QFE_COMMON_HPP
