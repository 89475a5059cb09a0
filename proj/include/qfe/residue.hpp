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

#ifndef QFE_RESIDUE_HPP
#define QFE_RESIDUE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qfe/common.hpp"

namespace qfe {

struct Modulus {
  BigInt value;
  int n = 0;

  explicit Modulus(BigInt v);
  static Modulus from_hex(std::string_view hex) {
    return Modulus(big_from_hex(hex));
  }
};

/// min(a mod N, -a mod N) / N.
Rational modular_deviation(const BigInt &a, const BigInt &N);

struct ResidueSystem {
  std::vector<uint64_t> primes;
  int ell = 0;
  int f_target = 0;
  uint64_t w1_count = 0;  // W1: L must be at least N^W1.
  BigInt modulus;
  BigInt L;
  BigInt L_mod_N;
  Rational deviation;
};

struct ContributionTable {
  std::vector<BigInt> u;
  // C[j][k] for k < ell.
  std::vector<std::vector<uint64_t>> C;
  int t = 0;
  uint64_t n_shift = 0;  // N >> t
};

class ResidueError : public std::runtime_error {
 public:
  enum class Kind { kBudgetExhausted, kInsufficientPrimes, kInvalid };
  ResidueError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SearchOptions {
  uint64_t seed = 0;
  uint64_t budget = 1ull << 26;  // candidate swaps
  int workers = 8;               // logical workers; fixed for determinism
  uint64_t chunk = 4096;         // swaps per worker per round
  int threads = 0;               // 0 means thread_count()
};

struct SearchStats {
  uint64_t candidates = 0;
  uint64_t excluded = 0;
  uint64_t swaps_tried = 0;
  uint64_t swaps_accepted = 0;
  double seconds = 0;
};

/// All primes with exactly `ell` bits, ascending.
std::vector<uint64_t> primes_with_bits(int ell);
/// Count of primes with exactly `ell` bits (cached sieve).
uint64_t prime_count_with_bits(int ell);

/// Returns true when the prime must not be used.
using PrimeExclusion = std::function<bool(uint64_t)>;

ResidueSystem find_prime_set(const Modulus &N, uint64_t W1, int ell, int f,
                             const PrimeExclusion &excluded,
                             const SearchOptions &opts,
                             SearchStats *stats = nullptr);

/// Recomputes every invariant from scratch. Returns an empty string when the
/// system is valid, else a description of the first failure.
std::string check_system(const ResidueSystem &sys, const Modulus &N);

ContributionTable contribution_table(const ResidueSystem &sys,
                                     const Modulus &N, int f);

/// (sum r_j u_j) mod L.
BigInt crt_reconstruct(const ResidueSystem &sys,
                       const std::vector<uint64_t> &residues);
BigInt crt_reconstruct(const std::vector<uint64_t> &primes,
                       const std::vector<uint64_t> &residues);

/// Generator of the multiplicative group mod prime p.
uint64_t primitive_root(uint64_t p);

/// Baby-step giant-step logs base g modulo prime p, sized for a batch of
/// `expected_queries` lookups.
class DiscreteLog {
 public:
  DiscreteLog(uint64_t p, uint64_t g, uint64_t expected_queries = 1);
  /// Exponent in [0, p-1); throws when x is 0 mod p.
  uint64_t log(uint64_t x) const;
  uint64_t p() const { return p_; }
  uint64_t g() const { return g_; }

 private:
  uint64_t p_, g_, baby_, giant_factor_;
  std::vector<std::pair<uint32_t, uint32_t>> table_;  // (g^i, i) sorted
};

class DlogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Window products: products[i][v] = product of the multipliers selected by
/// the set bits of v in window i, reduced mod N.
struct WindowedMultipliers {
  int window = 0;
  std::vector<std::vector<BigInt>> products;
};

WindowedMultipliers window_products(const std::vector<BigInt> &multipliers,
                                    int window, const BigInt &N);

/// True when some window product is 0 mod p.
bool divides_any(uint64_t p, const WindowedMultipliers &w);

struct DlogTable {
  std::vector<uint64_t> generators;  // per prime
  // D[j][i][v]: log of products[i][v] mod p_j base generators[j].
  std::vector<std::vector<std::vector<uint32_t>>> D;

  /// D[j][i][v] - D[j-1][i][v], with D[-1] taken as zero.
  int64_t diff(size_t j, size_t i, size_t v) const;
};

DlogTable dlog_tables(const ResidueSystem &sys, const WindowedMultipliers &w);

void write_system(std::ostream &out, const ResidueSystem &sys);
ResidueSystem read_system(std::istream &in);

}  // namespace qfe

#endif  // QFE_RESIDUE_HPP
