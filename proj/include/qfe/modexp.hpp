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

#ifndef QFE_MODEXP_HPP
#define QFE_MODEXP_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfe/costs.hpp"
#include "qfe/qsim.hpp"
#include "qfe/residue.hpp"

namespace qfe {

struct PrimeTables {
  uint64_t p = 0;
  uint64_t g = 0;  // generator of (Z/p)^*
  // loop1[i][v]: offset added into the running sum, mod 2^(ell + len m).
  std::vector<std::vector<uint64_t>> loop1;
  // loop4[i][v]: truncated contribution of window value v at window i.
  std::vector<std::vector<uint64_t>> loop4;
  // Nt - loop4[i][v], the table actually subtracted.
  std::vector<std::vector<uint64_t>> loop4_sub;
};

struct ExecutionConfig {
  Modulus N{BigInt(3)};
  BigInt g, h;
  bool eh_mode = true;
  int x_bits = 0, y_bits = 0;
  AlgorithmParams params;
  std::vector<BigInt> multipliers;
  WindowedMultipliers windows;
  ResidueSystem system;
  ContributionTable contrib;
  DlogTable dlogs;
  std::vector<PrimeTables> primes;
  // (|P|+1)-th loop1 pass: subtracts the last prime's sum.
  std::vector<std::vector<uint64_t>> loop1_final;
  int t = 0;
  uint64_t Nt = 0;
  double epsilon = 0;       // 3 |P| W4 2^-f
  Rational epsilon_cert;    // rigorous per-addition charges
  uint64_t mask_bound = 1;  // ceil(sqrt(epsilon) * Nt)
  int sum_width() const { return params.ell + params.len_m(); }
};

struct ConfigOptions {
  bool eh_mode = true;
  SearchOptions search;
};

/// Input register split for Ekera-Hastad period finding: x then y bits.
int eh_y_bits(int n, int s);

ExecutionConfig build_config(const Modulus &N, const BigInt &g,
                             const AlgorithmParams &params,
                             const ConfigOptions &opts = {});

/// Residues of prod_i windows[i][e_i] modulo each prime, by direct products.
std::vector<uint64_t> exponent_residues(const ExecutionConfig &c,
                                        const std::vector<uint64_t> &e);
/// Truncated approximation of g^x h^y mod N, scaled down by 2^t.
uint64_t classical_oracle(const ExecutionConfig &c,
                          const std::vector<uint64_t> &e);
/// Exact g^x h^y mod N for the exponent bits e.
BigInt exact_power(const ExecutionConfig &c, const std::vector<uint64_t> &e);
/// Delta_N(exact - (approx << t)).
Rational approximation_deviation(const ExecutionConfig &c,
                                 const std::vector<uint64_t> &e);

enum class Fault {
  kNone,
  kSkipDeferredFlip,  // drop the global flip owed by a deferred underflow bit
  kSkipLoop4Phaseup,
};

struct ShotOptions {
  std::optional<std::vector<uint64_t>> forced_e;
  std::optional<uint64_t> forced_mask;
  Fault fault = Fault::kNone;
  std::ostream *trace = nullptr;
};

struct ShotRecord {
  uint64_t seed = 0;
  std::vector<uint64_t> e;
  uint64_t mask = 0;
  uint64_t measurement = 0;
  uint64_t expected = 0;  // (mask + oracle) mod Nt
  bool clean = false;
  std::string error;
  int high_water = 0;
  qsim::Counters counters{};
  bool matches() const { return clean && measurement == expected; }
};

ShotRecord run_shot(const ExecutionConfig &c, uint64_t seed,
                    const ShotOptions &opts = {});

/// Live registers shared by the subroutines of one shot.
struct ShotRegisters {
  qsim::QuintView e, acc, sum, v;
  std::vector<int> e_vents;
  ShotOptions opts;
  bool fault_fired = false;
};

// Subroutines, exposed for unit tests. `j == |P|` in loop1 is the final
// uncompute pass.
void loop1(qsim::SimState &s, const ExecutionConfig &c, size_t j,
           ShotRegisters &r);
void loop2(qsim::SimState &s, uint64_t p, const qsim::QuintView &sum, int ell);
void unloop2(qsim::SimState &s, uint64_t p, const qsim::QuintView &sum,
             int ell);
/// Leaves g^(sum mod (p-1)) mod p in a fresh ell-bit register r.v.
void loop3(qsim::SimState &s, uint64_t p, uint64_t g, int w3,
           const qsim::QuintView &exponent, ShotRegisters &r);
void unloop3(qsim::SimState &s, uint64_t p, uint64_t g, int w3,
             const qsim::QuintView &exponent, ShotRegisters &r);
void loop4(qsim::SimState &s, const ExecutionConfig &c, size_t j,
           ShotRegisters &r);

/// Windowed table used by loop3/unloop3: entry for address x + (y << xw) is
/// base^(+-x) * y * 2^shift mod p.
std::vector<uint64_t> multiply_table(uint64_t p, uint64_t base, bool inverse,
                                     int xw, int yw, int shift);

/// Compares simulated counters against a symbolic tally. Returns one line
/// per discrepancy; empty means exact agreement on counts and addresses.
std::vector<std::string> compare_counters(const qsim::Counters &got,
                                          const SubroutineTally &want,
                                          double sigmas = 3.0);

void write_shot(std::ostream &out, const ShotRecord &r);
/// Hex of an exponent register stored as 64-bit words.
std::string words_to_hex(const std::vector<uint64_t> &w);

}  // namespace qfe

#endif  // QFE_MODEXP_HPP
