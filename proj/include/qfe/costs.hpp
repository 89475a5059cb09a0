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

#ifndef QFE_COSTS_HPP
#define QFE_COSTS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfe/qsim.hpp"

namespace qfe {

struct AlgorithmParams {
  int n = 0;
  int s = 0;
  int ell = 0;
  int w1 = 0, w3 = 0, w4 = 0;
  int f = 0;
  int m = 0;  // input qubits

  int len_m() const;
  uint64_t W1() const;
  int W3() const;
  int W4() const;
  /// Params with m = ceil(n/2 + n/s).
  static AlgorithmParams standard(int n, int s, int ell, int w1, int w3,
                                  int w4, int f);
  /// Empty when usable, else the reason.
  std::string validate() const;
};

/// ceil(n/2 + n/s).
int standard_m(int n, int s);
/// n/2 + 2 ceil(n/(2s)): x register plus y register.
int eh_register_m(int n, int s);

struct TallyRow {
  qsim::Routine routine = qsim::Routine::kSetup;
  uint64_t iterations = 0;
  int register_width = 0;
  int address_width = 0;
  // Per iteration, indexed by qsim::OpKind.
  std::array<uint64_t, qsim::kOpKindCount> fixed{};
  uint64_t branches = 0;  // 50% branches offered per iteration
  std::array<uint64_t, qsim::kOpKindCount> branch_ops{};

  double expected(qsim::OpKind k) const;
};

struct SubroutineTally {
  uint64_t prime_count = 0;
  std::vector<TallyRow> rows;
  const TallyRow *find(qsim::Routine r) const;
};

struct TallyOptions {
  // Lay out loop4 as printed in the published tally (1.5 additions,
  // 2.5 lookups) instead of the simulated decomposition.
  bool printed_loop4 = false;
  // Count primes as contributing ell-1 bits.
  bool ell_minus_one = false;
  std::optional<uint64_t> prime_count;
};

/// ceil(n W1 / ell), or ell-1 in the denominator.
uint64_t estimated_prime_count(int n, uint64_t W1, int ell,
                               bool ell_minus_one = false);

SubroutineTally tally(const AlgorithmParams &p, const TallyOptions &opts = {});

uint64_t addition_toffolis(int width);
uint64_t lookup_toffolis(int address_width);
uint64_t phaseup_toffolis(int address_width);

/// Expected Toffolis of one shot.
double toffoli_count(const SubroutineTally &t);

/// 3 |P| W4 2^-f.
double epsilon_model(uint64_t prime_count, int W4, int f);
/// 2 sqrt(eps).
double p_deviant(double epsilon);
/// (s+1) / (1 - p_dev) / 0.99.
double expected_shots(int s, double p_dev);

enum class QubitConvention {
  kRegister,  // registers the simulator allocates, adder workspace excluded
  kTable,     // totals as listed in the published qubit tally
};

struct QubitPhase {
  std::string name;
  int64_t added = 0;
  int64_t temporary = 0;
  int64_t total = 0;
};

std::vector<QubitPhase> qubit_profile(const AlgorithmParams &p,
                                      QubitConvention c);
int64_t logical_qubits(const AlgorithmParams &p,
                       QubitConvention c = QubitConvention::kRegister);
/// 3f + 2 ell + len m: the loop4 qubits other than the input register.
int64_t hot_qubits_symbolic(const AlgorithmParams &p);

struct CostEstimate {
  AlgorithmParams params;
  uint64_t prime_count = 0;
  double epsilon = 0;
  double p_deviant = 0;
  double expected_shots = 0;
  double toffolis_per_shot = 0;
  double expected_toffolis = 0;
  int64_t qubits = 0;
  int64_t qubits_table = 0;
  double q3t = 0;
  bool pareto = false;
};

/// Nullopt when infeasible; `why` receives the reason.
std::optional<CostEstimate> estimate(const AlgorithmParams &p,
                                     const TallyOptions &opts = {},
                                     std::string *why = nullptr);

struct IntRange {
  int lo = 0, hi = 0;
};

struct ScanRanges {
  IntRange s{2, 14};
  IntRange ell{18, 25};
  IntRange w1{2, 8};
  IntRange w3{2, 6};
  IntRange w4{2, 8};
  IntRange f{24, 59};
};

/// Feasible points in canonical (s, ell, w1, w3, w4, f) order, Pareto flags
/// set on (qubits, expected_toffolis).
std::vector<CostEstimate> grid_scan(int n, const ScanRanges &r,
                                    const TallyOptions &opts = {},
                                    int threads = 0);
void mark_pareto(std::vector<CostEstimate> &points);
/// Index of the q^3 t minimum; throws on an empty list.
size_t q3t_optimum(const std::vector<CostEstimate> &points);

void write_csv_header(std::ostream &out);
void write_csv_row(std::ostream &out, const CostEstimate &e);

}  // namespace qfe

#endif  // QFE_COSTS_HPP
