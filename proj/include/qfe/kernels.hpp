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

#ifndef QFE_KERNELS_HPP
#define QFE_KERNELS_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qfe::kernels {

// Adder identity.

/// s_{k+1} from bits k and k+1 of the addends and bit k of the sum.
bool adder_bit_step(bool a_k, bool b_k, bool s_k, bool a_k1, bool b_k1);
/// (a + b) mod 2^(width+1), bit by bit through adder_bit_step only.
uint64_t ripple_add_via_identity(uint64_t a, uint64_t b, int width);

// Phaseup synthesis.

/// Entry at index `mask` is the AND of the selected input bits; index 0 is 1.
std::vector<uint8_t> power_product(const std::vector<uint8_t> &bits);

/// A 2^width table of phase-flip bits, index = low half + (high half << hL).
struct BitTable {
  int width = 0;
  std::vector<uint8_t> bits;

  BitTable() = default;
  explicit BitTable(int w);
  uint8_t at(uint64_t v) const { return bits[v]; }
};

/// Row-major 0/1 matrix.
struct BitMatrix {
  size_t rows = 0, cols = 0;
  std::vector<uint8_t> v;

  BitMatrix(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0) {}
  uint8_t &at(size_t r, size_t c) { return v[r * cols + c]; }
  uint8_t at(size_t r, size_t c) const { return v[r * cols + c]; }
  bool operator==(const BitMatrix &) const = default;
};

BitMatrix multiply_mod2(const BitMatrix &a, const BitMatrix &b);
BitMatrix kron(const BitMatrix &a, const BitMatrix &b);
BitMatrix kron_power(const BitMatrix &a, int k);

/// T reshaped with rows indexed by the high half and columns by the low.
BitMatrix as_matrix(const BitTable &t, int low_bits);
BitTable from_matrix(const BitMatrix &m, int low_bits);

/// [[1,0],[1,1]]^(x hH) . T . [[1,1],[0,1]]^(x hL) mod 2.
BitMatrix exor_transform(const BitTable &t, int low_bits, int high_bits);
/// Same coefficients via an in-place subset transform.
BitMatrix exor_transform_fast(const BitTable &t, int low_bits, int high_bits);
/// Inverse sandwich; the factor matrices are involutions mod 2.
BitTable exor_inverse(const BitMatrix &coeffs, int low_bits, int high_bits);

/// Exhaustive check that masked phase flips selected by the coefficients
/// reproduce (-1)^T on every input. Width at most 12.
bool phaseup_equivalence(const BitTable &t);

// Phase gradient sequences.

using State = std::array<std::complex<double>, 2>;

struct GateSequence {
  char init = 'Z';                  // +1 eigenstate of X, Y or Z
  std::string signs;                // T_X, T_Z alternation, '+' or '-'
  std::vector<std::string> finish;  // Cliffords applied left to right
};

State sequence_state(const GateSequence &seq);
/// 1 - |<target|state>|^2 with target (|0> + e^(i pi 2^-k)|1>)/sqrt 2,
/// computed from the orthogonal complement for precision.
double gradient_infidelity(const GateSequence &seq, int k);

struct GradientRow {
  int k = 0;
  GateSequence seq;
  int t_count = 0;
  double infidelity = 0;
  std::string infidelity_text;
};

struct GradientTable {
  int total_t = 0;
  double total_infidelity = 0;
  std::string total_text;
  std::vector<GradientRow> rows;
};

GradientTable read_gradient_table(std::istream &in);
GradientTable load_gradient_table(const std::string &path);

/// Sum of T counts and computed infidelities.
std::pair<int, double> gradient_table_totals(const GradientTable &t);

/// Two significant figures in %.1e form.
std::string two_sig(double x);
/// Rounds up to two significant figures.
double ceil_two_sig(double x);
/// Table entry match: equal at two significant figures, or a printed zero
/// below the 1e-16 resolution of a double-precision fidelity.
bool infidelity_matches(double computed, const std::string &printed);

struct SuiteCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Adder, ripple, EXOR and power-product checks plus both gradient tables
/// found in `data_dir`.
std::vector<SuiteCheck> run_kernel_suite(const std::string &data_dir,
                                         uint64_t seed);

}  // namespace qfe::kernels

#endif  // QFE_KERNELS_HPP
