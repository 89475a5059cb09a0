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

#include "qfe/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qfe::kernels {

bool adder_bit_step(bool a_k, bool b_k, bool s_k, bool a_k1, bool b_k1) {
  return ((a_k ^ s_k) && (b_k ^ s_k)) ^ (a_k ^ b_k ^ s_k ^ a_k1 ^ b_k1);
}

uint64_t ripple_add_via_identity(uint64_t a, uint64_t b, int width) {
  if (width < 0 || width > 62) throw std::invalid_argument("bad width");
  auto bit = [](uint64_t x, int k) { return k >= 0 && ((x >> k) & 1); };
  // Start from virtual zero bits below position 0.
  bool s = adder_bit_step(false, false, false, bit(a, 0), bit(b, 0));
  uint64_t out = s ? 1 : 0;
  for (int k = 0; k < width; ++k) {
    s = adder_bit_step(bit(a, k), bit(b, k), s, bit(a, k + 1), bit(b, k + 1));
    if (s) out |= 1ull << (k + 1);
  }
  return out;
}

std::vector<uint8_t> power_product(const std::vector<uint8_t> &bits) {
  size_t n = bits.size();
  if (n > 24) throw std::invalid_argument("too many bits");
  std::vector<uint8_t> out(size_t{1} << n);
  for (size_t mask = 0; mask < out.size(); ++mask) {
    uint8_t v = 1;
    for (size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) v &= bits[i] & 1;
    }
    out[mask] = v;
  }
  return out;
}

BitTable::BitTable(int w) : width(w), bits(size_t{1} << w, 0) {}

BitMatrix multiply_mod2(const BitMatrix &a, const BitMatrix &b) {
  if (a.cols != b.rows) throw std::invalid_argument("shape mismatch");
  BitMatrix out(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i)
    for (size_t k = 0; k < a.cols; ++k)
      if (a.at(i, k))
        for (size_t j = 0; j < b.cols; ++j) out.at(i, j) ^= b.at(k, j);
  return out;
}

BitMatrix kron(const BitMatrix &a, const BitMatrix &b) {
  BitMatrix out(a.rows * b.rows, a.cols * b.cols);
  for (size_t i = 0; i < a.rows; ++i)
    for (size_t j = 0; j < a.cols; ++j)
      for (size_t k = 0; k < b.rows; ++k)
        for (size_t l = 0; l < b.cols; ++l)
          out.at(i * b.rows + k, j * b.cols + l) = a.at(i, j) & b.at(k, l);
  return out;
}

BitMatrix kron_power(const BitMatrix &a, int k) {
  BitMatrix out(1, 1);
  out.at(0, 0) = 1;
  for (int i = 0; i < k; ++i) out = kron(out, a);
  return out;
}

namespace {

BitMatrix lower() {
  BitMatrix m(2, 2);
  m.at(0, 0) = 1;
  m.at(1, 0) = 1;
  m.at(1, 1) = 1;
  return m;
}

BitMatrix upper() {
  BitMatrix m(2, 2);
  m.at(0, 0) = 1;
  m.at(0, 1) = 1;
  m.at(1, 1) = 1;
  return m;
}

void check_split(const BitTable &t, int low_bits, int high_bits) {
  if (low_bits < 0 || high_bits < 0 || low_bits + high_bits != t.width ||
      t.bits.size() != (size_t{1} << t.width)) {
    throw std::invalid_argument("split does not match table width");
  }
}

}  // namespace

BitMatrix as_matrix(const BitTable &t, int low_bits) {
  size_t cols = size_t{1} << low_bits;
  size_t rows = t.bits.size() / cols;
  BitMatrix m(rows, cols);
  for (size_t v = 0; v < t.bits.size(); ++v) m.at(v / cols, v % cols) = t.bits[v] & 1;
  return m;
}

BitTable from_matrix(const BitMatrix &m, int low_bits) {
  BitTable t(std::bit_width(m.rows * m.cols) - 1);
  size_t cols = size_t{1} << low_bits;
  for (size_t v = 0; v < t.bits.size(); ++v) t.bits[v] = m.at(v / cols, v % cols);
  return t;
}

BitMatrix exor_transform(const BitTable &t, int low_bits, int high_bits) {
  check_split(t, low_bits, high_bits);
  BitMatrix left = kron_power(lower(), high_bits);
  BitMatrix right = kron_power(upper(), low_bits);
  return multiply_mod2(multiply_mod2(left, as_matrix(t, low_bits)), right);
}

BitMatrix exor_transform_fast(const BitTable &t, int low_bits, int high_bits) {
  check_split(t, low_bits, high_bits);
  // Kronecker powers of the triangular factors map a table to its subset
  // sums, which is the GF(2) zeta transform over the index bits.
  std::vector<uint8_t> a(t.bits.begin(), t.bits.end());
  for (int b = 0; b < t.width; ++b) {
    size_t step = size_t{1} << b;
    for (size_t v = 0; v < a.size(); ++v) {
      if (v & step) a[v] ^= a[v ^ step];
    }
  }
  BitTable out(t.width);
  out.bits = a;
  return as_matrix(out, low_bits);
}

BitTable exor_inverse(const BitMatrix &c, int low_bits, int high_bits) {
  BitMatrix left = kron_power(lower(), high_bits);
  BitMatrix right = kron_power(upper(), low_bits);
  return from_matrix(multiply_mod2(multiply_mod2(left, c), right), low_bits);
}

bool phaseup_equivalence(const BitTable &t) {
  if (t.width < 0 || t.width > 12) throw std::invalid_argument("width > 12");
  int hl = t.width / 2, hh = t.width - hl;
  BitMatrix c = exor_transform(t, hl, hh);
  for (uint64_t v = 0; v < t.bits.size(); ++v) {
    std::vector<uint8_t> lo(static_cast<size_t>(hl)), hi(static_cast<size_t>(hh));
    for (int i = 0; i < hl; ++i) lo[static_cast<size_t>(i)] = (v >> i) & 1;
    for (int i = 0; i < hh; ++i) hi[static_cast<size_t>(i)] = (v >> (hl + i)) & 1;
    auto L = power_product(lo), H = power_product(hi);
    uint8_t parity = 0;
    for (size_t h = 0; h < H.size(); ++h)
      for (size_t l = 0; l < L.size(); ++l)
        if (c.at(h, l)) parity ^= H[h] & L[l];  // CZ(H*_h, L*_l)
    if (parity != (t.bits[v] & 1)) return false;
  }
  return true;
}

namespace {

using C = std::complex<double>;
using M = std::array<C, 4>;  // row-major 2x2

State apply(const M &g, const State &s) {
  return {g[0] * s[0] + g[1] * s[1], g[2] * s[0] + g[3] * s[1]};
}

M mul(const M &a, const M &b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

M adjoint(const M &a) {
  return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

const double kR = 1 / std::numbers::sqrt2;

M gate(const std::string &name) {
  const C i(0, 1);
  if (name == "H") return {kR, kR, kR, -kR};
  if (name == "X") return {0, 1, 1, 0};
  if (name == "Y") return {0, -i, i, 0};
  if (name == "Z") return {1, 0, 0, -1};
  if (name == "S") return {1, 0, 0, i};
  throw std::invalid_argument("unknown Clifford " + name);
}

}  // namespace

State sequence_state(const GateSequence &seq) {
  const C i(0, 1);
  State s;
  switch (seq.init) {
    case 'X': s = {kR, kR}; break;
    case 'Y': s = {kR, i * kR}; break;
    case 'Z': s = {1, 0}; break;
    default: throw std::invalid_argument("init must be X, Y or Z");
  }
  M tz = {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
  M h = gate("H");
  M tx = mul(mul(h, tz), h);
  auto check = [](const State &v) {
    double n = std::norm(v[0]) + std::norm(v[1]);
    if (std::abs(n - 1) > 1e-12) throw std::runtime_error("norm drift");
  };
  for (size_t k = 0; k < seq.signs.size(); ++k) {
    char c = seq.signs[k];
    if (c != '+' && c != '-') throw std::invalid_argument("bad sign string");
    M g = k % 2 == 0 ? tx : tz;
    if (c == '-') g = adjoint(g);
    s = apply(g, s);
    check(s);
  }
  for (const auto &f : seq.finish) {
    s = apply(gate(f), s);
    check(s);
  }
  return s;
}

double gradient_infidelity(const GateSequence &seq, int k) {
  State s = sequence_state(seq);
  C phase = std::polar(1.0, std::numbers::pi * std::ldexp(1.0, -k));
  // <perp| with perp = (|0> - phase |1>)/sqrt 2.
  C overlap = kR * s[0] - std::conj(phase) * kR * s[1];
  return std::norm(overlap);
}

GradientTable read_gradient_table(std::istream &in) {
  GradientTable t;
  std::string line;
  bool have_total = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "total") {
      ls >> t.total_t >> t.total_text;
      if (!ls) throw std::runtime_error("bad total line");
      t.total_infidelity = std::stod(t.total_text);
      have_total = true;
      continue;
    }
    GradientRow r;
    std::string init, signs, finish;
    r.k = std::stoi(first);
    ls >> init >> signs >> finish >> r.t_count >> r.infidelity_text;
    if (!ls || init.size() != 1) throw std::runtime_error("bad row: " + line);
    r.seq.init = init[0];
    if (signs != ".") r.seq.signs = signs;
    if (finish != ".") {
      std::istringstream fs(finish);
      std::string g;
      while (std::getline(fs, g, ',')) r.seq.finish.push_back(g);
    }
    r.infidelity = std::stod(r.infidelity_text);
    if (static_cast<int>(r.seq.signs.size()) != r.t_count) {
      throw std::runtime_error("sign string length differs from T count");
    }
    t.rows.push_back(r);
  }
  if (!have_total) throw std::runtime_error("missing total line");
  return t;
}

GradientTable load_gradient_table(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_gradient_table(in);
}

std::pair<int, double> gradient_table_totals(const GradientTable &t) {
  int tc = 0;
  double inf = 0;
  for (const auto &r : t.rows) {
    tc += static_cast<int>(r.seq.signs.size());
    inf += gradient_infidelity(r.seq, r.k);
  }
  return {tc, inf};
}

std::string two_sig(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1e", x);
  return buf;
}

double ceil_two_sig(double x) {
  if (x <= 0) return 0;
  double e = std::floor(std::log10(x)) - 1;
  double scale = std::pow(10.0, e);
  return std::ceil(x / scale - 1e-9) * scale;
}

bool infidelity_matches(double computed, const std::string &printed) {
  double p = std::stod(printed);
  if (p == 0) return computed < 1e-16;
  return two_sig(computed) == two_sig(p);
}

std::vector<SuiteCheck> run_kernel_suite(const std::string &data_dir,
                                         uint64_t seed) {
  std::vector<SuiteCheck> out;
  {
    int bad = 0;
    for (int c = 0; c < 32; ++c) {
      bool ak = c & 1, bk = c & 2, sk = c & 4, ak1 = c & 8, bk1 = c & 16;
      // Carry into position k is fixed by the sum bit.
      int carry = ak ^ bk ^ sk;
      int sum = (ak + 2 * ak1) + (bk + 2 * bk1) + carry;
      bad += adder_bit_step(ak, bk, sk, ak1, bk1) != static_cast<bool>(sum & 2);
    }
    out.push_back({"adder_identity", bad == 0, std::to_string(32 - bad) + "/32"});
  }
  {
    int bad = 0, total = 0;
    for (int w = 1; w <= 6; ++w)
      for (uint64_t a = 0; a < (1u << w); ++a)
        for (uint64_t b = 0; b < (1u << w); ++b, ++total)
          bad += ripple_add_via_identity(a, b, w) != a + b;
    out.push_back({"ripple_add", bad == 0,
                   std::to_string(total - bad) + "/" + std::to_string(total)});
  }
  {
    std::mt19937_64 rng(seed);
    int bad = 0, total = 0;
    for (int w = 1; w <= 8; ++w) {
      for (int k = 0; k < 50; ++k, ++total) {
        BitTable t(w);
        for (auto &b : t.bits) b = rng() & 1;
        int hl = w / 2, hh = w - hl;
        bool ok = phaseup_equivalence(t) &&
                  exor_transform(t, hl, hh) == exor_transform_fast(t, hl, hh) &&
                  exor_inverse(exor_transform(t, hl, hh), hl, hh).bits == t.bits;
        bad += !ok;
      }
    }
    out.push_back({"phaseup_exor", bad == 0,
                   std::to_string(total - bad) + "/" + std::to_string(total)});
  }
  {
    // a=1, b=0, c=1 listed from index 7 down to 0.
    auto pp = power_product({1, 0, 1});
    std::string got;
    for (int i = 7; i >= 0; --i) got += static_cast<char>('0' + pp[static_cast<size_t>(i)]);
    out.push_back({"power_product", got == "00110011", got});
  }
  for (const char *name : {"gradient_1e-6.txt", "gradient_1e-15.txt"}) {
    SuiteCheck c{std::string("gradient ") + name, false, ""};
    try {
      auto t = load_gradient_table(data_dir + "/" + name);
      int rows_ok = 0;
      for (const auto &r : t.rows) {
        rows_ok += infidelity_matches(gradient_infidelity(r.seq, r.k),
                                      r.infidelity_text);
      }
      auto [tc, inf] = gradient_table_totals(t);
      c.pass = rows_ok == static_cast<int>(t.rows.size()) && tc == t.total_t &&
               two_sig(ceil_two_sig(inf)) == two_sig(t.total_infidelity);
      c.detail = "rows " + std::to_string(rows_ok) + "/" +
                 std::to_string(t.rows.size()) + " T " + std::to_string(tc) +
                 " infidelity " + two_sig(inf);
    } catch (const std::exception &e) {
      c.detail = e.what();
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace qfe::kernels
