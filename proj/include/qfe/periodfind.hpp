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

#ifndef QFE_PERIODFIND_HPP
#define QFE_PERIODFIND_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qfe/common.hpp"

namespace qfe::periodfind {

struct PeriodError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint64_t multiplicative_order(uint64_t g, uint64_t N);
/// ceil(S * N) clamped to [1, N].
uint64_t mask_width(double S, uint64_t N);

/// Joint amplitudes over input e < 2^m and output v < N, index e * N + v.
struct DenseState {
  uint64_t N = 0, g = 0;
  int m = 0;
  uint64_t width = 0;
  std::vector<double> amp;

  double norm() const;
  double amplitude(uint64_t e, uint64_t v) const { return amp[e * N + v]; }
};

/// Output register starts uniform over s < ceil(S N), then g^e is added.
DenseState masked_premeasure_state(uint64_t N, uint64_t g, int m, double S);

struct PeakSpectrum {
  int m = 0;
  uint64_t period = 0;
  std::vector<double> prob;  // per frequency y < 2^m

  double total() const;
  /// Index of the peak nearest y * P / 2^m.
  uint64_t bucket(uint64_t y) const;
  std::vector<double> bucket_masses() const;
};

/// Spectrum of the input register after measuring the output as V.
PeakSpectrum collapse_and_spectrum(const DenseState &s, uint64_t V);

/// Spectrum of the indicator of {e < 2^m : e mod P in residues}.
PeakSpectrum periodic_spectrum(uint64_t P, const std::vector<uint64_t> &residues,
                               int m);
/// |beta_k|^2 for k < P: normalized DFT power of the residue set mod P.
std::vector<double> residue_peak_probs(uint64_t P,
                                       const std::vector<uint64_t> &residues);

/// True when a continued-fraction convergent of y / 2^m has denominator r.
bool recovers_order(uint64_t y, int m, uint64_t r, uint64_t N);

// Randomized residue sets.

Rational peak_prob_random_R(uint64_t P, uint64_t w, uint64_t k);

struct ExhaustiveR {
  uint64_t P = 0, w = 0;
  uint64_t subsets = 0;
  bool shifts_uniform = false;  // every nonzero shift has the same count
  Rational zero, nonzero;       // averaged |beta_0|^2 and |beta_k>0|^2
};

/// Averages over every subset of Z_P, grouped by size. P at most 30.
std::vector<ExhaustiveR> exhaustive_random_R(uint64_t P);

struct SampledR {
  std::vector<double> mean, stderr_;
};

SampledR random_R_monte_carlo(uint64_t P, uint64_t w, uint64_t trials,
                              uint64_t seed);

// Success suppression.

/// Per-peak success probability of order recovery for period r read out
/// with m bits, from the single-coset Dirichlet peak shape.
struct PeakModel {
  uint64_t N = 0, g = 0, r = 0;
  int m = 0;
  std::vector<double> peak_success;
  double unmasked_success = 0;
};

PeakModel peak_model(uint64_t N, uint64_t g, int m = 0);

/// Success probability and |beta_0|^2 after measuring output V.
std::pair<double, double> column_success(const PeakModel &pm,
                                         const std::vector<uint64_t> &powers,
                                         uint64_t width, uint64_t V);

/// Likelihood-ratio interval for a binomial rate; `threshold` is the
/// allowed drop in twice the log-likelihood.
std::pair<double, double> binomial_lr_interval(double successes, double n,
                                               double threshold);

struct Suppression {
  uint64_t N = 0, g = 0, r = 0;
  int m = 0;
  double S = 0;
  uint64_t width = 0, shots = 0;
  double masked = 0, unmasked = 0, suppression = 0;
  double ci_low = 0, ci_high = 0;
  double bespoke_low = 0, bespoke_high = 0;  // 100x likelihood drop
  double zero_peak_masked = 0, zero_peak_unmasked = 0;
};

Suppression suppression_experiment(uint64_t N, uint64_t g, double S,
                                   uint64_t shots, uint64_t seed, int m = 0);
Suppression suppression_experiment(const PeakModel &pm, double S,
                                   uint64_t shots, uint64_t seed);

/// Generator of largest multiplicative order, smallest first.
uint64_t max_order_generator(uint64_t N);

}  // namespace qfe::periodfind

#endif  // QFE_PERIODFIND_HPP
