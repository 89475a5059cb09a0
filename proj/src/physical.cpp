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

#include "qfe/physical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfe {

using qsim::OpKind;

CczTiming ccz_timing(const PhysicalAssumptions &a) {
  if (a.factories < 1) throw std::invalid_argument("need a factory");
  CczTiming t;
  double footprint = static_cast<double>(a.factory_width) * a.factory_height *
                     static_cast<double>(a.hot_density());
  t.cultivation_rounds = a.cultivation_volume / footprint * a.t_per_ccz;
  t.surgery_rounds = a.surgery_layers * a.surgery_depth * a.distance;
  t.total_rounds = t.cultivation_rounds + t.surgery_rounds;
  t.rounded_rounds = a.ccz_rounds;
  t.ccz_period_us = a.ccz_rounds * a.cycle_us / a.factories;
  t.surgery_period_us = a.distance * a.cycle_us;
  return t;
}

OperationDurations operation_durations(const SubroutineTally &tally,
                                       const PhysicalAssumptions &a) {
  OperationDurations d;
  for (const auto &r : tally.rows) {
    if (r.iterations == 0) continue;
    if (r.expected(OpKind::kAddition) > 0) {
      d.largest_addition = std::max(d.largest_addition, r.register_width);
    }
    if (r.expected(OpKind::kLookup) > 0 || r.expected(OpKind::kPhaseup) > 0) {
      d.largest_lookup = std::max(d.largest_lookup, r.address_width);
    }
  }
  CczTiming t = ccz_timing(a);
  double period = std::max(t.ccz_period_us, t.surgery_period_us);
  // Compute pass consuming width-1 CCZ states, then an uncompute pass that
  // takes no longer.
  d.addition_us =
      2.0 * static_cast<double>(addition_toffolis(d.largest_addition)) * period;
  // One lattice surgery layer per address value beyond the first.
  d.lookup_us = (std::ldexp(1.0, d.largest_lookup) - 1) * period;
  d.phaseup_us = d.lookup_us / 2;
  auto ms_up = [](double us) { return std::ceil(us / 1000.0 - 1e-9); };
  d.addition_ms = ms_up(d.addition_us);
  d.lookup_ms = ms_up(d.lookup_us);
  d.phaseup_ms = ms_up(d.phaseup_us);
  return d;
}

Footprint qubit_footprint(int64_t cold_logical, int64_t hot_logical,
                          int64_t compute_patches,
                          const PhysicalAssumptions &a) {
  if (cold_logical < 0 || hot_logical < 0 || compute_patches < 0) {
    throw std::invalid_argument("negative qubit count");
  }
  Footprint f;
  f.cold = cold_logical * a.cold_density;
  f.hot = hot_logical * a.hot_density();
  f.compute = compute_patches * a.hot_density();
  f.total = f.cold + f.hot + f.compute;
  return f;
}

double shot_hours(const SubroutineTally &t, const PhysicalAssumptions &a,
                  std::vector<RoutineTime> *shares) {
  double total_ms = 0;
  for (const auto &r : t.rows) {
    double per = r.expected(OpKind::kAddition) * a.addition_ms +
                 r.expected(OpKind::kLookup) * a.lookup_ms +
                 r.expected(OpKind::kPhaseup) * a.phaseup_ms;
    double ms = static_cast<double>(r.iterations) * per;
    total_ms += ms;
    if (shares) shares->push_back({qsim::routine_name(r.routine), ms / 3.6e6});
  }
  return total_ms / 3.6e6;
}

double logical_qubit_rounds(double qubits, double hours,
                            const PhysicalAssumptions &a) {
  return qubits * hours * 3.6e9 / a.cycle_us;
}

double success_probability(double qubits, double hours,
                           const PhysicalAssumptions &a) {
  return std::exp(logical_qubit_rounds(qubits, hours, a) *
                  std::log1p(-a.logical_error));
}

double expected_days(double hours, double shots, double success) {
  if (success <= 0) throw std::domain_error("success probability is zero");
  return hours * shots / 24.0 / success;
}

PhysicalEstimate physical_estimate(const AlgorithmParams &p,
                                   const PhysicalAssumptions &a,
                                   const PhysicalOptions &opts) {
  auto cost = estimate(p, opts.tally);
  if (!cost) throw std::invalid_argument("infeasible parameters");
  SubroutineTally t = tally(p, opts.tally);
  PhysicalEstimate e;
  e.timing = ccz_timing(a);
  e.durations = operation_durations(t, a);
  e.cold_logical = p.m;
  e.hot_symbolic = hot_qubits_symbolic(p);
  e.hot_logical = opts.hot_logical >= 0 ? opts.hot_logical : e.hot_symbolic;
  e.compute_patches = a.compute_width * a.compute_height;
  e.total_logical = e.cold_logical + e.hot_logical + e.compute_patches;
  e.footprint =
      qubit_footprint(e.cold_logical, e.hot_logical, e.compute_patches, a);
  e.footprint_symbolic =
      qubit_footprint(e.cold_logical, e.hot_symbolic, e.compute_patches, a);
  e.shot_hours = shot_hours(t, a, &e.shares);
  e.qubit_rounds = logical_qubit_rounds(
      static_cast<double>(a.protected_qubits), e.shot_hours, a);
  e.success = success_probability(static_cast<double>(a.protected_qubits),
                                  e.shot_hours, a);
  e.expected_shots = cost->expected_shots;
  e.expected_days = expected_days(e.shot_hours, e.expected_shots, e.success);
  return e;
}

}  // namespace qfe
