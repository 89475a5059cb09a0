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

#ifndef QFE_PHYSICAL_HPP
#define QFE_PHYSICAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qfe/costs.hpp"

namespace qfe {

struct PhysicalAssumptions {
  double cycle_us = 1.0;
  double reaction_us = 10.0;
  int distance = 25;
  int64_t cold_density = 430;  // yoked storage, physical per logical
  int factories = 6;
  int factory_width = 3, factory_height = 4;  // hot patches
  double cultivation_volume = 30000;  // physical qubit rounds per T state
  int t_per_ccz = 8;
  int surgery_layers = 6;
  double surgery_depth = 2.0 / 3.0;  // fraction of d rounds per layer
  int ccz_rounds = 150;              // total rounds per CCZ after slack
  double logical_error = 1e-15;      // per logical qubit per round
  int64_t compute_width = 7, compute_height = 18;
  int64_t protected_qubits = 1600;  // logical qubits charged for errors
  // Operation durations used for the shot time, after rounding.
  double addition_ms = 2.0, lookup_ms = 2.0, phaseup_ms = 1.0;

  int64_t hot_density() const {
    return 2ll * (distance + 1) * (distance + 1);
  }
};

struct CczTiming {
  double cultivation_rounds = 0;  // average per factory for one CCZ
  double surgery_rounds = 0;
  double total_rounds = 0;  // before slack
  int rounded_rounds = 0;
  double ccz_period_us = 0;      // one factory-bank output interval
  double surgery_period_us = 0;  // d rounds
};

CczTiming ccz_timing(const PhysicalAssumptions &a);

struct OperationDurations {
  int largest_addition = 0;  // register width
  int largest_lookup = 0;    // address width
  double addition_us = 0;    // before rounding
  double lookup_us = 0;
  double phaseup_us = 0;  // upper bound
  double addition_ms = 0;  // rounded up to whole milliseconds
  double lookup_ms = 0;
  double phaseup_ms = 0;
};

OperationDurations operation_durations(const SubroutineTally &t,
                                       const PhysicalAssumptions &a);

struct Footprint {
  int64_t cold = 0, hot = 0, compute = 0, total = 0;
};

Footprint qubit_footprint(int64_t cold_logical, int64_t hot_logical,
                          int64_t compute_patches,
                          const PhysicalAssumptions &a);

struct RoutineTime {
  std::string routine;
  double hours = 0;
};

/// Hours per shot from the tally and the rounded durations in `a`.
double shot_hours(const SubroutineTally &t, const PhysicalAssumptions &a,
                  std::vector<RoutineTime> *shares = nullptr);

/// (1 - logical_error)^(qubits * hours * 3.6e9 / cycle_us).
double success_probability(double qubits, double hours,
                           const PhysicalAssumptions &a);
double logical_qubit_rounds(double qubits, double hours,
                            const PhysicalAssumptions &a);

/// Expected days: hours * shots / 24 / success.
double expected_days(double hours, double shots, double success);

struct PhysicalEstimate {
  CczTiming timing;
  OperationDurations durations;
  int64_t cold_logical = 0;
  int64_t hot_logical = 0;
  int64_t hot_symbolic = 0;  // 3f + 2 ell + len m
  int64_t compute_patches = 0;
  int64_t total_logical = 0;
  Footprint footprint;
  Footprint footprint_symbolic;  // with the symbolic hot count
  double shot_hours = 0;
  std::vector<RoutineTime> shares;
  double qubit_rounds = 0;
  double success = 0;
  double expected_shots = 0;
  double expected_days = 0;
};

struct PhysicalOptions {
  // Hot logical count; negative means use the symbolic 3f + 2 ell + len m.
  int64_t hot_logical = 131;
  TallyOptions tally;
};

PhysicalEstimate physical_estimate(const AlgorithmParams &p,
                                   const PhysicalAssumptions &a = {},
                                   const PhysicalOptions &opts = {});

}  // namespace qfe

#endif  // QFE_PHYSICAL_HPP
