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

#ifndef QFE_QSIM_HPP
#define QFE_QSIM_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfe::qsim {

/// Subroutines that own operation counters.
enum class Routine : int {
  kSetup = 0,
  kLoop1,
  kLoop2,
  kLoop3Startup,
  kLoop3Body,
  kLoop4,
  kUnloop3Body,
  kUnloop3Cleanup,
  kUnloop2,
  kFinish,
  kCount
};
inline constexpr int kRoutineCount = static_cast<int>(Routine::kCount);
const char *routine_name(Routine r);

enum class OpKind : int { kAddition = 0, kLookup, kPhaseup, kCount };
inline constexpr int kOpKindCount = static_cast<int>(OpKind::kCount);
const char *op_kind_name(OpKind k);

struct RoutineCounters {
  // Operations issued unconditionally.
  std::array<uint64_t, kOpKindCount> fixed{};
  // Operations issued inside taken 50% branches.
  std::array<uint64_t, kOpKindCount> conditional{};
  uint64_t branches_offered = 0;
  uint64_t branches_taken = 0;
  std::array<int, kOpKindCount> max_address_width{};
  std::array<int, kOpKindCount> max_register_width{};

  bool operator==(const RoutineCounters &) const = default;
};

using Counters = std::array<RoutineCounters, kRoutineCount>;

struct Segment {
  int reg = -1;
  int offset = 0;
  int length = 0;
};

/// A slice or concatenation of register bits, least significant first.
class QuintView {
 public:
  QuintView() = default;
  QuintView(int reg, int offset, int length) {
    if (length > 0) segments_.push_back({reg, offset, length});
  }

  int size() const;
  bool empty() const { return segments_.empty(); }
  const std::vector<Segment> &segments() const { return segments_; }

  /// Bits [lo, hi) of this view (clamped to its size).
  QuintView slice(int lo, int hi) const;
  QuintView bit(int k) const { return slice(k, k + 1); }
  /// `this` is the low part, `high` goes above it.
  QuintView concat(const QuintView &high) const;
  /// True when the view is exactly one whole register.
  bool whole_register(int reg_length) const;
  int single_register() const;

 private:
  std::vector<Segment> segments_;
};

class Vent {
 public:
  Vent() = default;
  explicit Vent(int width);
  int width() const { return width_; }
  bool get(uint64_t addr) const;
  void flip(uint64_t addr);
  /// Flips every address a with parity(result & table[a]) = 1.
  void flip_parity(const std::vector<uint64_t> &table, uint64_t result);
  void merge(const Vent &other);
  bool empty() const;
  size_t count() const;
  void clear();

 private:
  int width_ = 0;
  std::vector<uint64_t> bits_;
};

struct UncomputeInfo {
  Vent vent;
  uint64_t bits = 0;
};

class SimError : public std::runtime_error {
 public:
  enum class Kind { kValueMismatch, kUnbalancedStack, kDirtyFinish, kUsage };
  SimError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct MeasurementRecord {
  std::string label;
  int width = 0;
  uint64_t bits = 0;  // low 64 bits of the result
};

class SimState {
 public:
  explicit SimState(uint64_t seed);

  // Allocation.
  QuintView alloc(int bits, const std::string &label = "");
  QuintView alloc_uniform(int bits, const std::string &label = "");
  /// Uniform value in [0, bound); width ceil(log2 bound) unless given.
  QuintView alloc_uniform_range(uint64_t bound, int width = -1,
                                const std::string &label = "");
  /// Opaque register whose contents never enter arithmetic.
  QuintView alloc_phase_gradient(int bits);
  void release_phase_gradient(const QuintView &v);

  // Values.
  uint64_t value(const QuintView &v) const;  // view of at most 64 bits
  /// Value of a view of any width, 64 bits per word, least significant first.
  std::vector<uint64_t> value_words(const QuintView &v) const;
  int register_length(int reg) const;
  bool is_live(int reg) const;

  // Injection hooks for tests.
  void force_value(const QuintView &v, uint64_t value);
  void force_measurements(const std::vector<bool> &results);

  // Arithmetic. Every call counts one addition.
  void add_const(const QuintView &target, uint64_t k);
  void sub_const(const QuintView &target, uint64_t k);
  void add(const QuintView &target, const QuintView &source);
  void sub(const QuintView &target, const QuintView &source);
  /// target += ctrl ? k : 0, offset read from a Z-split copy of ctrl.
  void add_ghz(const QuintView &target, const QuintView &ctrl, uint64_t k);
  void sub_ghz(const QuintView &target, const QuintView &ctrl, uint64_t k);

  // Phase operations.
  void phase_flip_if(bool predicate);
  /// Comparison flip, counted as one addition: flips when a >= b.
  void flip_if_geq(const QuintView &a, const QuintView &b);

  // Table lookups; out must be zero. Counts one lookup.
  void lookup(const std::vector<uint64_t> &table, const QuintView &addr,
              const QuintView &out);
  /// Measurement-based erasure of a lookup output: mx_rz(out), route the
  /// parity corrections into vent, then free out's register.
  void unlookup(const std::vector<uint64_t> &table, const QuintView &out,
                Vent &vent);
  /// Counts one phaseup. Flips the sign if vent[addr] is set; clears vent.
  void phaseup(Vent &vent, const QuintView &addr);

  // Measurement.
  uint64_t mx_rz(const QuintView &v, const std::string &label = "");
  uint64_t del_measure_x(const QuintView &v, const std::string &label = "");
  uint64_t del_measure_z(const QuintView &v, const std::string &label = "");
  void del_by_equal_to(const QuintView &v, uint64_t k);

  // Deferred phase information.
  void push_uncompute_info(UncomputeInfo info);
  UncomputeInfo pop_uncompute_info();
  size_t stack_depth() const { return stack_.size(); }

  // Vent registry; all vents must be empty and released at the end.
  Vent &vent(int id) { return vents_.at(static_cast<size_t>(id)); }
  int new_vent(int width);
  void release_vent(int id);

  void verify_clean_finish() const;

  // Bookkeeping.
  void set_routine(Routine r) { routine_ = r; }
  Routine routine() const { return routine_; }
  void begin_branch(bool taken);
  void end_branch();
  const Counters &counters() const { return counters_; }
  int sign() const { return sign_; }
  int live_qubits() const { return live_qubits_; }
  int high_water() const { return high_water_; }
  int live_registers() const;
  uint64_t allocations() const { return allocs_; }
  uint64_t deallocations() const { return deallocs_; }
  const std::vector<MeasurementRecord> &measurement_log() const { return log_; }
  void set_trace(std::ostream *out) { trace_ = out; }
  std::mt19937_64 &rng() { return rng_; }

 private:
  struct Register {
    int length = 0;
    bool live = false;
    bool opaque = false;
    std::string label;
    std::vector<uint64_t> words;
  };

  int alloc_register(int bits, const std::string &label);
  void free_register(int reg);
  void check_live(const QuintView &v) const;
  bool get_bit(int reg, int pos) const;
  void set_bit(int reg, int pos, bool b);
  void write(const QuintView &v, uint64_t value);
  bool draw_measurement();
  void count(OpKind kind, int register_width, int address_width);
  void trace(const std::string &op, const QuintView &v, uint64_t extra) const;
  static void check_disjoint(const QuintView &a, const QuintView &b);
  QuintView whole(int reg) const { return QuintView(reg, 0, regs_[static_cast<size_t>(reg)].length); }
  int require_whole(const QuintView &v) const;

  std::vector<Register> regs_;
  std::deque<Vent> vents_;
  std::vector<bool> vent_live_;
  std::vector<std::string> leaks_;
  std::vector<UncomputeInfo> stack_;
  std::deque<bool> forced_;
  std::vector<MeasurementRecord> log_;
  std::mt19937_64 rng_;
  Counters counters_{};
  Routine routine_ = Routine::kSetup;
  bool in_branch_ = false;
  int sign_ = 1;
  int live_qubits_ = 0;
  int high_water_ = 0;
  uint64_t allocs_ = 0, deallocs_ = 0;
  std::ostream *trace_ = nullptr;
};

/// Sets the routine for a scope and restores the previous one on exit.
class RoutineScope {
 public:
  RoutineScope(SimState &s, Routine r) : s_(s), prev_(s.routine()) {
    s_.set_routine(r);
  }
  ~RoutineScope() { s_.set_routine(prev_); }

 private:
  SimState &s_;
  Routine prev_;
};

/// Marks the body of a 50% branch so its operations are counted separately.
class BranchScope {
 public:
  BranchScope(SimState &s, bool taken) : s_(s) { s_.begin_branch(taken); }
  ~BranchScope() { s_.end_branch(); }

 private:
  SimState &s_;
};

}  // namespace qfe::qsim

#endif  // QFE_QSIM_HPP
