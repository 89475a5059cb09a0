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

#include "qfe/qsim.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <set>
#include <sstream>

namespace qfe::qsim {

namespace {

SimError usage(const std::string &what) {
  return SimError(SimError::Kind::kUsage, what);
}

uint64_t low_mask(int bits) {
  return bits >= 64 ? ~0ull : ((1ull << bits) - 1);
}

}  // namespace

const char *routine_name(Routine r) {
  switch (r) {
    case Routine::kSetup: return "setup";
    case Routine::kLoop1: return "loop1";
    case Routine::kLoop2: return "loop2";
    case Routine::kLoop3Startup: return "loop3_startup";
    case Routine::kLoop3Body: return "loop3_body";
    case Routine::kLoop4: return "loop4";
    case Routine::kUnloop3Body: return "unloop3_body";
    case Routine::kUnloop3Cleanup: return "unloop3_cleanup";
    case Routine::kUnloop2: return "unloop2";
    case Routine::kFinish: return "finish";
    case Routine::kCount: break;
  }
  return "?";
}

const char *op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::kAddition: return "additions";
    case OpKind::kLookup: return "lookups";
    case OpKind::kPhaseup: return "phaseups";
    case OpKind::kCount: break;
  }
  return "?";
}

int QuintView::size() const {
  int n = 0;
  for (const auto &s : segments_) n += s.length;
  return n;
}

QuintView QuintView::slice(int lo, int hi) const {
  QuintView out;
  lo = std::max(lo, 0);
  int pos = 0;
  for (const auto &s : segments_) {
    int a = std::max(lo, pos), b = std::min(hi, pos + s.length);
    if (a < b) out.segments_.push_back({s.reg, s.offset + (a - pos), b - a});
    pos += s.length;
  }
  return out;
}

QuintView QuintView::concat(const QuintView &high) const {
  QuintView out = *this;
  for (const auto &s : high.segments_) {
    auto &last = out.segments_;
    if (!last.empty() && last.back().reg == s.reg &&
        last.back().offset + last.back().length == s.offset) {
      last.back().length += s.length;
    } else {
      last.push_back(s);
    }
  }
  return out;
}

bool QuintView::whole_register(int reg_length) const {
  return segments_.size() == 1 && segments_[0].offset == 0 &&
         segments_[0].length == reg_length;
}

int QuintView::single_register() const {
  if (segments_.empty()) return -1;
  int r = segments_[0].reg;
  for (const auto &s : segments_) {
    if (s.reg != r) return -1;
  }
  return r;
}

Vent::Vent(int width) : width_(width) {
  if (width < 0 || width > 24) throw usage("vent width out of range");
  bits_.assign(((size_t{1} << width) + 63) / 64, 0);
}

bool Vent::get(uint64_t addr) const {
  return (bits_[addr >> 6] >> (addr & 63)) & 1;
}

void Vent::flip(uint64_t addr) {
  if (addr >> width_) throw usage("vent address out of range");
  bits_[addr >> 6] ^= 1ull << (addr & 63);
}

void Vent::flip_parity(const std::vector<uint64_t> &table, uint64_t result) {
  if (table.size() != (size_t{1} << width_)) throw usage("vent table size");
  if (result == 0) return;
  for (size_t a = 0; a < table.size(); ++a) {
    if (std::popcount(table[a] & result) & 1) {
      bits_[a >> 6] ^= 1ull << (a & 63);
    }
  }
}

void Vent::merge(const Vent &other) {
  if (other.width_ != width_) throw usage("vent width mismatch");
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other.bits_[i];
}

bool Vent::empty() const {
  for (uint64_t w : bits_) {
    if (w) return false;
  }
  return true;
}

size_t Vent::count() const {
  size_t c = 0;
  for (uint64_t w : bits_) c += static_cast<size_t>(std::popcount(w));
  return c;
}

void Vent::clear() { std::fill(bits_.begin(), bits_.end(), 0); }

SimState::SimState(uint64_t seed) : rng_(seed) {}

int SimState::alloc_register(int bits, const std::string &label) {
  if (bits < 1) throw usage("allocation needs at least one qubit");
  Register r;
  r.length = bits;
  r.live = true;
  r.label = label;
  r.words.assign(static_cast<size_t>((bits + 63) / 64), 0);
  regs_.push_back(std::move(r));
  live_qubits_ += bits;
  high_water_ = std::max(high_water_, live_qubits_);
  ++allocs_;
  return static_cast<int>(regs_.size()) - 1;
}

void SimState::free_register(int reg) {
  auto &r = regs_[static_cast<size_t>(reg)];
  r.live = false;
  live_qubits_ -= r.length;
  ++deallocs_;
}

QuintView SimState::alloc(int bits, const std::string &label) {
  int reg = alloc_register(bits, label);
  QuintView v = whole(reg);
  trace("alloc", v, 0);
  return v;
}

QuintView SimState::alloc_uniform(int bits, const std::string &label) {
  int reg = alloc_register(bits, label);
  auto &r = regs_[static_cast<size_t>(reg)];
  for (size_t i = 0; i < r.words.size(); ++i) {
    int chunk = std::min(64, bits - static_cast<int>(i) * 64);
    r.words[i] = rng_() & low_mask(chunk);
  }
  QuintView v = whole(reg);
  trace("alloc_uniform", v, 0);
  return v;
}

QuintView SimState::alloc_uniform_range(uint64_t bound, int width,
                                        const std::string &label) {
  if (bound < 1) throw usage("range bound must be positive");
  int need = std::max(1, 64 - std::countl_zero(bound - 1));
  if (bound == 1) need = 1;
  if (width < 0) width = need;
  if (width < need || width > 64) throw usage("range register too narrow");
  int reg = alloc_register(width, label);
  std::uniform_int_distribution<uint64_t> dist(0, bound - 1);
  regs_[static_cast<size_t>(reg)].words[0] = dist(rng_);
  QuintView v = whole(reg);
  trace("alloc_uniform_range", v, bound);
  return v;
}

QuintView SimState::alloc_phase_gradient(int bits) {
  int reg = alloc_register(bits, "phase_gradient");
  regs_[static_cast<size_t>(reg)].opaque = true;
  return whole(reg);
}

void SimState::release_phase_gradient(const QuintView &v) {
  int reg = require_whole(v);
  if (!regs_[static_cast<size_t>(reg)].opaque) throw usage("not a gradient");
  free_register(reg);
}

int SimState::register_length(int reg) const {
  return regs_.at(static_cast<size_t>(reg)).length;
}

bool SimState::is_live(int reg) const {
  return regs_.at(static_cast<size_t>(reg)).live;
}

int SimState::live_registers() const {
  int c = 0;
  for (const auto &r : regs_) c += r.live ? 1 : 0;
  return c;
}

void SimState::check_live(const QuintView &v) const {
  for (const auto &s : v.segments()) {
    if (s.reg < 0 || s.reg >= static_cast<int>(regs_.size())) {
      throw usage("view references unknown register");
    }
    const auto &r = regs_[static_cast<size_t>(s.reg)];
    if (!r.live) throw usage("view references freed register " + r.label);
    if (r.opaque) throw usage("phase gradient is not arithmetic-visible");
    if (s.offset < 0 || s.offset + s.length > r.length) {
      throw usage("view extends past register " + r.label);
    }
  }
}

void SimState::check_disjoint(const QuintView &a, const QuintView &b) {
  for (const auto &x : a.segments()) {
    for (const auto &y : b.segments()) {
      if (x.reg == y.reg && x.offset < y.offset + y.length &&
          y.offset < x.offset + x.length) {
        throw usage("overlapping views");
      }
    }
  }
}

int SimState::require_whole(const QuintView &v) const {
  int reg = v.single_register();
  if (reg < 0 || !v.whole_register(register_length(reg))) {
    throw usage("operation needs a whole-register view");
  }
  return reg;
}

bool SimState::get_bit(int reg, int pos) const {
  const auto &w = regs_[static_cast<size_t>(reg)].words;
  return (w[static_cast<size_t>(pos >> 6)] >> (pos & 63)) & 1;
}

void SimState::set_bit(int reg, int pos, bool b) {
  auto &w = regs_[static_cast<size_t>(reg)].words[static_cast<size_t>(pos >> 6)];
  uint64_t m = 1ull << (pos & 63);
  w = b ? (w | m) : (w & ~m);
}

uint64_t SimState::value(const QuintView &v) const {
  check_live(v);
  if (v.size() > 64) throw usage("view wider than 64 bits");
  uint64_t out = 0;
  int pos = 0;
  for (const auto &s : v.segments()) {
    for (int i = 0; i < s.length; ++i) {
      if (get_bit(s.reg, s.offset + i)) out |= 1ull << (pos + i);
    }
    pos += s.length;
  }
  return out;
}

std::vector<uint64_t> SimState::value_words(const QuintView &v) const {
  check_live(v);
  std::vector<uint64_t> out(static_cast<size_t>((v.size() + 63) / 64), 0);
  int pos = 0;
  for (const auto &s : v.segments()) {
    for (int i = 0; i < s.length; ++i, ++pos) {
      if (get_bit(s.reg, s.offset + i)) {
        out[static_cast<size_t>(pos >> 6)] |= 1ull << (pos & 63);
      }
    }
  }
  return out;
}

void SimState::write(const QuintView &v, uint64_t value) {
  int pos = 0;
  for (const auto &s : v.segments()) {
    for (int i = 0; i < s.length; ++i) {
      set_bit(s.reg, s.offset + i, (value >> (pos + i)) & 1);
    }
    pos += s.length;
  }
}

void SimState::force_value(const QuintView &v, uint64_t value) {
  check_live(v);
  if (v.size() > 64) throw usage("view wider than 64 bits");
  write(v, value & low_mask(v.size()));
}

void SimState::force_measurements(const std::vector<bool> &results) {
  forced_.insert(forced_.end(), results.begin(), results.end());
}

bool SimState::draw_measurement() {
  if (!forced_.empty()) {
    bool b = forced_.front();
    forced_.pop_front();
    return b;
  }
  return (rng_() >> 63) != 0;
}

void SimState::count(OpKind kind, int register_width, int address_width) {
  auto &c = counters_[static_cast<size_t>(routine_)];
  size_t k = static_cast<size_t>(kind);
  if (in_branch_) {
    ++c.conditional[k];
  } else {
    ++c.fixed[k];
  }
  c.max_address_width[k] = std::max(c.max_address_width[k], address_width);
  c.max_register_width[k] = std::max(c.max_register_width[k], register_width);
}

void SimState::trace(const std::string &op, const QuintView &v,
                     uint64_t extra) const {
  if (!trace_) return;
  const auto &c = counters_[static_cast<size_t>(routine_)];
  *trace_ << routine_name(routine_) << ' ' << op << " width=" << v.size()
          << " arg=" << extra << " A=" << c.fixed[0] + c.conditional[0]
          << " L=" << c.fixed[1] + c.conditional[1]
          << " P=" << c.fixed[2] + c.conditional[2] << " live=" << live_qubits_
          << '\n';
}

void SimState::begin_branch(bool taken) {
  if (in_branch_) throw usage("nested branch");
  auto &c = counters_[static_cast<size_t>(routine_)];
  ++c.branches_offered;
  if (taken) ++c.branches_taken;
  in_branch_ = true;
}

void SimState::end_branch() { in_branch_ = false; }

void SimState::add_const(const QuintView &target, uint64_t k) {
  check_live(target);
  uint64_t m = low_mask(target.size());
  write(target, (value(target) + k) & m);
  count(OpKind::kAddition, target.size(), 0);
  trace("add_const", target, k);
}

void SimState::sub_const(const QuintView &target, uint64_t k) {
  check_live(target);
  uint64_t m = low_mask(target.size());
  write(target, (value(target) - k) & m);
  count(OpKind::kAddition, target.size(), 0);
  trace("sub_const", target, k);
}

void SimState::add(const QuintView &target, const QuintView &source) {
  check_live(target);
  check_live(source);
  check_disjoint(target, source);
  uint64_t m = low_mask(target.size());
  write(target, (value(target) + value(source)) & m);
  count(OpKind::kAddition, target.size(), 0);
  trace("add", target, 0);
}

void SimState::sub(const QuintView &target, const QuintView &source) {
  check_live(target);
  check_live(source);
  check_disjoint(target, source);
  uint64_t m = low_mask(target.size());
  write(target, (value(target) - value(source)) & m);
  count(OpKind::kAddition, target.size(), 0);
  trace("sub", target, 0);
}

void SimState::add_ghz(const QuintView &target, const QuintView &ctrl,
                       uint64_t k) {
  check_live(target);
  check_live(ctrl);
  if (ctrl.size() != 1) throw usage("ghz lookup needs a single control qubit");
  check_disjoint(target, ctrl);
  bool c = value(ctrl) != 0;
  // Z-split copies of the control are merged back by X measurements; an odd
  // parity of results is fixed by a Z on the surviving copy.
  int copies = std::popcount(k);
  bool parity = false;
  for (int i = 0; i < copies; ++i) parity ^= (rng_() >> 63) != 0;
  bool kicked = c && parity;
  if (kicked) sign_ = -sign_;
  if (kicked) sign_ = -sign_;  // corrective Z on the surviving copy
  uint64_t m = low_mask(target.size());
  write(target, (value(target) + (c ? k : 0)) & m);
  count(OpKind::kAddition, target.size(), 0);
  trace("add_ghz", target, k);
}

void SimState::sub_ghz(const QuintView &target, const QuintView &ctrl,
                       uint64_t k) {
  add_ghz(target, ctrl, (0 - k) & low_mask(target.size()));
}

void SimState::phase_flip_if(bool predicate) {
  if (predicate) sign_ = -sign_;
}

void SimState::flip_if_geq(const QuintView &a, const QuintView &b) {
  check_live(a);
  check_live(b);
  if (value(a) >= value(b)) sign_ = -sign_;
  count(OpKind::kAddition, std::max(a.size(), b.size()), 0);
  trace("flip_if_geq", a, 0);
}

void SimState::lookup(const std::vector<uint64_t> &table,
                      const QuintView &addr, const QuintView &out) {
  check_live(addr);
  check_live(out);
  check_disjoint(addr, out);
  if (table.size() != (size_t{1} << addr.size())) {
    throw usage("table size does not match address width");
  }
  if (value(out) != 0) throw usage("lookup output is not zero");
  uint64_t v = table[value(addr)];
  if (v & ~low_mask(out.size())) throw usage("table entry wider than output");
  write(out, v);
  count(OpKind::kLookup, out.size(), addr.size());
  trace("lookup", addr, v);
}

void SimState::unlookup(const std::vector<uint64_t> &table,
                        const QuintView &out, Vent &vent) {
  uint64_t res = del_measure_x(out, "unlookup");
  vent.flip_parity(table, res);
}

void SimState::phaseup(Vent &vent, const QuintView &addr) {
  check_live(addr);
  if (addr.size() != vent.width()) throw usage("phaseup address width");
  if (vent.get(value(addr))) sign_ = -sign_;
  vent.clear();
  count(OpKind::kPhaseup, addr.size(), addr.size());
  trace("phaseup", addr, 0);
}

uint64_t SimState::mx_rz(const QuintView &v, const std::string &label) {
  check_live(v);
  uint64_t packed = 0;
  int pos = 0;
  for (const auto &s : v.segments()) {
    for (int i = 0; i < s.length; ++i, ++pos) {
      bool r = draw_measurement();
      if (r && get_bit(s.reg, s.offset + i)) sign_ = -sign_;
      set_bit(s.reg, s.offset + i, false);
      if (r && pos < 64) packed |= 1ull << pos;
    }
  }
  log_.push_back({label, v.size(), packed});
  trace("mx_rz", v, packed);
  return packed;
}

uint64_t SimState::del_measure_x(const QuintView &v, const std::string &label) {
  int reg = require_whole(v);
  uint64_t r = mx_rz(v, label);
  free_register(reg);
  return r;
}

uint64_t SimState::del_measure_z(const QuintView &v, const std::string &label) {
  int reg = require_whole(v);
  check_live(v);
  uint64_t r = v.size() <= 64 ? value(v) : value_words(v)[0];
  log_.push_back({label, v.size(), r});
  trace("measure_z", v, r);
  free_register(reg);
  return r;
}

void SimState::del_by_equal_to(const QuintView &v, uint64_t k) {
  int reg = require_whole(v);
  check_live(v);
  std::vector<uint64_t> w = value_words(v);
  bool ok = !w.empty() && w[0] == k;
  for (size_t i = 1; i < w.size(); ++i) ok = ok && w[i] == 0;
  if (!ok) {
    std::ostringstream msg;
    msg << "del_by_equal_to(" << k << ") on register '"
        << regs_[static_cast<size_t>(reg)].label << "' holding " << w[0];
    throw SimError(SimError::Kind::kValueMismatch, msg.str());
  }
  trace("del", v, k);
  free_register(reg);
}

void SimState::push_uncompute_info(UncomputeInfo info) {
  stack_.push_back(std::move(info));
}

UncomputeInfo SimState::pop_uncompute_info() {
  if (stack_.empty()) {
    throw SimError(SimError::Kind::kUnbalancedStack, "pop on empty stack");
  }
  UncomputeInfo out = std::move(stack_.back());
  stack_.pop_back();
  return out;
}

int SimState::new_vent(int width) {
  vents_.emplace_back(width);
  vent_live_.push_back(true);
  return static_cast<int>(vents_.size()) - 1;
}

void SimState::release_vent(int id) {
  auto i = static_cast<size_t>(id);
  if (!vent_live_.at(i)) throw usage("vent released twice");
  if (!vents_[i].empty()) {
    leaks_.push_back("vent " + std::to_string(id) + " released with " +
                     std::to_string(vents_[i].count()) + " pending flips");
  }
  vent_live_[i] = false;
}

void SimState::verify_clean_finish() const {
  std::ostringstream msg;
  bool dirty = false;
  for (size_t i = 0; i < regs_.size(); ++i) {
    if (regs_[i].live) {
      msg << "leaked register '" << regs_[i].label << "' (" << regs_[i].length
          << " qubits); ";
      dirty = true;
    }
  }
  for (size_t i = 0; i < vents_.size(); ++i) {
    if (vent_live_[i]) {
      msg << "unreleased vent " << i << "; ";
      dirty = true;
    }
  }
  for (const auto &l : leaks_) {
    msg << l << "; ";
    dirty = true;
  }
  if (!stack_.empty()) {
    msg << stack_.size() << " uncompute records left; ";
    dirty = true;
  }
  if (sign_ != 1) {
    msg << "sign=-1";
    dirty = true;
  }
  if (dirty) throw SimError(SimError::Kind::kDirtyFinish, msg.str());
}

}  // namespace qfe::qsim
