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

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfe/costs.hpp"
#include "qfe/kernels.hpp"
#include "qfe/modexp.hpp"
#include "qfe/periodfind.hpp"
#include "qfe/physical.hpp"
#include "qfe/residue.hpp"

#ifndef QFE_DATA_DIR
#define QFE_DATA_DIR "data"
#endif

using json = nlohmann::ordered_json;
using namespace qfe;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

IntRange parse_range(const std::string &s) {
  auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      int v = std::stoi(s);
      return {v, v};
    }
    IntRange r{std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    if (r.lo > r.hi) throw UsageError("empty range " + s);
    return r;
  } catch (const std::invalid_argument &) {
    throw UsageError("bad range " + s);
  }
}

int single(const std::string &s, const char *name) {
  IntRange r = parse_range(s);
  if (r.lo != r.hi) throw UsageError(std::string(name) + " takes one value");
  return r.lo;
}

struct Common {
  int n = 2048;
  std::string modulus_hex;
  // Defaults are the published n = 2048 choice.
  std::string s = "8", ell = "21", w1 = "6", w3 = "3", w4 = "5", f = "33";
  uint64_t seed = 1;
  uint64_t shots = 100;
  uint64_t mask_shots = 10000;
  uint64_t budget = 1ull << 26;
  std::string format = "json";
  std::string out;
  bool phase_bug = false;
  std::vector<uint64_t> moduli;
  std::vector<double> S{0.1, 0.01};
  bool bespoke = false;
  bool printed_loop4 = false;
};

void add_params(CLI::App *c, Common &o, bool ranges) {
  const char *what = ranges ? " (value or a:b)" : "";
  c->add_option("--n", o.n, "modulus bit length");
  c->add_option("--s", o.s, std::string("Ekera-Hastad s") + what);
  c->add_option("--ell", o.ell, std::string("prime bit length") + what);
  c->add_option("--w1", o.w1, std::string("loop1 window") + what);
  c->add_option("--w3", o.w3, std::string("loop3 window") + what);
  c->add_option("--w4", o.w4, std::string("loop4 window") + what);
  c->add_option("--f", o.f, std::string("truncated output bits") + what);
}

AlgorithmParams single_params(const Common &o, int n) {
  auto p = AlgorithmParams::standard(
      n, single(o.s, "--s"), single(o.ell, "--ell"), single(o.w1, "--w1"),
      single(o.w3, "--w3"), single(o.w4, "--w4"), single(o.f, "--f"));
  std::string why = p.validate();
  if (!why.empty()) throw UsageError("invalid parameters: " + why);
  return p;
}

class Output {
 public:
  explicit Output(const std::string &path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream &operator()() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json to_json(const CostEstimate &e) {
  const auto &p = e.params;
  return {{"n", p.n},         {"s", p.s},
          {"ell", p.ell},     {"w1", p.w1},
          {"w3", p.w3},       {"w4", p.w4},
          {"f", p.f},         {"m", p.m},
          {"prime_count", e.prime_count},
          {"epsilon", e.epsilon},
          {"P_deviant", e.p_deviant},
          {"expected_shots", e.expected_shots},
          {"toffolis_per_shot", e.toffolis_per_shot},
          {"toffolis", e.expected_toffolis},
          {"qubits", e.qubits},
          {"qubits_table", e.qubits_table},
          {"q3t", e.q3t},
          {"pareto", e.pareto}};
}

TallyOptions tally_options(const Common &o) {
  TallyOptions t;
  t.printed_loop4 = o.printed_loop4;
  return t;
}

int cmd_scan(const Common &o, CLI::App *c) {
  ScanRanges r;
  // Unset ranges keep the scan defaults.
  auto set = [&](const char *k, const std::string &v, IntRange &dst) {
    if (c->count(k)) dst = parse_range(v);
  };
  set("--s", o.s, r.s);
  set("--ell", o.ell, r.ell);
  set("--w1", o.w1, r.w1);
  set("--w3", o.w3, r.w3);
  set("--w4", o.w4, r.w4);
  set("--f", o.f, r.f);
  auto points = grid_scan(o.n, r, tally_options(o));
  if (points.empty()) {
    std::cerr << "no feasible parameters in range\n";
    return kUsage;
  }
  size_t best = q3t_optimum(points);
  Output out(o.out);
  if (o.format == "csv") {
    write_csv_header(out());
    for (const auto &e : points) write_csv_row(out(), e);
    const auto &b = points[best].params;
    out() << "# q3t optimum: s=" << b.s << " ell=" << b.ell << " w1=" << b.w1
          << " w3=" << b.w3 << " w4=" << b.w4 << " f=" << b.f << "\n";
  } else {
    json j;
    j["points"] = json::array();
    for (const auto &e : points) j["points"].push_back(to_json(e));
    j["q3t_optimum"] = to_json(points[best]);
    out() << j.dump(1) << "\n";
  }
  return kOk;
}

json physical_json(const PhysicalEstimate &e) {
  json shares = json::object();
  for (const auto &s : e.shares) shares[s.routine] = s.hours;
  return {
      {"ccz_cultivation_rounds", e.timing.cultivation_rounds},
      {"ccz_total_rounds", e.timing.total_rounds},
      {"ccz_rounds", e.timing.rounded_rounds},
      {"ccz_period_us", e.timing.ccz_period_us},
      {"largest_addition", e.durations.largest_addition},
      {"largest_lookup", e.durations.largest_lookup},
      {"addition_us", e.durations.addition_us},
      {"lookup_us", e.durations.lookup_us},
      {"phaseup_us", e.durations.phaseup_us},
      {"addition_ms", e.durations.addition_ms},
      {"lookup_ms", e.durations.lookup_ms},
      {"phaseup_ms", e.durations.phaseup_ms},
      {"cold_logical", e.cold_logical},
      {"hot_logical", e.hot_logical},
      {"hot_symbolic", e.hot_symbolic},
      {"compute_patches", e.compute_patches},
      {"physical_qubits", e.footprint.total},
      {"physical_qubits_symbolic_hot", e.footprint_symbolic.total},
      {"shot_hours", e.shot_hours},
      {"routine_hours", shares},
      {"success", e.success},
      {"expected_shots", e.expected_shots},
      {"expected_days", e.expected_days}};
}

int cmd_estimate(const Common &o) {
  AlgorithmParams p = single_params(o, o.n);
  std::string why;
  auto e = estimate(p, tally_options(o), &why);
  if (!e) {
    std::cerr << "infeasible: " << why << "\n";
    return kUsage;
  }
  PhysicalOptions po;
  po.tally = tally_options(o);
  PhysicalEstimate ph = physical_estimate(p, PhysicalAssumptions{}, po);
  Output out(o.out);
  if (o.format == "csv") {
    write_csv_header(out());
    write_csv_row(out(), *e);
    return kOk;
  }
  json j;
  j["logical"] = to_json(*e);
  j["physical"] = physical_json(ph);
  json rows = json::array();
  for (const auto &r : tally(p, tally_options(o)).rows) {
    rows.push_back({{"routine", qsim::routine_name(r.routine)},
                    {"iterations", r.iterations},
                    {"register_width", r.register_width},
                    {"address_width", r.address_width},
                    {"additions", r.expected(qsim::OpKind::kAddition)},
                    {"lookups", r.expected(qsim::OpKind::kLookup)},
                    {"phaseups", r.expected(qsim::OpKind::kPhaseup)}});
  }
  j["tally"] = rows;
  out() << j.dump(1) << "\n";
  return kOk;
}

Modulus pick_modulus(const Common &o) {
  if (!o.modulus_hex.empty()) return Modulus(big_from_hex(o.modulus_hex));
  if (o.n == 2048) return Modulus(rsa2048());
  return Modulus(random_semiprime(o.n, SeedSplitter(o.seed).stream("modulus")));
}

BigInt pick_base(const Modulus &N) {
  BigInt g = 3;
  while (gcd(g, N.value) != 1) ++g;
  return g;
}

int cmd_simulate(Common o, bool params_given) {
  Modulus N = pick_modulus(o);
  if (N.n > 64) throw UsageError("simulation needs a modulus of at most 64 bits");
  if (!params_given) {
    // Desk-scale defaults by size.
    if (N.n <= 28) {
      o.s = "4", o.ell = "12", o.w1 = "3", o.w3 = "3", o.w4 = "3", o.f = "16";
    } else if (N.n <= 40) {
      o.s = "4", o.ell = "14", o.w1 = "3", o.w3 = "3", o.w4 = "5", o.f = "18";
    } else {
      o.s = "3", o.ell = "16", o.w1 = "4", o.w3 = "3", o.w4 = "4", o.f = "18";
    }
  }
  AlgorithmParams p = single_params(o, N.n);
  ConfigOptions co;
  co.search.seed = SeedSplitter(o.seed).stream("primes");
  co.search.budget = o.budget;
  ExecutionConfig c = build_config(N, pick_base(N), p, co);
  TallyOptions to;
  to.prime_count = c.system.primes.size();
  SubroutineTally want = tally(p, to);
  ShotOptions so;
  if (o.phase_bug) so.fault = Fault::kSkipDeferredFlip;
  Output out(o.out);
  std::vector<ShotRecord> records(o.shots);
  SeedSplitter split(o.seed);
  parallel_for(o.shots, [&](size_t i) {
    records[i] = run_shot(c, split.stream("shot", i), so);
  });
  uint64_t pass = 0;
  const ShotRecord *first_bad = nullptr;
  std::vector<std::string> first_diff;
  for (const auto &r : records) {
    auto diff = compare_counters(r.counters, want);
    bool ok = r.matches() && diff.empty();
    pass += ok;
    if (!ok && !first_bad) first_bad = &r, first_diff = diff;
  }
  if (o.format == "csv") {
    out() << "seed,measurement,expected,clean,high_water,error\n";
    for (const auto &r : records) {
      out() << r.seed << ',' << r.measurement << ',' << r.expected << ','
            << r.clean << ',' << r.high_water << ",\"" << r.error << "\"\n";
    }
  } else {
    json j;
    j["modulus"] = N.value.get_str();
    j["primes"] = c.system.primes.size();
    j["shots"] = o.shots;
    j["pass"] = pass;
    json recs = json::array();
    for (const auto &r : records) {
      recs.push_back({{"seed", r.seed},
                      {"e", words_to_hex(r.e)},
                      {"mask", r.mask},
                      {"measurement", r.measurement},
                      {"expected", r.expected},
                      {"clean", r.clean},
                      {"high_water", r.high_water},
                      {"error", r.error}});
    }
    j["records"] = recs;
    out() << j.dump(1) << "\n";
  }
  if (first_bad) {
    std::cerr << "divergence in shot: ";
    write_shot(std::cerr, *first_bad);
    for (const auto &d : first_diff) std::cerr << "  " << d << "\n";
    std::cerr << pass << "/" << o.shots << " shots passed\n";
    return kCheckFailed;
  }
  std::cerr << pass << "/" << o.shots << " shots passed\n";
  return kOk;
}

const std::vector<uint64_t> kMaskInstances = {221,  323,  437,  667,  899,  1147,
                                              1517, 2021, 2491, 3127, 3599, 4087};

int cmd_mask(const Common &o) {
  auto moduli = o.moduli.empty() ? kMaskInstances : o.moduli;
  for (double S : o.S) {
    if (!(S >= 0 && S <= 1)) throw UsageError("S must lie in [0, 1]");
  }
  struct Job {
    uint64_t N;
    double S;
  };
  std::vector<Job> jobs;
  for (uint64_t N : moduli)
    for (double S : o.S) jobs.push_back({N, S});
  std::vector<periodfind::Suppression> res(jobs.size());
  std::vector<periodfind::PeakModel> models(moduli.size());
  parallel_for(moduli.size(), [&](size_t i) {
    models[i] = periodfind::peak_model(
        moduli[i], periodfind::max_order_generator(moduli[i]));
  });
  parallel_for(jobs.size(), [&](size_t i) {
    res[i] = periodfind::suppression_experiment(models[i / o.S.size()],
                                                jobs[i].S, o.mask_shots, o.seed);
  });
  bool ok = true;
  for (const auto &r : res) {
    // Floors claimed for these two proportions.
    if (r.S == 0.1 && r.suppression < 0.8) ok = false;
    if (r.S == 0.01 && r.suppression < 0.97) ok = false;
  }
  Output out(o.out);
  if (o.format == "csv") {
    out() << "N,g,S,shots,masked_success,unmasked_success,suppression,ci_low,"
             "ci_high";
    if (o.bespoke) out() << ",bespoke_low,bespoke_high";
    out() << "\n";
    for (const auto &r : res) {
      out() << r.N << ',' << r.g << ',' << r.S << ',' << r.shots << ','
            << r.masked << ',' << r.unmasked << ',' << r.suppression << ','
            << r.ci_low << ',' << r.ci_high;
      if (o.bespoke) out() << ',' << r.bespoke_low << ',' << r.bespoke_high;
      out() << "\n";
    }
  } else {
    json j = json::array();
    for (const auto &r : res) {
      json row = {{"N", r.N},
                  {"g", r.g},
                  {"S", r.S},
                  {"shots", r.shots},
                  {"masked_success", r.masked},
                  {"unmasked_success", r.unmasked},
                  {"suppression", r.suppression},
                  {"ci_low", r.ci_low},
                  {"ci_high", r.ci_high}};
      if (o.bespoke) {
        row["bespoke_low"] = r.bespoke_low;
        row["bespoke_high"] = r.bespoke_high;
      }
      j.push_back(row);
    }
    out() << j.dump(1) << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_kernels(const Common &o, const std::string &data_dir) {
  auto checks = kernels::run_kernel_suite(data_dir, o.seed);
  bool ok = true;
  Output out(o.out);
  if (o.format == "csv") {
    out() << "check,pass,detail\n";
    for (const auto &c : checks) {
      out() << c.name << ',' << c.pass << ",\"" << c.detail << "\"\n";
    }
  } else {
    json j = json::array();
    for (const auto &c : checks) {
      j.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    out() << j.dump(1) << "\n";
  }
  for (const auto &c : checks) ok = ok && c.pass;
  return ok ? kOk : kCheckFailed;
}

int cmd_primes(const Common &o) {
  Modulus N = pick_modulus(o);
  int s = single(o.s, "--s"), w1 = single(o.w1, "--w1");
  int ell = single(o.ell, "--ell"), f = single(o.f, "--f");
  uint64_t W1 = ceil_div(static_cast<uint64_t>(standard_m(N.n, s)),
                         static_cast<uint64_t>(w1));
  SearchOptions so;
  so.seed = SeedSplitter(o.seed).stream("primes");
  so.budget = o.budget;
  SearchStats stats;
  auto excluded = [&](uint64_t p) { return N.value % p == 0; };
  ResidueSystem sys;
  try {
    sys = find_prime_set(N, W1, ell, f, excluded, so, &stats);
  } catch (const ResidueError &e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kCheckFailed;
  }
  std::string check = check_system(sys, N);
  double log2dev = std::log2(sys.deviation.get_d());
  Output out(o.out);
  if (o.format == "csv") {
    out() << "bits,ell,f,W1,primes,log2_deviation,verified\n"
          << N.n << ',' << ell << ',' << f << ',' << W1 << ','
          << sys.primes.size() << ',' << log2dev << ',' << check.empty()
          << "\n";
  } else {
    json j = {{"modulus_bits", N.n},
              {"ell", ell},
              {"f", f},
              {"W1", W1},
              {"primes", sys.primes.size()},
              {"log2_deviation", log2dev},
              {"swaps_tried", stats.swaps_tried},
              {"swaps_accepted", stats.swaps_accepted},
              {"seconds", stats.seconds},
              {"verified", check.empty()},
              {"certificate", json::array()}};
    for (uint64_t p : sys.primes) j["certificate"].push_back(p);
    out() << j.dump(1) << "\n";
  }
  if (!check.empty()) {
    std::cerr << "certificate check failed: " << check << "\n";
    return kCheckFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Resource estimation and desk-scale simulation for RSA factoring"};
  app.require_subcommand(1);
  Common o;
  std::string data_dir = QFE_DATA_DIR;
  app.add_option("--seed", o.seed, "root seed");
  app.add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", o.out, "output path (default stdout)");

  auto *scan = app.add_subcommand("scan", "grid scan with Pareto flags");
  add_params(scan, o, true);
  scan->add_flag("--printed-loop4", o.printed_loop4,
                 "use the published loop4 operation mix");

  auto *est = app.add_subcommand("estimate", "logical and physical report");
  add_params(est, o, false);
  est->add_flag("--printed-loop4", o.printed_loop4,
                "use the published loop4 operation mix");

  auto *sim = app.add_subcommand("simulate", "fuzz shots against the oracle");
  add_params(sim, o, false);
  sim->add_option("--modulus-hex", o.modulus_hex, "modulus in hex");
  sim->add_option("--shots", o.shots, "number of seeded shots");
  sim->add_option("--budget", o.budget, "prime search swap budget");
  sim->add_flag("--inject-phase-bug", o.phase_bug,
                "drop one deferred phase correction");

  auto *mask = app.add_subcommand("mask", "masking suppression experiment");
  mask->add_option("--N", o.moduli, "small semiprimes (default built-in list)");
  mask->add_option("--S", o.S, "masking proportions");
  mask->add_option("--shots", o.mask_shots, "Monte Carlo shots per instance");
  mask->add_flag("--bespoke", o.bespoke, "also report 100x likelihood intervals");

  auto *ker = app.add_subcommand("kernels", "arithmetic kernel verification");
  ker->add_option("--data", data_dir, "directory holding gradient tables");

  auto *pr = app.add_subcommand("primes", "find and certify a prime set");
  add_params(pr, o, false);
  pr->add_option("--modulus-hex", o.modulus_hex, "modulus in hex");
  pr->add_option("--budget", o.budget, "swap budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  auto given = [](CLI::App *c) {
    for (const char *k : {"--s", "--ell", "--w1", "--w3", "--w4", "--f"}) {
      if (c->count(k)) return true;
    }
    return false;
  };
  try {
    if (*scan) return cmd_scan(o, scan);
    if (*est) return cmd_estimate(o);
    if (*sim) return cmd_simulate(o, given(sim));
    if (*mask) return cmd_mask(o);
    if (*ker) return cmd_kernels(o, data_dir);
    if (*pr) return cmd_primes(o);
  } catch (const UsageError &e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument &e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
