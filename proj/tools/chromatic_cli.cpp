/*
 * Copyright 2026 The Chromatic Tree Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// chromatic: command-line driver for campaigns, simulation and verification.
//
// Exit codes: 0 success, 1 checker or bound violation, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chromatic/bench/campaign.hpp"
#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/metrics/report.hpp"
#include "chromatic/sim/explore.hpp"
#include "chromatic/sim/scheduler.hpp"
#include "chromatic/sim/tree_harness.hpp"
#include "chromatic/tree/dump.hpp"
#include "chromatic/verify/bounds.hpp"
#include "chromatic/verify/structure.hpp"

namespace {

using namespace chromatic;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("CHROMATIC_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("CHROMATIC_SEED is not a number");
    }
  }
  return 1;
}

std::vector<Key> parse_keys(const std::string& text) {
  std::vector<Key> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stoull(cell));
    } catch (const std::exception&) {
      throw UsageError("bad key '" + cell + "'");
    }
    if (out.back() == kInf) throw UsageError("key " + cell + " is reserved");
  }
  return out;
}

std::uint32_t parse_checks(const std::string& text) {
  if (text == "all") return sim::kCheckAll;
  if (text == "none") return 0;
  std::uint32_t mask = 0;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "census") {
      mask |= sim::kCheckCensus;
    } else if (name == "cleanup-stack") {
      mask |= sim::kCheckCleanupStack;
    } else if (name == "search-path") {
      mask |= sim::kCheckSearchPath;
    } else if (name == "engine") {
      mask |= sim::kCheckEngine;
    } else if (name == "structure") {
      mask |= sim::kCheckStructure;
    } else if (name == "history") {
      mask |= sim::kCheckHistory;
    } else if (name == "steps") {
      mask |= sim::kCheckSteps;
    } else {
      throw UsageError("unknown check '" + name + "'");
    }
  }
  return mask;
}

bench::Distribution parse_distribution(const std::string& text) {
  if (text == "uniform") return bench::Distribution::kUniform;
  if (text == "zipf") return bench::Distribution::kZipf;
  if (text == "adversarial-same-key") return bench::Distribution::kAdversarialSameKey;
  throw UsageError("unknown distribution '" + text + "'");
}

// ---- run ----

struct RunArgs {
  std::string mode = "threads";
  std::uint32_t threads = 1;
  std::uint64_t n = 1 << 16;
  std::vector<std::uint64_t> sizes;
  std::uint64_t ops = 100000;
  std::string mix = "40/40/20";
  std::string dist = "uniform";
  double zipf_s = 1.0;
  std::string schedule = "random";
  std::string out;
  std::string csv;
  std::string dump;
  bool legacy = false;
  double k = metrics::kFrozenStepK;
};

int cmd_run(const RunArgs& a, std::uint64_t seed) {
  bench::Mode mode;
  if (a.mode == "threads") {
    mode = bench::Mode::kThreads;
  } else if (a.mode == "deterministic") {
    mode = bench::Mode::kDeterministic;
  } else {
    throw UsageError("--mode must be threads or deterministic");
  }
  if (a.threads == 0) throw UsageError("--threads must be positive");
  bench::WorkloadSpec base;
  bench::parse_mix(a.mix, base);
  base.ops_per_process = a.ops;
  base.distribution = parse_distribution(a.dist);
  base.zipf_s = a.zipf_s;
  base.seed = seed;

  std::vector<std::uint64_t> sizes = a.sizes;
  if (sizes.empty()) {
    for (std::uint64_t n : {a.n / 16, a.n / 4, a.n}) {
      if (n >= 2) sizes.push_back(n);
    }
  }
  std::vector<std::uint32_t> threads;
  for (std::uint32_t t = 1; t < a.threads; t *= 2) threads.push_back(t);
  threads.push_back(a.threads);

  bool ok = true;
  json cells = json::array();
  std::vector<metrics::RunPoint> points;
  std::vector<metrics::OpMetrics> all_rows;
  std::string last_dump;
  for (std::uint64_t n : sizes) {
    for (std::uint32_t t : threads) {
      bench::CampaignConfig cfg;
      cfg.workload = base;
      cfg.workload.key_lo = 1;
      cfg.workload.key_hi = 2 * n;
      cfg.workload.prefill = n;
      cfg.workload.processes = t;
      cfg.mode = mode;
      cfg.schedule = a.schedule == "round-robin" ? bench::Schedule::kRoundRobin : bench::Schedule::kRandom;
      cfg.legacy_restart = a.legacy;
      cfg.keep_rows = true;
      cfg.keep_dump = !a.dump.empty();
      bench::CampaignResult r = bench::run_campaign(cfg);

      verify::BoundInput bin{r.i, r.d, r.rebal_total, {}};
      verify::BoundReport br = verify::check_bounds(bin, false);
      metrics::StepBound sb{a.k};
      std::int64_t step_violation = sb.first_violation(r.rows);
      const bool cell_ok = r.structure.ok() && r.census_after == 0 && r.size_consistent && br.rebal_ok &&
                           step_violation < 0;
      ok = ok && cell_ok;

      json c = {{"n", n},
                {"threads", t},
                {"ops", r.summary.ops},
                {"mean_steps", r.summary.mean_steps},
                {"mean_update_steps", r.summary.mean_update_steps},
                {"c_dot_alpha", r.summary.c_dot_alpha},
                {"i", r.i},
                {"d", r.d},
                {"rebal_total", r.rebal_total},
                {"rebal_bound", br.bound},
                {"rebal_ok", br.rebal_ok},
                {"height", r.height},
                {"height_bound", verify::height_bound(r.size)},
                {"size", r.size},
                {"structure_ok", r.structure.ok()},
                {"census_after", r.census_after},
                {"size_consistent", r.size_consistent},
                {"step_bound_k", a.k},
                {"step_bound_ok", step_violation < 0},
                {"ok", cell_ok}};
      if (mode == bench::Mode::kThreads) c["seconds"] = r.seconds;
      if (!r.structure.problems.empty()) c["problems"] = r.structure.problems;
      cells.push_back(c);

      metrics::RunPoint pt;
      pt.n = n;
      pt.threads = t;
      pt.summary = r.summary;
      pt.height_samples.push_back(r.height);
      points.push_back(pt);
      if (!a.csv.empty()) all_rows.insert(all_rows.end(), r.rows.begin(), r.rows.end());
      std::cerr << "n=" << n << " threads=" << t << " mean_steps=" << r.summary.mean_steps
                << (cell_ok ? " ok" : " VIOLATION") << '\n';
      if (!a.dump.empty()) last_dump = std::move(r.final_dump);
    }
  }

  json doc;
  doc["workload"] = {{"mode", a.mode},
                     {"schedule", a.schedule},
                     {"mix", a.mix},
                     {"distribution", a.dist},
                     {"ops_per_process", a.ops},
                     {"seed", seed},
                     {"legacy_restart", a.legacy}};
  doc["cells"] = cells;
  try {
    doc["report"] = json::parse(metrics::to_json(metrics::amortized_report(points)));
  } catch (const metrics::InsufficientGrid& e) {
    doc["report"] = nullptr;
    doc["report_error"] = e.what();
  }
  doc["ok"] = ok;
  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    spit(a.out, text);
  }
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) throw UsageError("cannot write " + a.csv);
    metrics::write_csv(csv, all_rows);
  }
  if (!a.dump.empty()) spit(a.dump, last_dump);
  return ok ? kOk : kViolation;
}

// ---- simulate / enumerate ----

struct SimArgs {
  std::uint32_t procs = 2;
  std::string workload;
  std::uint64_t ops = 3;
  std::uint64_t keys = 8;
  std::string initial;
  std::string init_dump;
  std::string script;
  std::string schedule = "random";
  std::string check = "all";
  std::string trace_out;
  std::string dump_out;
  bool legacy = false;
  std::uint64_t max_steps = 1'000'000;
  // enumerate only
  std::uint32_t preemptions = 2;
  std::uint64_t depth = 600;
  std::uint64_t max_traces = 2'000'000;
};

sim::TreeScenario make_scenario(const SimArgs& a, std::uint64_t seed) {
  sim::TreeScenario sc;
  if (!a.workload.empty()) {
    try {
      sc.workload = sim::parse_workload(a.workload);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    bench::WorkloadSpec w;
    w.key_lo = 1;
    w.key_hi = a.keys;
    w.ops_per_process = a.ops;
    w.processes = a.procs;
    w.seed = seed;
    for (std::uint32_t p = 0; p < a.procs; ++p) sc.workload.push_back(bench::generate_ops(w, p));
  }
  if (!a.init_dump.empty()) sc.initial_dump = slurp(a.init_dump);
  sc.initial_keys = parse_keys(a.initial);
  sc.legacy_restart = a.legacy;
  sc.checks = parse_checks(a.check);
  sc.max_steps = a.max_steps;
  return sc;
}

void emit_trace(const std::string& path, const sim::Trace& trace) {
  if (path.empty()) {
    std::cout << sim::format_trace(trace);
  } else {
    spit(path, sim::format_trace(trace));
  }
}

int cmd_simulate(const SimArgs& a, std::uint64_t seed) {
  sim::TreeScenario sc = make_scenario(a, seed);
  std::unique_ptr<sim::Chooser> chooser;
  if (!a.script.empty()) {
    chooser = std::make_unique<sim::ScriptChooser>(sim::script_of(sim::parse_trace(slurp(a.script))));
  } else if (a.schedule == "round-robin") {
    chooser = std::make_unique<sim::RoundRobinChooser>();
  } else if (a.schedule == "random") {
    chooser = std::make_unique<sim::RandomChooser>(seed);
  } else {
    throw UsageError("--schedule must be random or round-robin");
  }
  std::cerr << "workload " << sim::format_workload(sc.workload) << '\n';
  try {
    sim::TreeRunResult r = sim::run_tree(sc, *chooser);
    emit_trace(a.trace_out, r.trace);
    if (!a.dump_out.empty()) spit(a.dump_out, r.final_dump);
    std::cerr << "steps=" << r.steps << " i=" << r.i << " d=" << r.d << " rebal=" << r.rebal_total
              << " max_violations=" << r.max_violations << '\n'
              << "structure=" << (r.structure.ok() ? "pass" : "fail") << '\n'
              << "linearizable=" << (r.history_checked ? (r.linearizable ? "pass" : "fail") : "skipped") << '\n';
    bool ok = r.structure.ok() && (!r.history_checked || r.linearizable);
    if (sc.checks == 0) ok = true;
    return ok ? kOk : kViolation;
  } catch (const sim::CheckerViolation& e) {
    emit_trace(a.trace_out, e.prefix());
    std::cerr << "checker violation: " << e.what() << '\n';
    return kViolation;
  }
}

int cmd_enumerate(const SimArgs& a, std::uint64_t seed) {
  sim::TreeScenario sc = make_scenario(a, seed);
  sim::ExploreOptions opt;
  opt.preemption_bound = a.preemptions;
  opt.depth_bound = a.depth;
  opt.max_traces = a.max_traces;
  opt.symmetric = true;
  for (const auto& w : sc.workload) opt.symmetric = opt.symmetric && w == sc.workload.front();
  opt.symmetric = opt.symmetric && sc.workload.size() > 1;
  std::cerr << "workload " << sim::format_workload(sc.workload) << '\n';
  try {
    sim::TreeExploreResult r = sim::explore_tree(sc, opt);
    std::cout << "traces=" << r.summary.traces << "\nlongest=" << r.summary.longest
              << "\nhistories_checked=" << r.histories << "\nmax_violations=" << r.max_violations
              << "\npreemption_bound=" << opt.preemption_bound << "\nsymmetric=" << (opt.symmetric ? 1 : 0)
              << "\nverdict=pass\n";
    return kOk;
  } catch (const sim::CheckerViolation& e) {
    emit_trace(a.trace_out, e.prefix());
    std::cerr << "checker violation: " << e.what() << '\n';
    std::cout << "verdict=fail\n";
    return kViolation;
  } catch (const sim::StateSpaceExceeded& e) {
    std::cerr << "state space exceeded: " << e.what() << '\n';
    return kUsage;
  }
}

// ---- verify / report ----

int cmd_verify(const std::string& dump_path) {
  const std::string text = slurp(dump_path);
  verify::StructReport r;
  try {
    r = verify::check_structure(text);
  } catch (const DumpParseError& e) {
    std::cerr << "malformed dump: " << e.what() << '\n';
    return kUsage;
  }
  std::cout << "leaf_oriented=" << r.leaf_oriented << "\nbst_order=" << r.bst_order << "\nsentinels=" << r.sentinels
            << "\nc1=" << r.c1 << "\nc2=" << r.c2 << "\nheight_ok=" << r.height_ok << "\nunmarked=" << r.unmarked
            << "\nn=" << r.n << "\nheight=" << r.height << "\nviolations=" << r.violations
            << "\nweighted_level=" << r.weighted_level << "\nverdict=" << (r.ok() ? "pass" : "fail") << '\n';
  for (const auto& p : r.problems) std::cerr << "problem: " << p << '\n';
  return r.ok() ? kOk : kViolation;
}

int cmd_report(const std::string& csv_path, const std::string& out, double k) {
  std::ifstream in(csv_path);
  if (!in) throw UsageError("cannot read " + csv_path);
  std::vector<metrics::OpMetrics> rows;
  try {
    rows = metrics::read_csv(in);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  metrics::Summary s = metrics::summarize(rows);
  metrics::StepBound sb{k};
  std::int64_t bad = sb.first_violation(rows);
  std::uint64_t pop_violations = 0;
  for (const auto& m : rows) {
    if (m.pops_up > m.pushes_up || m.pops_cp > m.pushes_cp) ++pop_violations;
  }
  json doc = {{"ops", s.ops},
              {"updates", s.updates},
              {"mean_steps", s.mean_steps},
              {"mean_update_steps", s.mean_update_steps},
              {"mean_attempts_up", s.mean_attempts_up},
              {"mean_attempts_cp", s.mean_attempts_cp},
              {"mean_pushes_up", s.mean_pushes_up},
              {"mean_pushes_cp", s.mean_pushes_cp},
              {"c_dot_alpha", s.c_dot_alpha},
              {"max_n", s.max_n},
              {"rebal_success", s.rebal_success},
              {"step_bound_k", k},
              {"step_bound_first_violation", bad},
              {"pops_exceed_pushes", pop_violations}};
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    spit(out, text);
  }
  return bad < 0 && pop_violations == 0 ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lock-free chromatic tree: campaigns, simulation and verification"};
  app.require_subcommand(1);

  std::uint64_t seed_flag = 1;

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a workload campaign and emit an amortized-cost report");
  auto* run_seed = run_cmd->add_option("--seed", seed_flag, "Seed (falls back to CHROMATIC_SEED)");
  run_cmd->add_option("--mode", run.mode, "threads or deterministic")->capture_default_str();
  run_cmd->add_option("--threads", run.threads, "Largest worker count; the grid doubles up to it")->capture_default_str();
  run_cmd->add_option("--n", run.n, "Largest initial size; the grid also runs n/4 and n/16")->capture_default_str();
  run_cmd->add_option("--sizes", run.sizes, "Explicit initial sizes, overriding the n grid")->delimiter(',');
  run_cmd->add_option("--ops", run.ops, "Operations per worker")->capture_default_str();
  run_cmd->add_option("--mix", run.mix, "insert/delete/find percentages")->capture_default_str();
  run_cmd->add_option("--dist", run.dist, "uniform, zipf or adversarial-same-key")->capture_default_str();
  run_cmd->add_option("--zipf-s", run.zipf_s, "Zipf exponent")->capture_default_str();
  run_cmd->add_option("--schedule", run.schedule, "Deterministic interleaving: random or round-robin")
      ->capture_default_str();
  run_cmd->add_option("--out", run.out, "report.json path (stdout when absent)");
  run_cmd->add_option("--csv", run.csv, "metrics.csv path");
  run_cmd->add_option("--dump", run.dump, "tree.txt path: final dump of the last cell");
  run_cmd->add_option("--step-k", run.k, "Per-op step bound constant")->capture_default_str();
  run_cmd->add_flag("--legacy-restart", run.legacy, "Restart failed attempts from entry (comparison only)");

  SimArgs simargs;
  auto add_sim_flags = [&](CLI::App* cmd) {
    cmd->add_option("--procs", simargs.procs, "Processes when the workload is generated")->capture_default_str();
    cmd->add_option("--workload", simargs.workload, "Explicit workload, e.g. i1,d2;f1");
    cmd->add_option("--ops", simargs.ops, "Generated operations per process")->capture_default_str();
    cmd->add_option("--keys", simargs.keys, "Generated keys are drawn from 1..keys")->capture_default_str();
    cmd->add_option("--initial", simargs.initial, "Keys inserted before the run, comma separated");
    cmd->add_option("--init-dump", simargs.init_dump, "Initial tree dump file");
    cmd->add_option("--check", simargs.check, "all, none, or a list of census,cleanup-stack,search-path,engine,"
                                              "structure,history,steps")
        ->capture_default_str();
    cmd->add_option("--trace-out", simargs.trace_out, "Trace file (stdout when absent)");
    cmd->add_flag("--legacy-restart", simargs.legacy, "Restart failed attempts from entry (comparison only)");
  };
  auto* sim_cmd = app.add_subcommand("simulate", "Run one deterministic schedule with configuration checkers");
  auto* sim_seed = sim_cmd->add_option("--seed", seed_flag, "Seed (falls back to CHROMATIC_SEED)");
  add_sim_flags(sim_cmd);
  sim_cmd->add_option("--script", simargs.script, "Scripted schedule in trace format");
  sim_cmd->add_option("--schedule", simargs.schedule, "random or round-robin")->capture_default_str();
  sim_cmd->add_option("--dump-out", simargs.dump_out, "Final tree dump file");
  sim_cmd->add_option("--max-steps", simargs.max_steps, "Step limit")->capture_default_str();

  auto* enum_cmd = app.add_subcommand("enumerate", "Enumerate schedules up to a preemption bound");
  auto* enum_seed = enum_cmd->add_option("--seed", seed_flag, "Seed for a generated workload");
  add_sim_flags(enum_cmd);
  enum_cmd->add_option("--preemptions", simargs.preemptions, "Preemption bound")->capture_default_str();
  enum_cmd->add_option("--depth", simargs.depth, "Longest trace allowed")->capture_default_str();
  enum_cmd->add_option("--max-traces", simargs.max_traces, "Trace budget")->capture_default_str();

  std::string dump_path;
  auto* verify_cmd = app.add_subcommand("verify", "Check a quiescent tree dump");
  verify_cmd->add_option("--dump", dump_path, "Dump file")->required();

  std::string csv_path, report_out;
  double report_k = metrics::kFrozenStepK;
  auto* report_cmd = app.add_subcommand("report", "Summarize a metrics CSV and check per-op bounds");
  report_cmd->add_option("--csv", csv_path, "metrics.csv from run")->required();
  report_cmd->add_option("--out", report_out, "Summary JSON path (stdout when absent)");
  report_cmd->add_option("--step-k", report_k, "Per-op step bound constant")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, resolve_seed(run_seed, seed_flag));
    if (sim_cmd->parsed()) return cmd_simulate(simargs, resolve_seed(sim_seed, seed_flag));
    if (enum_cmd->parsed()) return cmd_enumerate(simargs, resolve_seed(enum_seed, seed_flag));
    if (verify_cmd->parsed()) return cmd_verify(dump_path);
    if (report_cmd->parsed()) return cmd_report(csv_path, report_out, report_k);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const bench::WorkloadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DumpParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sim::CheckerViolation& e) {
    std::cerr << "checker violation: " << e.what() << '\n';
    return kViolation;
  } catch (const verify::StructuralViolation& e) {
    std::cerr << "structural violation: " << e.what() << '\n';
    return kViolation;
  }
  return kUsage;
}
