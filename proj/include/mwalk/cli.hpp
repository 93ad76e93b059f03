#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mwalk/format.hpp"
#include "mwalk/fpt.hpp"
#include "mwalk/objfun.hpp"
#include "mwalk/oracle.hpp"
#include "mwalk/solvers.hpp"
#include "mwalk/trace.hpp"

namespace mwalk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitCensored = 2;

struct CliOptions {
  std::string of;
  std::string solver = "MWR";
  std::size_t marks = 32;
  std::optional<std::size_t> radius;
  double dither = 0.01;
  double rde = 1.0;
  double cr = 0.9;
  std::uint64_t steps_limit = 1000;
  std::size_t plateau_limit = 0;
  std::size_t sample_size = 100;
  std::uint64_t seed = 1;
  std::optional<int> digits;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
  std::string trace_out;
  std::string targets = "targets.csv";
  std::string origin = "min";
  std::string move = "single";
  std::string in;
  std::size_t grid_points = 0;
  std::size_t refine_rounds = 60;
};

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path + "'");
  return out;
}

/// Objective from the registry with its stored target, at --digits if given.
inline ObjectiveSpec targeted_objective(const CliOptions& o) {
  if (o.of.empty()) throw config_error("--of is required");
  auto spec = make_objective(o.of);
  const auto store = TargetStore::load(o.targets);
  const auto* rec = store.find(spec.name);
  if (!rec)
    throw config_error("no target for '" + spec.name + "' in " + o.targets +
                       "; run `oracle --of " + spec.name + "` first");
  return apply_target(spec, *rec, o.digits);
}

inline SolverConfig solver_config(const CliOptions& o, const std::string& name) {
  SolverConfig base;
  base.objective = o.of;
  base.marks = o.marks;
  base.dither = o.dither;
  base.rde = o.rde;
  base.cr = o.cr;
  base.steps_limit = o.steps_limit;
  base.plateau_limit = o.plateau_limit;
  base.seed = o.seed;
  if (o.origin == "min")
    base.origin = Origin::ruler_min;
  else if (o.origin == "lower")
    base.origin = Origin::lower_bound;
  else
    throw config_error("--origin must be 'min' or 'lower'");
  if (o.move == "single")
    base.move = RulerMove::single;
  else if (o.move == "all")
    base.move = RulerMove::all;
  else
    throw config_error("--move must be 'single' or 'all'");

  auto cfg = parse_solver(name, base);
  if (o.radius) {
    if (!cfg.is_multiwalk()) throw config_error("--radius applies only to MW/MWR solvers");
    if (cfg.radius != 0 && cfg.radius != *o.radius)
      throw config_error("--radius " + std::to_string(*o.radius) + " conflicts with solver '" +
                         name + "'");
    cfg.radius = *o.radius;
  }
  return cfg;
}

inline void write_record(std::ostream& out, const SolverConfig& cfg, const ObjectiveSpec& spec,
                         const RunRecord& r) {
  for (const auto& [key, value] : describe(cfg, spec)) out << "# " << key << " = " << value << '\n';
  out << "coordBest = " << join_doubles(r.coord_best, ' ') << '\n';
  out << "valueBest = " << format_double(r.value_best) << '\n';
  out << "valueBestFinalEpoch = " << format_double(r.value_best_final_epoch) << '\n';
  out << "agentId = " << r.agent_id << '\n';
  out << "steps = " << r.steps << '\n';
  out << "probes = " << r.probes << '\n';
  out << "restarts = " << r.restarts << '\n';
  out << "isCensored = " << (r.censored ? "TRUE" : "FALSE") << '\n';
}

inline int cmd_list(const CliOptions& o, std::ostream& out) {
  const auto store = TargetStore::load(o.targets);
  out << "name,p,lower,upper,digitsTarget,valueTarget,status\n";
  for (const auto& name : objective_names()) {
    const auto spec = make_objective(name);
    const auto* rec = store.find(name);
    out << name << ',' << spec.dim << ',' << format_double(spec.lower[0]) << ','
        << format_double(spec.upper[0]) << ',' << (rec ? rec->digits : spec.digits_target) << ','
        << (rec ? format_double(rec->value_target) : "") << ','
        << (rec ? rec->method : std::string("unset")) << '\n';
  }
  return kExitOk;
}

inline int cmd_oracle(const CliOptions& o, std::ostream& out) {
  auto store = TargetStore::load(o.targets);
  const int digits = o.digits.value_or(9);
  std::vector<std::string> names;
  if (o.of.empty() || o.of == "all")
    names = objective_names();
  else
    names.push_back(o.of);
  for (const auto& name : names) {
    const auto spec = make_objective(name);
    TargetRecord rec;
    if (spec.landscape == Landscape::integer_staircase) {
      rec = enumerate_integer(spec, digits);
    } else {
      GridOptions grid;
      grid.points = o.grid_points;
      grid.rounds = o.refine_rounds;
      rec = grid_refine(spec, digits, grid);
    }
    out << format_target(rec) << '\n';
    store.upsert(std::move(rec));
  }
  store.save(o.targets);
  return kExitOk;
}

inline int cmd_solve(const CliOptions& o, std::ostream& out) {
  const auto spec = targeted_objective(o);
  auto cfg = solver_config(o, o.solver);
  cfg.workers = o.workers;
  WalkTrace trace;
  RunOptions opts;
  if (!o.trace_out.empty()) opts.trace = &trace;
  const auto rec = run_solver(cfg, spec, opts);
  write_record(out, cfg, spec, rec);
  if (!o.out.empty()) {
    auto file = open_output(o.out);
    write_record(file, cfg, spec, rec);
  }
  if (!o.trace_out.empty()) {
    auto file = open_output(o.trace_out);
    write_trace(file, trace);
  }
  return kExitOk;
}

inline int cmd_bench(const CliOptions& o, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  plan.spec = targeted_objective(o);
  plan.sample_size = o.sample_size;
  plan.workers = o.workers;
  for (const auto& name : split(o.solver, ',')) plan.solvers.push_back(solver_config(o, name));
  validate(plan);

  const auto results = run_experiment(plan);
  const auto summaries = summarize(plan, results);
  const std::string prefix = o.out.empty() ? "bench" : o.out;
  {
    auto file = open_output(prefix + "_runs.csv");
    write_runs_csv(file, plan, results);
  }
  {
    auto file = open_output(prefix + "_summary.csv");
    write_summary_csv(file, plan, summaries);
  }
  {
    auto file = open_output(prefix + "_bargraph.csv");
    write_bargraph(file, plan, summaries);
  }
  write_summary_csv(out, plan, summaries);
  for (std::size_t s = 1; s < summaries.size(); ++s)
    out << "# " << format_comparison(compare(summaries[s], summaries[0])) << '\n';

  int status = kExitOk;
  for (const auto& s : summaries)
    if (s.censored == s.n) {
      err << "warning: every run of " << s.solver << " is censored\n";
      status = kExitCensored;
    }
  return status;
}

inline int cmd_trace(const CliOptions& o, std::ostream& out) {
  if (o.in.empty()) throw config_error("--in is required");
  std::ifstream in(o.in);
  if (!in) throw config_error("cannot read '" + o.in + "'");
  const auto trace = read_trace(in);
  if (o.out.empty()) {
    write_trace_wide(out, trace);
  } else {
    auto file = open_output(o.out);
    write_trace_wide(file, trace);
  }
  return kExitOk;
}

}  // namespace detail

/// Entry point of the `mwalk` tool. Returns 0 on success, 1 on a configuration
/// error and 2 when a benchmark has a solver whose runs were all censored.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CliOptions o;
  CLI::App app{"Multi-walk optimizer and first-passage benchmarks", "mwalk"};
  app.require_subcommand(1);

  auto add_targets = [&](CLI::App* sub) {
    sub->add_option("--targets", o.targets, "Target store file")->capture_default_str();
  };
  auto add_solver = [&](CLI::App* sub, const char* solver_help) {
    sub->add_option("--of", o.of, "Objective name")->required();
    sub->add_option("--solver", o.solver, solver_help)->capture_default_str();
    sub->add_option("--marks", o.marks, "Ruler marks / population size")->capture_default_str();
    sub->add_option("--radius", o.radius, "Neighborhood radius (MW/MWR)");
    sub->add_option("--dither", o.dither, "Dither on neighborhood differences")->capture_default_str();
    sub->add_option("--rde", o.rde, "DE mutation scale")->capture_default_str();
    sub->add_option("--cr", o.cr, "DE crossover rate")->capture_default_str();
    sub->add_option("--steps-limit", o.steps_limit, "Censoring limit on steps")->capture_default_str();
    sub->add_option("--plateau-limit", o.plateau_limit, "Restart after this many flat steps (0: marks)")
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Seed (base seed for bench)")->capture_default_str();
    sub->add_option("--digits", o.digits, "Significant digits of the target");
    sub->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
    sub->add_option("--origin", o.origin, "Candidate origin: min or lower")->capture_default_str();
    sub->add_option("--move", o.move, "Rulers moved per candidate: single or all")
        ->capture_default_str();
    add_targets(sub);
  };

  auto* list = app.add_subcommand("list", "List registered objectives and their targets");
  add_targets(list);

  auto* oracle = app.add_subcommand("oracle", "Compute targets into the target store");
  oracle->add_option("--of", o.of, "Objective name or 'all'");
  oracle->add_option("--digits", o.digits, "Significant digits (default 9)");
  oracle->add_option("--grid-points", o.grid_points, "Coarse grid points per dimension (0: default)");
  oracle->add_option("--refine-rounds", o.refine_rounds, "Refinement rounds")->capture_default_str();
  add_targets(oracle);

  auto* solve = app.add_subcommand("solve", "Run one solver once");
  add_solver(solve, "Solver name, e.g. MWR30, DEsFR1, DEoF2");
  solve->add_option("--out", o.out, "Also write the run record here");
  solve->add_option("--trace-out", o.trace_out, "Write the walk trace here");

  auto* bench = app.add_subcommand("bench", "Run an N-seed first-passage experiment");
  add_solver(bench, "Comma-separated solver names");
  bench->add_option("--sample-size", o.sample_size, "Runs per solver")->capture_default_str();
  bench->add_option("--out", o.out, "Output prefix for _runs/_summary/_bargraph CSVs");

  auto* trace = app.add_subcommand("trace", "Re-emit a stored walk trace in wide form");
  trace->add_option("--in", o.in, "Trace file written by solve --trace-out")->required();
  trace->add_option("--out", o.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*list) return detail::cmd_list(o, out);
    if (*oracle) return detail::cmd_oracle(o, out);
    if (*solve) return detail::cmd_solve(o, out);
    if (*bench) return detail::cmd_bench(o, out, err);
    if (*trace) return detail::cmd_trace(o, out);
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace mwalk
