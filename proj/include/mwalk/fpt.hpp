#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mwalk/format.hpp"
#include "mwalk/objfun.hpp"
#include "mwalk/quantize.hpp"
#include "mwalk/solvers.hpp"

namespace mwalk {

/// N-seed batch over one objective. Run r of every solver uses seed
/// config.seed + r.
struct ExperimentPlan {
  /// Must carry a target.
  ObjectiveSpec spec;
  std::vector<SolverConfig> solvers;
  std::size_t sample_size = 100;
  /// Runs executed concurrently; each run itself stays single-threaded.
  unsigned workers = 1;
};

struct SolverRuns {
  SolverConfig config;
  std::vector<RunRecord> runs;
};

inline void validate(const ExperimentPlan& plan) {
  if (plan.sample_size < 1) throw config_error("sample size must be >= 1");
  if (plan.solvers.empty()) throw config_error("experiment needs at least one solver");
  for (const auto& cfg : plan.solvers) {
    validate(cfg, plan.spec);
    if (cfg.steps_limit != plan.solvers.front().steps_limit)
      throw config_error("all solvers of an experiment share one steps limit");
  }
}

/// Results are stored by (solver, run) index, so they do not depend on the
/// worker count or completion order.
inline std::vector<SolverRuns> run_experiment(const ExperimentPlan& plan) {
  validate(plan);
  const std::size_t n = plan.sample_size;
  std::vector<SolverRuns> out;
  for (const auto& cfg : plan.solvers) {
    SolverRuns s{cfg, std::vector<RunRecord>(n)};
    s.config.workers = 1;
    out.push_back(std::move(s));
  }

  const std::size_t total = out.size() * n;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      auto& s = out[job / n];
      const std::size_t r = job % n;
      try {
        SolverConfig cfg = s.config;
        cfg.seed = s.config.seed + r;
        s.runs[r] = run_solver(cfg, plan.spec);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(plan.workers, static_cast<unsigned>(total)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct MeanStderr {
  std::optional<double> mean;
  /// Sample sd / sqrt(count); empty when count < 2.
  std::optional<double> se;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  out.mean = mean;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

struct SolverSummary {
  std::string objective;
  std::string solver;
  std::size_t n = 0;
  std::size_t censored = 0;
  std::uint64_t steps_limit = 0;
  MeanStderr steps_unc;
  /// Censored runs count as steps_limit.
  MeanStderr steps_incl;
  double mean_probes = 0.0;
  double mean_restarts = 0.0;

  std::size_t uncensored() const { return n - censored; }
};

inline SolverSummary summarize(const std::string& objective, const std::string& solver,
                               std::span<const RunRecord> runs, std::uint64_t steps_limit) {
  SolverSummary s;
  s.objective = objective;
  s.solver = solver;
  s.n = runs.size();
  s.steps_limit = steps_limit;
  std::vector<double> unc;
  std::vector<double> incl;
  double probes = 0.0;
  double restarts = 0.0;
  for (const auto& r : runs) {
    if (r.censored) {
      ++s.censored;
      incl.push_back(static_cast<double>(steps_limit));
    } else {
      unc.push_back(static_cast<double>(r.steps));
      incl.push_back(static_cast<double>(r.steps));
    }
    probes += static_cast<double>(r.probes);
    restarts += static_cast<double>(r.restarts);
  }
  s.steps_unc = mean_stderr(unc);
  s.steps_incl = mean_stderr(incl);
  if (s.n) {
    s.mean_probes = probes / static_cast<double>(s.n);
    s.mean_restarts = restarts / static_cast<double>(s.n);
  }
  return s;
}

inline SolverSummary summarize(const std::string& objective, const SolverRuns& runs) {
  return summarize(objective, solver_label(runs.config), runs.runs, runs.config.steps_limit);
}

inline std::vector<SolverSummary> summarize(const ExperimentPlan& plan,
                                            const std::vector<SolverRuns>& results) {
  std::vector<SolverSummary> out;
  for (const auto& r : results) out.push_back(summarize(plan.spec.name, r));
  return out;
}

enum class Bound { none, lower, upper };

/// Steps ratio a / b of uncensored means. `reliable` follows the rule that a
/// comparison holds when at least one side has no censored runs.
struct Comparison {
  std::string a;
  std::string b;
  std::optional<double> ratio;
  bool reliable = false;
  /// Set when one side is fully censored and its inclusive mean stands in.
  Bound bound = Bound::none;
  /// Mean probes a / mean probes b, over all runs.
  std::optional<double> probe_ratio;
};

inline Comparison compare(const SolverSummary& a, const SolverSummary& b) {
  Comparison c;
  c.a = a.solver;
  c.b = b.solver;
  c.reliable = a.censored == 0 || b.censored == 0;
  if (b.mean_probes > 0.0) c.probe_ratio = a.mean_probes / b.mean_probes;
  const bool has_a = a.steps_unc.mean.has_value();
  const bool has_b = b.steps_unc.mean.has_value();
  if (has_a && has_b) {
    c.ratio = *a.steps_unc.mean / *b.steps_unc.mean;
  } else if (!has_a && has_b) {
    // a never finished: it needs at least its limit, so the ratio is at least this
    c.ratio = *a.steps_incl.mean / *b.steps_unc.mean;
    c.bound = Bound::lower;
  } else if (has_a && !has_b) {
    c.ratio = *a.steps_unc.mean / *b.steps_incl.mean;
    c.bound = Bound::upper;
  }
  return c;
}

inline std::string format_comparison(const Comparison& c) {
  std::string out = c.a + "/" + c.b + " = ";
  if (!c.ratio) return out + "none (no uncensored runs on either side)";
  if (c.bound == Bound::lower) out += ">= ";
  if (c.bound == Bound::upper) out += "<= ";
  out += format_double(quantize(*c.ratio, 3));
  if (!c.reliable) out += " (unreliable: both sides censored)";
  if (c.probe_ratio) out += "; probes " + format_double(quantize(*c.probe_ratio, 3));
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

namespace detail {

inline std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace detail

/// Comment lines replaying the plan: objective and target first, then one
/// line per solver.
inline void write_plan_header(std::ostream& out, const ExperimentPlan& plan) {
  out << "# OFname = " << plan.spec.name << '\n';
  out << "# valueTarget = "
      << (plan.spec.value_target ? format_double(*plan.spec.value_target) : "unset") << '\n';
  out << "# digitsTarget = " << plan.spec.digits_target << '\n';
  out << "# OFtol = " << format_double(plan.spec.of_tol) << '\n';
  out << "# sampleSize = " << plan.sample_size << '\n';
  for (const auto& cfg : plan.solvers) {
    out << '#';
    bool first = true;
    for (const auto& [key, value] : describe(cfg, plan.spec)) {
      if (key == "OFname" || key == "valueTarget" || key == "digitsTarget" || key == "OFtol")
        continue;
      out << (first ? " " : "; ") << key << " = " << value;
      first = false;
    }
    out << '\n';
  }
}

inline void write_runs_csv(std::ostream& out, const ExperimentPlan& plan,
                           const std::vector<SolverRuns>& results) {
  write_plan_header(out, plan);
  out << "objective,solver,seed,steps,probes,restarts,censored,valueBest,agentId\n";
  for (const auto& s : results) {
    const auto label = solver_label(s.config);
    for (const auto& r : s.runs)
      out << plan.spec.name << ',' << label << ',' << r.seed << ',' << r.steps << ','
          << r.probes << ',' << r.restarts << ',' << (r.censored ? 1 : 0) << ','
          << format_double(r.value_best) << ',' << r.agent_id << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentPlan& plan,
                              const std::vector<SolverSummary>& summaries) {
  write_plan_header(out, plan);
  out << "objective,solver,n,censored,mean_steps_unc,stderr_steps_unc,mean_steps_incl,"
         "stderr_steps_incl,mean_probes,mean_restarts\n";
  for (const auto& s : summaries)
    out << s.objective << ',' << s.solver << ',' << s.n << ',' << s.censored << ','
        << detail::opt_field(s.steps_unc.mean) << ','
        << detail::opt_field(s.steps_unc.se) << ','
        << detail::opt_field(s.steps_incl.mean) << ','
        << detail::opt_field(s.steps_incl.se) << ',' << format_double(s.mean_probes)
        << ',' << format_double(s.mean_restarts) << '\n';
}

/// Bar heights are inclusive means, so censored runs sit at the limit.
inline void write_bargraph(std::ostream& out, const ExperimentPlan& plan,
                           const std::vector<SolverSummary>& summaries) {
  write_plan_header(out, plan);
  out << "solver,mean,stderr,censored\n";
  for (const auto& s : summaries)
    out << s.solver << ',' << detail::opt_field(s.steps_incl.mean) << ','
        << detail::opt_field(s.steps_incl.se) << ',' << s.censored << '\n';
}

}  // namespace mwalk
