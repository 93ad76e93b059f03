#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwalk/objfun.hpp"
#include "mwalk/quantize.hpp"
#include "mwalk/rng.hpp"
#include "mwalk/ruler.hpp"

namespace mwalk {

enum class SolverKind { mw, mwr, desf, desfr, de_strategy };

struct SolverConfig {
  SolverKind kind = SolverKind::mw;
  /// DE strategy id 1..6, used by SolverKind::de_strategy.
  int strategy = 1;
  std::string objective;
  /// Ruler marks, or population size for DE.
  std::size_t marks = 32;
  /// Neighborhood radius for MW/MWR; 0 selects the full radius m - 2.
  std::size_t radius = 0;
  double dither = 0.01;
  Origin origin = Origin::ruler_min;
  RulerMove move = RulerMove::single;
  double rde = 1.0;
  double cr = 0.9;
  /// Per-component jitter on the mutation scale for strategy 3.
  double jitter = 1.0e-4;
  std::uint64_t steps_limit = 1000;
  /// Consecutive non-improving steps before a restart; 0 selects m.
  std::size_t plateau_limit = 0;
  std::uint64_t seed = 1;
  /// Worker threads for candidate evaluation inside one step.
  unsigned workers = 1;

  bool is_multiwalk() const { return kind == SolverKind::mw || kind == SolverKind::mwr; }
  bool restarts() const { return kind == SolverKind::mwr || kind == SolverKind::desfr; }
  std::size_t effective_radius() const { return radius == 0 ? marks - 2 : radius; }
  std::size_t effective_plateau() const { return plateau_limit == 0 ? marks : plateau_limit; }
};

/// Display name: MW04, MWR30, DEsF1, DEsFR1, DEoF1..DEoF6.
inline std::string solver_label(const SolverConfig& cfg) {
  auto two_digits = [](std::size_t v) {
    return v < 10 ? "0" + std::to_string(v) : std::to_string(v);
  };
  switch (cfg.kind) {
    case SolverKind::mw:
      return "MW" + two_digits(cfg.effective_radius());
    case SolverKind::mwr:
      return "MWR" + two_digits(cfg.effective_radius());
    case SolverKind::desf:
      return "DEsF1";
    case SolverKind::desfr:
      return "DEsFR1";
    case SolverKind::de_strategy:
      return "DEoF" + std::to_string(cfg.strategy);
  }
  return "?";
}

/// Applies a solver name to `base`. Accepts MW, MWR (optionally followed by a
/// radius, e.g. MWR30), DEsF, DEsF1, DEsFR, DEsFR1, DEoF1..6, DEstrategy1..6.
inline SolverConfig parse_solver(std::string_view name, SolverConfig base) {
  auto digits_after = [&](std::string_view prefix) -> std::optional<std::string_view> {
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto rest = name.substr(prefix.size());
    if (!std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::nullopt;
    return rest;
  };
  auto as_int = [](std::string_view s) {
    std::size_t v = 0;
    for (char c : s) v = v * 10 + static_cast<std::size_t>(c - '0');
    return v;
  };
  if (name == "DEsF" || name == "DEsF1") {
    base.kind = SolverKind::desf;
    return base;
  }
  if (name == "DEsFR" || name == "DEsFR1") {
    base.kind = SolverKind::desfr;
    return base;
  }
  for (std::string_view prefix : {"DEoF", "DEstrategy"}) {
    if (auto rest = digits_after(prefix); rest && rest->size() == 1) {
      base.kind = SolverKind::de_strategy;
      base.strategy = static_cast<int>(as_int(*rest));
      if (base.strategy < 1 || base.strategy > 6) break;
      return base;
    }
  }
  for (auto [prefix, kind] : {std::pair{std::string_view("MWR"), SolverKind::mwr},
                              std::pair{std::string_view("MW"), SolverKind::mw}}) {
    if (auto rest = digits_after(prefix)) {
      base.kind = kind;
      if (!rest->empty()) base.radius = as_int(*rest);
      return base;
    }
  }
  throw config_error("unknown solver '" + std::string(name) + "'");
}

inline void validate(const SolverConfig& cfg, const ObjectiveSpec& spec) {
  if (!cfg.objective.empty() && cfg.objective != spec.name)
    throw config_error("solver configured for '" + cfg.objective +
                       "' but objective is '" + spec.name + "'");
  if (!spec.has_target())
    throw config_error("objective '" + spec.name + "' has no target; run `oracle` first");
  if (cfg.marks < kMinMarks) throw config_error("marks must be >= 4");
  if (cfg.is_multiwalk()) {
    const auto r = cfg.effective_radius();
    if (r < 1 || r + 2 > cfg.marks) throw config_error("radius must be in [1, m-2]");
  }
  if (cfg.steps_limit < 1) throw config_error("steps limit must be >= 1");
  if (!(cfg.dither >= 0.0 && cfg.dither <= 1.0)) throw config_error("dither must be in [0, 1]");
  if (!(cfg.cr >= 0.0 && cfg.cr <= 1.0)) throw config_error("crossover rate must be in [0, 1]");
  if (!std::isfinite(cfg.rde)) throw config_error("rDE must be finite");
  if (cfg.kind == SolverKind::de_strategy && (cfg.strategy < 1 || cfg.strategy > 6))
    throw config_error("DE strategy must be in 1..6");
}

/// Outcome of one run. agent_id is 1-based.
struct RunRecord {
  Point coord_best;
  /// Quantized; the best over every restart epoch.
  double value_best = std::numeric_limits<double>::infinity();
  /// Quantized best of the final epoch only (the reference listing's value).
  double value_best_final_epoch = std::numeric_limits<double>::infinity();
  std::size_t agent_id = 0;
  std::uint64_t steps = 0;
  std::uint64_t probes = 0;
  std::uint64_t restarts = 0;
  bool censored = true;
  std::uint64_t seed = 0;

  bool operator==(const RunRecord&) const = default;
};

/// One row per committed state: F of every agent after the step (or after
/// initialization, when `initial` is set) and the epoch's running best.
struct TraceRow {
  std::uint64_t step = 0;
  std::uint64_t restart = 0;
  bool initial = false;
  std::vector<double> values;
  double best = std::numeric_limits<double>::infinity();

  bool operator==(const TraceRow&) const = default;
};

struct WalkTrace {
  std::size_t marks = 0;
  /// key = value configuration lines, replayed as comments on export.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<TraceRow> rows;
  /// (step, 1-based agent) at which the target was reached.
  std::optional<std::pair<std::uint64_t, std::size_t>> first_passage;
  std::uint64_t final_step = 0;
  std::size_t final_agent = 0;

  bool operator==(const WalkTrace&) const = default;
};

/// Running best of one epoch: raw candidates are compared against the
/// quantized value, as in the reference listing.
struct Incumbent {
  Point coords;
  double value = std::numeric_limits<double>::infinity();
};

/// Greedy synchronous commit: mark i takes its candidate iff strictly better;
/// the incumbent follows any candidate below its quantized value.
/// Returns true when the incumbent changed.
inline bool commit_proposals(RulerState& state, std::span<const double> coords,
                             std::span<const double> values, int digits,
                             Incumbent& best) {
  const std::size_t p = state.dim;
  bool updated = false;
  for (std::size_t i = 0; i < state.marks; ++i) {
    const double fi = values[i];
    const auto ci = coords.subspan(i * p, p);
    if (fi < state.values[i]) {
      std::copy(ci.begin(), ci.end(), state.row(i).begin());
      state.values[i] = fi;
    }
    if (fi < best.value) {
      best.coords.assign(ci.begin(), ci.end());
      best.value = quantize(fi, digits);
      updated = true;
    }
  }
  return updated;
}

inline NeighborhoodOptions neighborhood_options(const SolverConfig& cfg, std::size_t step) {
  NeighborhoodOptions opt;
  opt.radius = cfg.effective_radius();
  opt.dither = cfg.dither;
  opt.origin = cfg.origin;
  opt.move = cfg.move;
  opt.phase = step;
  opt.workers = cfg.workers;
  return opt;
}

/// One multiwalk step (`step` is 1-based within the run). Charges m * radius
/// probes.
inline bool mw_step(RulerState& state, const ObjectiveSpec& spec,
                    const SolverConfig& cfg, Rng& rng, EvalCounter& counter,
                    Incumbent& best, std::size_t step = 1) {
  const auto prop = neighborhood_eval(state, spec, neighborhood_options(cfg, step), rng, counter);
  return commit_proposals(state, prop.coords, prop.values, spec.digits_target, best);
}

// ---------------------------------------------------------------------------
// Differential evolution pieces

/// Population drawn uniformly in the box (no anchored rows). Charges m probes.
inline RulerState init_population(const ObjectiveSpec& spec, std::size_t marks,
                                  Rng& rng, EvalCounter& counter) {
  if (marks < kMinMarks) throw config_error("population needs at least 4 members");
  std::vector<double> coords(marks * spec.dim);
  for (std::size_t i = 0; i < marks; ++i)
    for (std::size_t k = 0; k < spec.dim; ++k)
      coords[i * spec.dim + k] =
          spec.lower[k] + rng.uniform01() * (spec.upper[k] - spec.lower[k]);
  return make_ruler_state(spec, std::move(coords), counter);
}

inline bool in_box(std::span<const double> x, const ObjectiveSpec& spec) {
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < spec.lower[k] || x[k] > spec.upper[k]) return false;
  return true;
}

/// Whole-vector confinement: an out-of-box point is replaced by a fresh
/// uniform draw inside the box.
inline void confine(std::span<double> x, const ObjectiveSpec& spec, Rng& rng) {
  if (in_box(x, spec)) return;
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = spec.lower[k] + rng.uniform01() * (spec.upper[k] - spec.lower[k]);
}

/// Three distinct indices of [0, m), possibly including `target` itself.
inline std::array<std::size_t, 3> pick_three(std::size_t marks, Rng& rng) {
  std::vector<std::size_t> all(marks);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto ii = rng.sample(std::span<const std::size_t>(all), 3);
  return {ii[0], ii[1], ii[2]};
}

/// Mutation candidate built from explicit indices, then confined.
inline Point de_mutate_with(const RulerState& pop, std::array<std::size_t, 3> ii,
                            double rde, const ObjectiveSpec& spec, Rng& rng) {
  Point c(pop.dim);
  for (std::size_t k = 0; k < pop.dim; ++k)
    c[k] = pop.at(ii[0], k) + rde * (pop.at(ii[1], k) - pop.at(ii[2], k));
  confine(c, spec, rng);
  return c;
}

/// simpleDE mutation for member `i`: R[a] + rDE * (R[b] - R[c]) with a, b, c
/// distinct draws from the whole population.
inline Point de_mutate(const RulerState& pop, [[maybe_unused]] std::size_t i,
                       double rde, const ObjectiveSpec& spec, Rng& rng) {
  return de_mutate_with(pop, pick_three(pop.marks, rng), rde, spec, rng);
}

struct StepProposal {
  std::vector<double> coords;
  std::vector<double> values;
};

struct MultiwalkPolicy {
  const ObjectiveSpec& spec;
  const SolverConfig& cfg;

  RulerState init(Rng& rng, EvalCounter& counter) const {
    return init_rulers(spec, cfg.marks, rng, counter);
  }
  StepProposal propose(const RulerState& state, Rng& rng, EvalCounter& counter,
                       std::size_t step) const {
    auto prop = neighborhood_eval(state, spec, neighborhood_options(cfg, step), rng, counter);
    return {std::move(prop.coords), std::move(prop.values)};
  }
};

struct SimpleDePolicy {
  const ObjectiveSpec& spec;
  const SolverConfig& cfg;

  RulerState init(Rng& rng, EvalCounter& counter) const {
    return init_population(spec, cfg.marks, rng, counter);
  }
  StepProposal propose(const RulerState& pop, Rng& rng, EvalCounter& counter,
                       std::size_t /*step*/) const {
    StepProposal out;
    out.coords.reserve(pop.marks * pop.dim);
    for (std::size_t i = 0; i < pop.marks; ++i) {
      const auto c = de_mutate(pop, i, cfg.rde, spec, rng);
      out.coords.insert(out.coords.end(), c.begin(), c.end());
    }
    out.values.resize(pop.marks);
    evaluate_batch(spec, out.coords, out.values, counter, cfg.workers);
    return out;
  }
};

/// Classic DE strategies with binomial crossover:
///   1 rand/1, 2 local-to-best/1, 3 best/1 with per-component jitter,
///   4 rand/1 with per-vector scale in rDE*[0.5,1], 5 the same per step,
///   6 either-or between rand/1 and recombination.
struct DeStrategyPolicy {
  const ObjectiveSpec& spec;
  const SolverConfig& cfg;

  RulerState init(Rng& rng, EvalCounter& counter) const {
    return init_population(spec, cfg.marks, rng, counter);
  }

  StepProposal propose(const RulerState& pop, Rng& rng, EvalCounter& counter,
                       std::size_t /*step*/) const {
    const std::size_t m = pop.marks;
    const std::size_t p = pop.dim;
    const int strategy = cfg.strategy;
    const std::size_t best = pop.argmin();
    const double step_scale = strategy == 5 ? cfg.rde * (0.5 + 0.5 * rng.uniform01()) : cfg.rde;

    StepProposal out;
    out.coords.resize(m * p);
    Point donor(p);
    for (std::size_t i = 0; i < m; ++i) {
      auto others = eligible_others(i, m);
      const auto r = rng.sample(std::span<const std::size_t>(others), 3);
      const double scale =
          strategy == 4 ? cfg.rde * (0.5 + 0.5 * rng.uniform01()) : step_scale;
      const bool recombine = strategy == 6 && rng.uniform01() >= 0.5;
      for (std::size_t k = 0; k < p; ++k) {
        const double xi = pop.at(i, k);
        switch (strategy) {
          case 2:
            donor[k] = xi + scale * (pop.at(best, k) - xi) +
                       scale * (pop.at(r[0], k) - pop.at(r[1], k));
            break;
          case 3: {
            const double jittered = scale + cfg.jitter * (rng.uniform01() - 0.5);
            donor[k] = pop.at(best, k) + jittered * (pop.at(r[0], k) - pop.at(r[1], k));
            break;
          }
          case 6:
            donor[k] = recombine
                           ? xi + 0.5 * (scale + 1.0) *
                                      (pop.at(r[0], k) + pop.at(r[1], k) - 2.0 * xi)
                           : pop.at(r[0], k) + scale * (pop.at(r[1], k) - pop.at(r[2], k));
            break;
          default:
            donor[k] = pop.at(r[0], k) + scale * (pop.at(r[1], k) - pop.at(r[2], k));
        }
      }
      auto trial = std::span<double>(out.coords).subspan(i * p, p);
      binomial_crossover(pop.row(i), donor, cfg.cr, rng, trial);
      confine(trial, spec, rng);
    }
    out.values.resize(m);
    evaluate_batch(spec, out.coords, out.values, counter, cfg.workers);
    return out;
  }

  /// Trial takes the donor component where u < cr, and always at one random
  /// position.
  static void binomial_crossover(std::span<const double> target,
                                 std::span<const double> donor, double cr,
                                 Rng& rng, std::span<double> trial) {
    const std::size_t forced = rng.below(target.size());
    for (std::size_t k = 0; k < target.size(); ++k) {
      const bool take = rng.uniform01() < cr;
      trial[k] = (take || k == forced) ? donor[k] : target[k];
    }
  }

  static std::vector<std::size_t> eligible_others(std::size_t i, std::size_t m) {
    std::vector<std::size_t> out;
    out.reserve(m - 1);
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) out.push_back(j);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Run engine

struct RunOptions {
  /// Receives every committed state when set.
  WalkTrace* trace = nullptr;
  /// Row-major coordinates replacing the first epoch's random initialization.
  const std::vector<double>* initial = nullptr;
};

inline std::vector<std::pair<std::string, std::string>> describe(const SolverConfig& cfg,
                                                                 const ObjectiveSpec& spec) {
  std::vector<std::pair<std::string, std::string>> out = {
      {"OFname", spec.name},
      {"solver", solver_label(cfg)},
      {"valueTarget", spec.value_target ? format_double(*spec.value_target) : "unset"},
      {"digitsTarget", std::to_string(spec.digits_target)},
      {"OFtol", format_double(spec.of_tol)},
      {"rulerMarks", std::to_string(cfg.marks)},
  };
  if (cfg.is_multiwalk()) {
    out.emplace_back("neighbRadius", std::to_string(cfg.effective_radius()));
    out.emplace_back("dither", format_double(cfg.dither));
    out.emplace_back("rulerOrigin", cfg.origin == Origin::ruler_min ? "min" : "lower");
    out.emplace_back("rulerMove", cfg.move == RulerMove::single ? "single" : "all");
  } else {
    out.emplace_back("rDE", format_double(cfg.rde));
    if (cfg.kind == SolverKind::de_strategy) out.emplace_back("CR", format_double(cfg.cr));
  }
  out.emplace_back("stepsLmt", std::to_string(cfg.steps_limit));
  if (cfg.restarts()) out.emplace_back("plateauLmt", std::to_string(cfg.effective_plateau()));
  out.emplace_back("seed", std::to_string(cfg.seed));
  return out;
}

/// First-passage loop shared by every solver. Each epoch seeds the generator,
/// initializes, then steps until the quantized best equals the target, the
/// global step limit is reached, or (restart variants) the plateau counter
/// hits its limit, in which case the next epoch's seed is drawn from the
/// current stream.
template <class Policy>
RunRecord run_walk(const SolverConfig& cfg, const ObjectiveSpec& spec,
                   const Policy& policy, const RunOptions& opts = {}) {
  validate(cfg, spec);
  const double target = *spec.value_target;
  const int digits = spec.digits_target;
  const std::size_t plateau_limit = cfg.effective_plateau();

  Rng rng(cfg.seed);
  EvalCounter counter;
  Incumbent global;
  Incumbent epoch;
  RulerState state;
  std::uint64_t steps = 0;
  std::uint64_t restarts = 0;
  bool passed = false;

  if (opts.trace) {
    *opts.trace = WalkTrace{};
    opts.trace->marks = cfg.marks;
    opts.trace->config = describe(cfg, spec);
  }
  auto record = [&](bool initial) {
    if (opts.trace)
      opts.trace->rows.push_back({steps, restarts, initial, state.values,
                                  initial ? std::numeric_limits<double>::infinity()
                                          : epoch.value});
  };

  while (true) {
    if (restarts == 0 && opts.initial) {
      state = make_ruler_state(spec, *opts.initial, counter);
      if (state.marks != cfg.marks) throw config_error("initial ruler has the wrong mark count");
    } else {
      state = policy.init(rng, counter);
    }
    epoch = Incumbent{};
    double err_prev = state.values[state.argmin()] - target;
    std::size_t plateau = 0;
    bool restart = false;
    record(true);

    while (true) {
      ++steps;
      const auto prop = policy.propose(state, rng, counter, steps);
      if (commit_proposals(state, prop.coords, prop.values, digits, epoch) &&
          epoch.value <= global.value)
        global = epoch;
      record(false);

      if (epoch.value == target) {
        passed = true;
        break;
      }
      if (steps >= cfg.steps_limit) break;
      if (cfg.restarts()) {
        const double err = epoch.value - target;
        if (err >= err_prev) {
          ++plateau;
        } else {
          plateau = 0;
          err_prev = err;
        }
        if (plateau == plateau_limit) {
          restart = true;
          break;
        }
      }
    }
    if (!restart) break;
    rng.reseed(rng.next_u64());
    ++restarts;
  }

  RunRecord rec;
  rec.coord_best = global.coords;
  rec.value_best = global.value;
  rec.value_best_final_epoch = epoch.value;
  rec.agent_id = state.argmin() + 1;
  rec.steps = steps;
  rec.probes = counter.probes;
  rec.restarts = restarts;
  rec.censored = !passed;
  rec.seed = cfg.seed;
  if (opts.trace) {
    opts.trace->final_step = steps;
    opts.trace->final_agent = rec.agent_id;
    if (passed) opts.trace->first_passage = std::make_pair(steps, rec.agent_id);
  }
  return rec;
}

/// Dispatches on the solver kind.
inline RunRecord run_solver(const SolverConfig& cfg, const ObjectiveSpec& spec,
                            const RunOptions& opts = {}) {
  switch (cfg.kind) {
    case SolverKind::mw:
    case SolverKind::mwr:
      return run_walk(cfg, spec, MultiwalkPolicy{spec, cfg}, opts);
    case SolverKind::desf:
    case SolverKind::desfr:
      return run_walk(cfg, spec, SimpleDePolicy{spec, cfg}, opts);
    case SolverKind::de_strategy:
      return run_walk(cfg, spec, DeStrategyPolicy{spec, cfg}, opts);
  }
  throw config_error("unknown solver kind");
}

/// Closed-form probe count for a finished run.
inline std::uint64_t expected_probes(const SolverConfig& cfg, const RunRecord& rec) {
  const std::uint64_t m = cfg.marks;
  const std::uint64_t per_step = cfg.is_multiwalk() ? m * cfg.effective_radius() : m;
  return m * (1 + rec.restarts) + rec.steps * per_step;
}

}  // namespace mwalk
