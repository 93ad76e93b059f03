#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mwalk/format.hpp"
#include "mwalk/objfun.hpp"
#include "mwalk/rng.hpp"

namespace mwalk {

/// Evaluates `out.size()` points stored row-major in `points`. Results are
/// merged by index, so the output does not depend on `workers`.
inline void evaluate_batch(const ObjectiveSpec& spec,
                           std::span<const double> points,
                           std::span<double> out, EvalCounter& counter,
                           unsigned workers = 1) {
  const std::size_t n = out.size();
  const std::size_t p = spec.dim;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t)
      out[t] = spec.fn(points.subspan(t * p, p));
  };
  if (workers <= 1 || n < 256) {
    run(0, n);
  } else {
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0; begin < n; begin += chunk)
      pool.emplace_back(run, begin, std::min(n, begin + chunk));
  }
  counter.probes += n;
}

/// Marks (rows) by rulers (columns): R holds coordinates, F the raw
/// objective value of each row.
struct RulerState {
  std::size_t marks = 0;
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> values;

  std::span<double> row(std::size_t i) { return {coords.data() + i * dim, dim}; }
  std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
  double at(std::size_t i, std::size_t k) const { return coords[i * dim + k]; }

  /// 0-based index of the lowest value (first on ties).
  std::size_t argmin() const {
    return static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());
  }
};

inline constexpr std::size_t kMinMarks = 4;

/// Builds a state from explicit row-major coordinates and evaluates every row.
inline RulerState make_ruler_state(const ObjectiveSpec& spec,
                                   std::vector<double> coords,
                                   EvalCounter& counter) {
  if (spec.dim == 0 || coords.size() % spec.dim != 0)
    throw config_error("ruler coordinates do not match the objective dimension");
  RulerState state;
  state.dim = spec.dim;
  state.marks = coords.size() / spec.dim;
  if (state.marks < kMinMarks) throw config_error("a ruler needs at least 4 marks");
  state.coords = std::move(coords);
  state.values.resize(state.marks);
  evaluate_batch(spec, state.coords, state.values, counter);
  return state;
}

/// Uniform marks in the box, then row 0 pinned to the lower bounds and the
/// last row to the upper bounds. Charges m probes.
inline RulerState init_rulers(const ObjectiveSpec& spec, std::size_t marks,
                              Rng& rng, EvalCounter& counter) {
  if (marks < kMinMarks) throw config_error("a ruler needs at least 4 marks");
  const std::size_t p = spec.dim;
  std::vector<double> coords(marks * p);
  for (std::size_t i = 0; i < marks; ++i)
    for (std::size_t k = 0; k < p; ++k)
      coords[i * p + k] = spec.lower[k] + rng.uniform01() * (spec.upper[k] - spec.lower[k]);
  for (std::size_t k = 0; k < p; ++k) {
    coords[k] = spec.lower[k];
    coords[(marks - 1) * p + k] = spec.upper[k];
  }
  return make_ruler_state(spec, std::move(coords), counter);
}

/// Where candidate positions are measured from on each ruler.
enum class Origin {
  /// The box's lower bound pLB.
  lower_bound,
  /// The ruler's current smallest mark (equals pLB right after init_rulers).
  ruler_min,
};

inline Point ruler_origin(const RulerState& state, const ObjectiveSpec& spec,
                          Origin origin) {
  if (origin == Origin::lower_bound) return spec.lower;
  Point out(state.dim, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < state.marks; ++i)
    for (std::size_t k = 0; k < state.dim; ++k) out[k] = std::min(out[k], state.at(i, k));
  return out;
}

/// Candidate generated for mark `i` by neighbor `j`: per ruler k,
/// origin[k] + |R[i,k] - R[j,k]| * (1 + dither * u_k), clamped to the box,
/// with u_k uniform in [-1, 1]. No random draws are made when dither == 0.
inline void candidate_into(const RulerState& state, const ObjectiveSpec& spec,
                           std::span<const double> origin, std::size_t i,
                           std::size_t j, double dither, Rng& rng,
                           std::span<double> out) {
  assert(i != j);
  for (std::size_t k = 0; k < state.dim; ++k) {
    double diff = std::fabs(state.at(i, k) - state.at(j, k));
    if (dither != 0.0) diff *= 1.0 + dither * rng.symmetric();
    out[k] = std::clamp(origin[k] + diff, spec.lower[k], spec.upper[k]);
  }
}

inline Point candidate_coords(const RulerState& state, const ObjectiveSpec& spec,
                              std::size_t i, std::size_t j, double dither,
                              Rng& rng, Origin origin = Origin::lower_bound) {
  Point out(state.dim);
  candidate_into(state, spec, ruler_origin(state, spec, origin), i, j, dither, rng, out);
  return out;
}

/// The m-2 neighbor columns of row `i` (0-based): every other row except
/// row 0 (for i >= 1) or the last row (for i == 0).
inline std::vector<std::size_t> eligible_neighbors(std::size_t i, std::size_t marks) {
  std::vector<std::size_t> out;
  out.reserve(marks - 2);
  const std::size_t excluded = (i == 0) ? marks - 1 : 0;
  for (std::size_t j = 0; j < marks; ++j)
    if (j != i && j != excluded) out.push_back(j);
  return out;
}

/// Which rulers a candidate moves.
enum class RulerMove {
  /// Only ruler (i + t + phase) mod p, for candidate t of mark i; the mark's
  /// other coordinates are kept.
  single,
  /// Every ruler at once, all from the same neighbor.
  all,
};

struct NeighborhoodOptions {
  /// Neighbor columns per mark, 1 <= radius <= m - 2.
  std::size_t radius = 1;
  double dither = 0.01;
  Origin origin = Origin::ruler_min;
  RulerMove move = RulerMove::single;
  /// Rotates the single-ruler assignment; solvers pass the step index.
  std::size_t phase = 0;
  unsigned workers = 1;
};

/// Best candidate per mark for one step.
struct NeighborhoodProposal {
  std::size_t marks = 0;
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> values;
  /// Neighbor indices evaluated for each mark, ascending.
  std::vector<std::vector<std::size_t>> neighbors;
  /// Neighbor that produced the returned candidate.
  std::vector<std::size_t> chosen;

  std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
};

/// Generates and evaluates the neighborhood of every mark. All random draws
/// happen first, in mark / neighbor / ruler order; evaluation may then fan out
/// to worker threads without changing the result. Charges m * radius probes.
inline NeighborhoodProposal neighborhood_eval(const RulerState& state,
                                              const ObjectiveSpec& spec,
                                              const NeighborhoodOptions& opt,
                                              Rng& rng, EvalCounter& counter) {
  const std::size_t m = state.marks;
  const std::size_t p = state.dim;
  const std::size_t radius = opt.radius;
  if (radius < 1 || radius + 2 > m)
    throw config_error("neighborhood radius must be in [1, m-2]");

  NeighborhoodProposal out;
  out.marks = m;
  out.dim = p;
  out.neighbors.resize(m);

  const Point base = ruler_origin(state, spec, opt.origin);
  std::vector<double> cand(m * radius * p);
  for (std::size_t i = 0; i < m; ++i) {
    auto pool = eligible_neighbors(i, m);
    if (radius + 2 < m) {
      pool = rng.sample(std::span<const std::size_t>(pool), radius);
      std::sort(pool.begin(), pool.end());
    }
    for (std::size_t t = 0; t < radius; ++t) {
      auto slot = std::span<double>(cand).subspan((i * radius + t) * p, p);
      if (opt.move == RulerMove::all || p == 1) {
        candidate_into(state, spec, base, i, pool[t], opt.dither, rng, slot);
      } else {
        const std::size_t k = (i + t + opt.phase) % p;
        std::copy_n(state.row(i).begin(), p, slot.begin());
        double diff = std::fabs(state.at(i, k) - state.at(pool[t], k));
        if (opt.dither != 0.0) diff *= 1.0 + opt.dither * rng.symmetric();
        slot[k] = std::clamp(base[k] + diff, spec.lower[k], spec.upper[k]);
      }
    }
    out.neighbors[i] = std::move(pool);
  }

  std::vector<double> fvals(m * radius);
  evaluate_batch(spec, cand, fvals, counter, opt.workers);

  out.coords.resize(m * p);
  out.values.resize(m);
  out.chosen.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < radius; ++t)
      if (fvals[i * radius + t] < fvals[i * radius + best]) best = t;
    out.values[i] = fvals[i * radius + best];
    out.chosen[i] = out.neighbors[i][best];
    std::copy_n(cand.begin() + static_cast<std::ptrdiff_t>((i * radius + best) * p), p,
                out.coords.begin() + static_cast<std::ptrdiff_t>(i * p));
  }
  return out;
}

using Table = std::vector<std::vector<double>>;

/// Offset pairwise differences lower[k] + |R[i,k] - R[j,k]| on ruler `k`,
/// NaN on the diagonal.
inline Table difference_table(const RulerState& state, const ObjectiveSpec& spec,
                              std::size_t k = 0) {
  const std::size_t m = state.marks;
  Table out(m, std::vector<double>(m, std::nan("")));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) out[i][j] = spec.lower[k] + std::fabs(state.at(i, k) - state.at(j, k));
  return out;
}

/// Full-radius candidate coordinates on ruler `k` with dither 0; row i lists
/// the candidates of eligible_neighbors(i) in order.
inline Table neighborhood_table(const RulerState& state, const ObjectiveSpec& spec,
                                std::size_t k = 0) {
  Rng unused;
  Table out(state.marks);
  for (std::size_t i = 0; i < state.marks; ++i)
    for (std::size_t j : eligible_neighbors(i, state.marks))
      out[i].push_back(candidate_coords(state, spec, i, j, 0.0, unused)[k]);
  return out;
}

/// Debug dump of both tables for ruler `k`, rows numbered from 1.
inline std::string format_neighborhood(const RulerState& state,
                                       const ObjectiveSpec& spec,
                                       std::size_t k = 0) {
  auto cell = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
  std::string out = "ruler = (";
  for (std::size_t i = 0; i < state.marks; ++i) {
    if (i) out += ", ";
    out += format_double(state.at(i, k));
  }
  out += ")\n";
  auto emit = [&](const char* title, const Table& table) {
    out += title;
    out += '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
      out += std::to_string(i + 1);
      for (double v : table[i]) {
        out += ' ';
        out += cell(v);
      }
      out += '\n';
    }
  };
  emit("ruler difference matrix", difference_table(state, spec, k));
  emit("ruler neighborhood", neighborhood_table(state, spec, k));
  return out;
}

}  // namespace mwalk
