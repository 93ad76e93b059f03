#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mwalk/format.hpp"
#include "mwalk/objfun.hpp"
#include "mwalk/quantize.hpp"

namespace mwalk {

/// Best-known value of one objective, computed independently of any solver.
struct TargetRecord {
  std::string name;
  double value_target = 0.0;  // quantized to `digits`
  int digits = 9;
  std::vector<Point> minimizers;
  std::string method;  // "enumeration" or "grid+refine"
  std::size_t grid_points = 0;
  std::size_t refine_rounds = 0;

  bool operator==(const TargetRecord&) const = default;
};

inline constexpr std::uint64_t kMaxEnumeratedStates = (std::uint64_t{1} << 24) + 1;

/// Exhaustive scan of every integer point of a staircase objective.
inline TargetRecord enumerate_integer(const ObjectiveSpec& spec, int digits = 9) {
  if (spec.landscape != Landscape::integer_staircase || spec.dim != 1)
    throw config_error("enumeration needs a 1-D integer staircase objective");
  if (spec.states > kMaxEnumeratedStates)
    throw config_error("too many states to enumerate for '" + spec.name + "'");

  TargetRecord rec;
  rec.name = spec.name;
  rec.digits = digits;
  rec.method = "enumeration";
  double best = std::numeric_limits<double>::infinity();
  const auto first = static_cast<std::int64_t>(spec.lower[0]);
  const auto last = static_cast<std::int64_t>(spec.upper[0]);
  for (std::int64_t x = first; x <= last; ++x) {
    const double xs[1] = {static_cast<double>(x)};
    const double v = spec.fn(xs);
    if (v < best) {
      best = v;
      rec.minimizers.clear();
    }
    if (v == best) rec.minimizers.push_back({xs[0]});
  }
  rec.value_target = quantize(best, digits);
  return rec;
}

struct GridOptions {
  /// Coarse points per dimension; 0 picks 4001 / 1001 / 201 for p = 1 / 2 / 3.
  std::size_t points = 0;
  std::size_t rounds = 60;
  /// Coarse-grid local minima used as refinement starts.
  std::size_t starts = 16;
};

struct RefineResult {
  Point x;
  double value = std::numeric_limits<double>::infinity();
  /// Incumbent value after each refinement round.
  std::vector<double> history;
};

namespace detail {

inline std::size_t default_points(std::size_t p) {
  switch (p) {
    case 1:
      return 4001;
    case 2:
      return 1001;
    default:
      return 201;
  }
}

inline std::size_t refine_points(std::size_t p) {
  switch (p) {
    case 1:
      return 41;
    case 2:
      return 21;
    default:
      return 11;
  }
}

// Lexicographic (value, coords) ordering so merges are deterministic.
inline bool better(double va, const Point& a, double vb, const Point& b) {
  if (va != vb) return va < vb;
  return a < b;
}

// Visits every point of the tensor grid spanned by `axes`.
template <class Fn>
void for_each_grid_point(const std::vector<std::vector<double>>& axes, Fn&& fn) {
  const std::size_t p = axes.size();
  std::vector<std::size_t> idx(p, 0);
  Point x(p);
  while (true) {
    for (std::size_t k = 0; k < p; ++k) x[k] = axes[k][idx[k]];
    fn(x);
    std::size_t k = p;
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t)
    out[t] = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(n - 1);
  return out;
}

}  // namespace detail

/// Local refinement: a small grid over a window around the incumbent, moving
/// only on strict improvement, then the window is halved.
inline RefineResult refine_around(const ObjectiveSpec& spec, Point start,
                                  Point half_width, std::size_t rounds) {
  const std::size_t p = spec.dim;
  const std::size_t q = detail::refine_points(p);
  RefineResult out;
  out.x = std::move(start);
  out.value = spec.fn(out.x);
  std::vector<std::vector<double>> axes(p);
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t k = 0; k < p; ++k)
      axes[k] = detail::linspace(std::max(spec.lower[k], out.x[k] - half_width[k]),
                                 std::min(spec.upper[k], out.x[k] + half_width[k]), q);
    Point best_x = out.x;
    double best_v = out.value;
    detail::for_each_grid_point(axes, [&](const Point& x) {
      const double v = spec.fn(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    });
    out.x = std::move(best_x);
    out.value = best_v;
    out.history.push_back(best_v);
    for (double& h : half_width) h *= 0.5;
  }
  return out;
}

/// Dense coarse scan, then refinement from the best coarse-grid local minima.
inline RefineResult grid_search(const ObjectiveSpec& spec, const GridOptions& opt) {
  const std::size_t p = spec.dim;
  const std::size_t n = opt.points ? opt.points : detail::default_points(p);
  std::vector<std::vector<double>> axes(p);
  Point spacing(p);
  for (std::size_t k = 0; k < p; ++k) {
    axes[k] = detail::linspace(spec.lower[k], spec.upper[k], n);
    spacing[k] = (spec.upper[k] - spec.lower[k]) / static_cast<double>(n - 1);
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(n), static_cast<double>(p))));
  detail::for_each_grid_point(axes, [&](const Point& x) { values.push_back(spec.fn(x)); });

  // Axis-neighbor local minima, best `starts` of them.
  std::vector<std::size_t> stride(p, 1);
  for (std::size_t k = p - 1; k > 0; --k) stride[k - 1] = stride[k] * n;
  std::vector<std::size_t> minima;
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    bool local = true;
    for (std::size_t k = 0; k < p && local; ++k) {
      const std::size_t coord = (flat / stride[k]) % n;
      if (coord > 0 && values[flat - stride[k]] < values[flat]) local = false;
      if (coord + 1 < n && values[flat + stride[k]] < values[flat]) local = false;
    }
    if (local) minima.push_back(flat);
  }
  const std::size_t keep = std::min(opt.starts, minima.size());
  std::partial_sort(minima.begin(), minima.begin() + static_cast<std::ptrdiff_t>(keep),
                    minima.end(), [&](std::size_t a, std::size_t b) {
                      return values[a] != values[b] ? values[a] < values[b] : a < b;
                    });
  minima.resize(keep);

  RefineResult best;
  for (std::size_t flat : minima) {
    Point x(p);
    for (std::size_t k = 0; k < p; ++k) x[k] = axes[k][(flat / stride[k]) % n];
    auto res = refine_around(spec, std::move(x), spacing, opt.rounds);
    if (best.history.empty() || detail::better(res.value, res.x, best.value, best.x))
      best = std::move(res);
  }
  return best;
}

/// Grid-and-refine target for a continuous objective with p <= 3. A
/// coordinate-mean objective is searched on its 1-D factor and lifted.
inline TargetRecord grid_refine(const ObjectiveSpec& spec, int digits = 9,
                                GridOptions opt = {}) {
  if (spec.landscape != Landscape::continuous)
    throw config_error("grid refinement is not valid for staircase objectives");
  if (spec.dim < 1 || spec.dim > 3) throw config_error("grid refinement supports p <= 3");

  const ObjectiveSpec search =
      spec.separable_factor.empty() ? spec : make_objective(spec.separable_factor);
  const auto res = grid_search(search, opt);
  Point x = res.x;
  if (search.dim != spec.dim) x.assign(spec.dim, res.x[0]);

  TargetRecord rec;
  rec.name = spec.name;
  rec.digits = digits;
  rec.value_target = quantize(spec.fn(x), digits);
  rec.minimizers = {x};
  rec.method = "grid+refine";
  rec.grid_points = opt.points ? opt.points : detail::default_points(search.dim);
  rec.refine_rounds = opt.rounds;
  return rec;
}

/// Enumeration for staircases, grid refinement otherwise.
inline TargetRecord compute_target(const ObjectiveSpec& spec, int digits = 9) {
  return spec.landscape == Landscape::integer_staircase ? enumerate_integer(spec, digits)
                                                        : grid_refine(spec, digits);
}

/// Objective spec carrying the record's target at `digits`. A different
/// precision is re-quantized from the raw value at the stored minimizer.
inline ObjectiveSpec apply_target(const ObjectiveSpec& spec, const TargetRecord& rec,
                                  std::optional<int> digits = std::nullopt) {
  const int d = digits.value_or(rec.digits);
  if (d == rec.digits) return with_target(spec, rec.value_target, d, rec.minimizers);
  if (rec.minimizers.empty())
    throw config_error("target record for '" + rec.name + "' has no minimizer");
  return with_target(spec, spec.fn(rec.minimizers.front()), d, rec.minimizers);
}

// ---------------------------------------------------------------------------
// Target store: `name,valueTarget,digits,coords...,method`, one per line.

inline std::string format_target(const TargetRecord& rec) {
  std::string line = rec.name + "," + format_double(rec.value_target) + "," +
                     std::to_string(rec.digits);
  for (const auto& x : rec.minimizers)
    for (double c : x) line += "," + format_double(c);
  line += "," + rec.method;
  if (rec.method == "grid+refine")
    line += ":" + std::to_string(rec.grid_points) + ":" + std::to_string(rec.refine_rounds);
  return line;
}

inline TargetRecord parse_target(const std::string& line) {
  const auto fields = split(line, ',');
  if (fields.size() < 4) throw config_error("malformed target record: " + line);
  TargetRecord rec;
  rec.name = fields[0];
  rec.value_target = parse_double(fields[1]);
  rec.digits = parse_integer<int>(fields[2]);
  const auto method = split(fields.back(), ':');
  rec.method = method[0];
  if (method.size() == 3) {
    rec.grid_points = parse_integer<std::size_t>(method[1]);
    rec.refine_rounds = parse_integer<std::size_t>(method[2]);
  }
  const std::size_t p = make_objective(rec.name).dim;
  const std::size_t ncoords = fields.size() - 4;
  if (ncoords % p != 0) throw config_error("target record has a partial minimizer: " + line);
  for (std::size_t t = 0; t < ncoords; t += p) {
    Point x;
    for (std::size_t k = 0; k < p; ++k) x.push_back(parse_double(fields[3 + t + k]));
    rec.minimizers.push_back(std::move(x));
  }
  return rec;
}

class TargetStore {
 public:
  static TargetStore read(std::istream& in) {
    TargetStore store;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto rec = parse_target(line);
      store.records_[rec.name] = std::move(rec);
    }
    return store;
  }

  /// Empty store when the file does not exist.
  static TargetStore load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    return read(in);
  }

  void write(std::ostream& out) const {
    out << "# mwalk target store\n# name,valueTarget,digits,coords...,method\n";
    for (const auto& name : objective_names())
      if (auto it = records_.find(name); it != records_.end())
        out << format_target(it->second) << '\n';
    for (const auto& [name, rec] : records_)
      if (std::find(objective_names().begin(), objective_names().end(), name) ==
          objective_names().end())
        out << format_target(rec) << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write target store '" + path + "'");
    write(out);
  }

  void upsert(TargetRecord rec) { records_[rec.name] = std::move(rec); }

  const TargetRecord* find(const std::string& name) const {
    auto it = records_.find(name);
    return it == records_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, TargetRecord> records_;
};

}  // namespace mwalk
