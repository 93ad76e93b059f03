#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mwalk/format.hpp"
#include "mwalk/objfun.hpp"
#include "mwalk/solvers.hpp"

namespace mwalk {

// Long format, one value per line:
//
//   # key = value           (configuration)
//   step,restart,agent,value
//   ...
//   # first_passage step=S agent=A      or      # censored step=S agent=A
//
// Agents are numbered from 1. Agent 0 carries the epoch's running best and is
// absent from the rows written right after (re)initialization; that absence
// is how a reader tells an initial state from a committed step.

inline void write_trace(std::ostream& out, const WalkTrace& trace) {
  for (const auto& [key, value] : trace.config) out << "# " << key << " = " << value << '\n';
  out << "step,restart,agent,value\n";
  for (const auto& row : trace.rows) {
    const std::string prefix = std::to_string(row.step) + ',' + std::to_string(row.restart) + ',';
    if (!row.initial) out << prefix << "0," << format_double(row.best) << '\n';
    for (std::size_t a = 0; a < row.values.size(); ++a)
      out << prefix << (a + 1) << ',' << format_double(row.values[a]) << '\n';
  }
  if (trace.first_passage)
    out << "# first_passage step=" << trace.first_passage->first
        << " agent=" << trace.first_passage->second << '\n';
  else
    out << "# censored step=" << trace.final_step << " agent=" << trace.final_agent << '\n';
}

namespace detail {

/// Reads `key=<integer>` out of a footer line.
inline std::uint64_t footer_field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw config_error("trace footer lacks '" + key + "'");
  const auto start = pos + key.size() + 1;
  const auto end = line.find(' ', start);
  return parse_integer<std::uint64_t>(line.substr(start, end - start));
}

}  // namespace detail

inline WalkTrace read_trace(std::istream& in) {
  WalkTrace trace;
  std::string line;
  bool header_seen = false;
  TraceRow* current = nullptr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# first_passage ", 0) == 0 || line.rfind("# censored ", 0) == 0) {
        trace.final_step = detail::footer_field(line, "step");
        trace.final_agent = detail::footer_field(line, "agent");
        if (line.rfind("# first_passage ", 0) == 0)
          trace.first_passage = std::make_pair(trace.final_step, trace.final_agent);
      } else if (!header_seen) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) trace.config.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
      }
      continue;
    }
    if (!header_seen) {
      if (line != "step,restart,agent,value") throw config_error("not a walk trace: " + line);
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) throw config_error("malformed trace row: " + line);
    const auto step = parse_integer<std::uint64_t>(f[0]);
    const auto restart = parse_integer<std::uint64_t>(f[1]);
    const auto agent = parse_integer<std::size_t>(f[2]);
    const double value = parse_double(f[3]);
    if (!current || current->step != step || current->restart != restart) {
      trace.rows.push_back({step, restart, true, {}, std::numeric_limits<double>::infinity()});
      current = &trace.rows.back();
    }
    if (agent == 0) {
      current->initial = false;
      current->best = value;
    } else {
      if (agent != current->values.size() + 1) throw config_error("trace agents out of order: " + line);
      current->values.push_back(value);
    }
  }
  if (!header_seen) throw config_error("empty walk trace");
  for (const auto& row : trace.rows) trace.marks = std::max(trace.marks, row.values.size());
  return trace;
}

/// Plot-ready table, one row per state: step,restart,best,a1..am. `best` is
/// empty on initial rows.
inline void write_trace_wide(std::ostream& out, const WalkTrace& trace) {
  for (const auto& [key, value] : trace.config) out << "# " << key << " = " << value << '\n';
  out << "step,restart,best";
  for (std::size_t a = 1; a <= trace.marks; ++a) out << ",a" << a;
  out << '\n';
  for (const auto& row : trace.rows) {
    out << row.step << ',' << row.restart << ',';
    if (!row.initial) out << format_double(row.best);
    for (double v : row.values) out << ',' << format_double(v);
    out << '\n';
  }
  if (trace.first_passage)
    out << "# first_passage step=" << trace.first_passage->first
        << " agent=" << trace.first_passage->second << '\n';
  else
    out << "# censored step=" << trace.final_step << " agent=" << trace.final_agent << '\n';
}

}  // namespace mwalk
