// Locate the wild3 target with the oracle, then race a restarted multiwalk
// against restarted simpleDE over 20 seeds.
#include <iostream>

#include "mwalk/fpt.hpp"
#include "mwalk/oracle.hpp"

int main() {
  using namespace mwalk;

  const auto base = make_objective("wild3");
  const auto target = compute_target(base, 9);
  std::cout << "target: " << format_target(target) << '\n';

  ExperimentPlan plan;
  plan.spec = apply_target(base, target);
  plan.sample_size = 20;
  for (const char* name : {"MWR30", "DEsFR1"}) {
    SolverConfig cfg;
    cfg.steps_limit = 2000;
    plan.solvers.push_back(parse_solver(name, cfg));
  }

  const auto results = run_experiment(plan);
  const auto summaries = summarize(plan, results);
  write_summary_csv(std::cout, plan, summaries);
  std::cout << format_comparison(compare(summaries[1], summaries[0])) << '\n';
}
