#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/space.hpp"
#include "heatlab/types.hpp"

namespace heatlab {

/// One executed check inside a scenario run.  Checks marked `asserted`
/// contribute to the exit status; the rest are reported measurements.
struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::pass;
  bool asserted = true;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

struct ScenarioReport {
  std::string scenario;
  unsigned seed = 0;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
};

struct Scenario {
  std::string name;
  std::string summary;
  std::function<ScenarioReport(const std::filesystem::path& out_dir, unsigned seed)> run;
};

/// Built-in gallery; order is stable and part of the CLI contract.
const std::vector<Scenario>& scenario_catalog();
const Scenario* find_scenario(const std::string& name);

/// Executes a catalog scenario by name, or a JSON config referencing one
/// ({"schema": "heatlab-scenario/1", "scenario": name, "seed": n}).  CSV
/// artifacts and report.json land in out_dir/<name>/.  Unknown names and
/// malformed configs throw invalid-input (CLI exit 2).
ScenarioReport execute_scenario(const std::string& name_or_config,
                                const std::filesystem::path& out_dir, unsigned seed = 1);

/// execute_scenario + exit-status folding: 0 when all asserted checks pass,
/// 1 otherwise.
int run_scenario(const std::string& name_or_config, const std::filesystem::path& out_dir,
                 unsigned seed = 1);

std::string report_json(const ScenarioReport& report);
std::string catalog_json();

/// Seeded generator of connected test spaces: a random spanning tree plus
/// extra edges, mu in [0.5, 2], weights in [w_max/4, w_max]; each vertex
/// gets killing in [0.05, 0.5] with probability killing_prob.
DirichletSpace random_connected_space(unsigned seed, int n, double extra_edge_prob = 0.15,
                                      double killing_prob = 0.0, double w_max = 2.0);

/// Thread cap from LAB_THREADS (default: hardware concurrency, at least 1).
int lab_thread_count();

/// Runs fn(i) for i in [0, n) on up to lab_thread_count() threads.  Callers
/// must write results into preallocated slots; any exception is rethrown on
/// the calling thread after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace heatlab
