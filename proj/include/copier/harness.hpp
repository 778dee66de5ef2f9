#pragma once

// Experiment plumbing shared by the command-line tool and the acceptance
// runner: a flat key = value configuration, instance generation with a
// train/validation/test manifest, training and evaluation runs, and their CSV
// outputs.
//
// Run directory layout:
//   config.txt            every setting, one `key = value` per line
//   manifest.csv          id,file,split
//   instances/<id>.*      graph files (mvc) or start cells (grid)
//   history.csv           per iteration and view
//   evaluation.csv        per test instance, then a mean row
//   checkpoints/policy_{a,b}.txt

#include "copier/copier.hpp"
#include "copier/grid.hpp"
#include "copier/mvc.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace copier::harness {

class RunConfig {
 public:
  /// All keys with their default values.
  static RunConfig defaults();

  /// Overrides a known key; unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
  void read(std::istream& is);
  void load(const std::string& path);
  void write(std::ostream& os) const;

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class RunMode { copier, single_a, single_b };
const char* to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

struct ManifestEntry {
  std::string id;
  std::string file;  ///< relative to the run directory
  std::string split;  ///< train, validation or test
};

/// Split sizes for n instances: half train, a fifth validation, the rest test.
struct SplitSizes {
  int train = 0;
  int validation = 0;
  int test = 0;
};
SplitSizes split_sizes(int n);

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(std::istream& is);

grid::GridConfig grid_config(const RunConfig& cfg);
mvc::MvcOptions mvc_options(const RunConfig& cfg);
CopierConfig copier_config(const RunConfig& cfg);
/// Zero-mean small random initial policy for one view of the configured environment.
Policy initial_policy(const RunConfig& cfg, View view);

/// In-memory instance set with ids in manifest order.
struct InstanceSet {
  std::vector<ManifestEntry> manifest;
  std::vector<std::shared_ptr<const TwoViewInstance>> instances;
  std::vector<std::shared_ptr<const mvc::Graph>> graphs;  ///< mvc only, parallel to instances

  std::vector<std::shared_ptr<const TwoViewInstance>> split(const std::string& name) const;
  std::vector<std::shared_ptr<const mvc::Graph>> split_graphs(const std::string& name) const;
};

/// Creates the configured instances without touching the filesystem.
InstanceSet generate_instances(const RunConfig& cfg);

/// Writes config.txt, manifest.csv and the instance files under `dir`.
InstanceSet cmd_generate(const RunConfig& cfg, const std::string& dir);
/// Reads the manifest and instance files of a run directory.
InstanceSet load_instances(const RunConfig& cfg, const std::string& dir);

/// Optional warm start shared by both views: behaviour cloning on the optimal
/// actions of `bootstrap.labels` grid cells (grid only; a no-op otherwise).
std::pair<Policy, Policy> bootstrap_policies(const RunConfig& cfg, Policy a, Policy b);

struct TrainOutcome {
  RunMode mode = RunMode::copier;
  Policy policy_a;
  Policy policy_b;
  bool has_a = false;
  bool has_b = false;
  TrainHistory history;
};

TrainOutcome train(const RunConfig& cfg, const InstanceSet& set, RunMode mode);
void write_history_csv(std::ostream& os, const std::string& run_id, const TrainOutcome& outcome);

struct EvalRow {
  std::string instance;
  double reward_a = 0;
  double reward_b = 0;
  bool has_a = false;
  bool has_b = false;
  double final_reward = 0;
  View final_view = View::A;
  int solution_size = -1;  ///< cover size (mvc); -1 when none
  // Grid only.
  bool has_bound = false;
  double epsilon_a = 0;
  double max_b = 0;
  bool bound_valid = false;
};

/// Error rate of A's greedy policy against the optimal action sets, and the
/// disagreement bound between A and B, both over every step of `rollouts`
/// noisy greedy runs of A per instance.
struct GridBound {
  double epsilon_a = 0;
  DisagreementStats stats;
  BoundReport report;
};
GridBound grid_bound(const RunConfig& cfg, const std::vector<std::shared_ptr<const TwoViewInstance>>& instances,
                     const Policy& a, const Policy& b, int rollouts, std::uint64_t seed);

std::vector<EvalRow> evaluate(const RunConfig& cfg, const InstanceSet& set, const TrainOutcome& trained);
void write_evaluation_csv(std::ostream& os, const std::string& run_id, const std::vector<EvalRow>& rows);

/// Trains on the run directory's instances; writes history.csv and the checkpoints.
TrainOutcome cmd_train(const RunConfig& cfg, const std::string& dir, RunMode mode);
/// Loads the checkpoints and writes evaluation.csv for the test split.
std::vector<EvalRow> cmd_evaluate(const RunConfig& cfg, const std::string& dir, RunMode mode);

/// Names of required run-directory files that are missing (empty when complete).
std::vector<std::string> missing_outputs(const std::string& dir, RunMode mode);

/// Fixed-format number for CSV cells; NaN is written as an empty cell.
std::string format_number(double x);

}  // namespace copier::harness
