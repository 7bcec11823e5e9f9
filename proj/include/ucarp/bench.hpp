#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucarp/evolve.hpp"
#include "ucarp/instance.hpp"
#include "ucarp/policy.hpp"
#include "ucarp/simulator.hpp"
#include "ucarp/stats.hpp"

namespace ucarp {

/// GPHH, GPHH-C, GPHH-C_RouteFailure, GPHH-C_Refill, PS1..PS5 (no
/// collaboration) and PS1-C..PS5-C (both collaborations).
struct Variant {
  std::string name;
  std::optional<ManualPolicy> manual;  // empty for GP variants
  bool collab_route_failure = false;
  bool collab_refill = false;

  bool is_gp() const { return !manual.has_value(); }
  SimConfig sim_config(EstimatorMode estimator) const;
};

/// Throws std::invalid_argument for names outside the closed list.
Variant parse_variant(std::string_view name);
std::vector<std::string> variant_names();

struct TestResult {
  double mean = 0.0;
  std::vector<std::uint64_t> seeds;  // seeds actually used
  std::vector<double> costs;         // one per used seed
  int excluded = 0;                  // unservable samples skipped
};

/// Mean total cost over seeds seed_base + i, i in [0, count). Samples that
/// no policy can complete are excluded and counted.
TestResult test_performance(const PolicyExpr& policy, const Instance& instance,
                            const SimConfig& config, std::uint64_t seed_base, int count = 500,
                            int num_vehicles = 0, int threads = 1,
                            const SamplingParams& sampling = {});

struct ExperimentSpec {
  std::vector<std::filesystem::path> instances;
  std::vector<std::string> variants;
  int runs = 30;
  EstimatorMode estimator = EstimatorMode::Actual;
  std::uint64_t test_seed_base = 1000000;
  int test_samples = 500;
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 1;
  GpConfig gp;  // sim, seed and threads fields are overridden per cell
  int threads = 0;

  void validate() const;
};

/// JSON document; relative instance paths resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& json_text,
                                     const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct RunRecord {
  std::string instance;
  std::string variant;
  int run = 0;
  std::uint64_t seed = 0;
  double test_mean = 0.0;
  int test_used = 0;
  int test_excluded = 0;
  double train_fitness = 0.0;  // final-generation fitness, GP only
  std::string policy;
  std::string error;           // non-empty when the cell failed
  std::vector<double> test_costs;
};

struct SummaryRow {
  std::string instance;
  std::string variant;
  int runs = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct Comparison {
  std::string instance;
  std::string a;
  std::string b;
  double p_value = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  Verdict verdict = Verdict::Draw;  // of a against b
};

struct TestReport {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
  std::vector<Comparison> comparisons;
};

/// Compare two variants on one instance. Run means are compared when both
/// have at least two runs; otherwise the per-seed costs (averaged over runs)
/// of the shared test samples are.
Comparison compare_variants(const std::string& instance, const std::string& a,
                            const std::vector<const RunRecord*>& runs_a, const std::string& b,
                            const std::vector<const RunRecord*>& runs_b);

using ProgressCallback = std::function<void(const std::string&)>;

/// Train or evaluate every (instance, variant, run) cell, then write
/// runs.csv, summary.csv, summary.txt, wdl.csv and wdl_matrix.csv to the
/// output directory. Per-run policies and generation logs go in
/// policies/ and logs/.
TestReport run_experiment(const ExperimentSpec& spec, const ProgressCallback& progress = {});

std::string runs_csv(const TestReport& report);
std::string summary_csv(const TestReport& report);
std::string summary_text(const TestReport& report, const ExperimentSpec& spec);
std::string wdl_csv(const TestReport& report);
std::string wdl_matrix_csv(const TestReport& report, const std::vector<std::string>& variants);

}  // namespace ucarp
