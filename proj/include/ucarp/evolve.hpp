#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ucarp/distance.hpp"
#include "ucarp/instance.hpp"
#include "ucarp/policy.hpp"
#include "ucarp/rng.hpp"
#include "ucarp/simulator.hpp"
#include "ucarp/stochastic.hpp"

namespace ucarp {

struct GpConfig {
  int population_size = 1024;
  int generations = 51;
  int tournament_size = 7;
  double crossover_rate = 0.8;
  double mutation_rate = 0.15;
  double reproduction_rate = 0.05;
  int max_depth = 8;
  int training_samples = 5;
  int init_min_depth = 2;
  int init_max_depth = 6;
  int mutation_subtree_depth = 5;
  int max_retries = 10;
  /// Probability that a crossover or mutation point is an internal node;
  /// a negative value picks every node with equal probability.
  double internal_node_probability = -1.0;
  SimConfig sim;
  SamplingParams sampling;
  std::uint64_t seed = 1;
  int num_vehicles = 0;  // 0 -> min_vehicles(instance)
  int threads = 0;       // 0 -> default_threads()

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct EvaluatedPolicy {
  PolicyExpr policy;
  double fitness = 0.0;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double worst = 0.0;
  std::string best_policy;
  double seconds = 0.0;
};

struct EvolveResult {
  EvaluatedPolicy best;
  std::vector<GenerationStats> log;
};

/// UCARP_THREADS if set, else the hardware concurrency (at least 1).
int default_threads();

/// Run `body(i)` for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body);

/// `count` servable sample seeds derived from (master, generation). Seeds
/// whose sample cannot be completed by any policy are skipped.
std::vector<std::uint64_t> training_seeds(const Instance& instance, std::uint64_t master,
                                          int generation, int count,
                                          const SamplingParams& sampling = {});

/// Samples drawn once and shared by every evaluation of a generation.
class SampleSet {
 public:
  SampleSet(const Instance& instance, std::span<const std::uint64_t> seeds,
            const SamplingParams& sampling = {});
  const std::vector<InstanceSample>& samples() const { return samples_; }

 private:
  std::vector<InstanceSample> samples_;
};

/// Mean total cost of `policy` over the samples. Simulation errors propagate.
double fitness(const PolicyExpr& policy, const SampleSet& samples, int num_vehicles,
               const SimConfig& config, std::shared_ptr<const DistanceOracle> oracle = nullptr);
double fitness(const PolicyExpr& policy, const Instance& instance,
               std::span<const std::uint64_t> seeds, int num_vehicles, const SimConfig& config,
               const SamplingParams& sampling = {});

// ---------------------------------------------------------------------------
// tree operators

/// Random tree by the full (every branch to `depth`) or grow method.
PolicyExpr random_tree(Rng& rng, int depth, bool full);
/// Ramped half-and-half over depths [min_depth, max_depth], avoiding
/// duplicates where a bounded number of retries allows.
std::vector<PolicyExpr> ramped_half_and_half(Rng& rng, int count, int min_depth, int max_depth);

/// Swap the subtree of `a` at `ia` with the subtree of `b` at `ib`.
std::pair<PolicyExpr, PolicyExpr> crossover_at(const PolicyExpr& a, size_t ia,
                                               const PolicyExpr& b, size_t ib);
/// Subtree crossover with uniform point selection. A child over
/// `max_depth` is redrawn; after `retries` failures that child is a copy of
/// its parent.
std::pair<PolicyExpr, PolicyExpr> crossover(const PolicyExpr& a, const PolicyExpr& b, Rng& rng,
                                            int max_depth, int retries = 10,
                                            double internal_probability = -1.0);
/// A node index of `tree`: uniform when `internal_probability` < 0,
/// otherwise an internal node with that probability (when one exists).
size_t pick_node(const PolicyExpr& tree, Rng& rng, double internal_probability = -1.0);
/// Replace the subtree at `index` with `replacement`.
PolicyExpr replace_subtree(const PolicyExpr& tree, size_t index, const PolicyExpr& replacement);
/// Subtree mutation: a uniformly chosen node is replaced by a grown tree of
/// depth at most `subtree_depth`.
PolicyExpr mutate(const PolicyExpr& parent, Rng& rng, int max_depth, int subtree_depth = 5,
                  int retries = 10, double internal_probability = -1.0);
inline PolicyExpr reproduce(const PolicyExpr& parent) { return parent; }

/// Index of the minimum-fitness individual among `size` drawn uniformly with
/// replacement; ties go to the earliest draw.
size_t tournament(std::span<const double> fitness, int size, Rng& rng);

using GenerationCallback = std::function<void(const GenerationStats&)>;

EvolveResult evolve(const Instance& instance, const GpConfig& config,
                    const GenerationCallback& on_generation = {});

std::string generation_log_csv(const std::vector<GenerationStats>& log);

}  // namespace ucarp
