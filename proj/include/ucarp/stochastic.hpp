#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "ucarp/instance.hpp"

namespace ucarp {

/// Coefficients of variation used when drawing a sample. The default is the
/// 20%-of-mean rule; zero gives the means-only sample.
struct SamplingParams {
  double demand_cv = 0.2;
  double cost_cv = 0.2;
};

/// One realization of every random demand and traversal cost of an instance.
/// Holds a non-owning pointer to its Instance, which must outlive it.
class InstanceSample {
 public:
  static constexpr double kInaccessible = std::numeric_limits<double>::infinity();

  InstanceSample(const Instance& base, std::uint64_t seed, std::vector<double> actual_demand,
                 std::vector<double> traversal_cost);

  const Instance& base() const { return *base_; }
  std::uint64_t seed() const { return seed_; }

  double actual_demand(EdgeId e) const { return demand_[static_cast<size_t>(e)]; }
  /// kInaccessible when the draw was negative.
  double traversal_cost(EdgeId e) const { return cost_[static_cast<size_t>(e)]; }
  bool accessible(EdgeId e) const { return cost_[static_cast<size_t>(e)] != kInaccessible; }

  const std::vector<double>& actual_demands() const { return demand_; }
  const std::vector<double>& traversal_costs() const { return cost_; }

 private:
  const Instance* base_;
  std::uint64_t seed_;
  std::vector<double> demand_;
  std::vector<double> cost_;
};

/// Draws, from Rng(seed): first one Normal(d, cv*d) per task in edge file
/// order (negative -> 0), then one Normal(c, cv*c) per edge in file order
/// (negative -> inaccessible).
InstanceSample sample_instance(const Instance& instance, std::uint64_t seed,
                               const SamplingParams& params = {});
/// Every draw at its mean.
InstanceSample mean_sample(const Instance& instance);

/// True when every task edge is accessible and every task endpoint can reach
/// the depot over accessible edges, i.e. some policy can complete the sample.
bool is_servable(const InstanceSample& sample);

// ---------------------------------------------------------------------------
// remaining-demand estimation

enum class EstimatorMode { Actual, Truncate };

std::string_view to_string(EstimatorMode mode);
EstimatorMode estimator_from_string(std::string_view name);

/// Standard deviation assumed for a task with mean demand `mean`.
inline double demand_sigma(double mean) { return mean / 5.0; }

double normal_pdf(double x);
/// 1 - cdf(x), computed through erfc so the upper tail keeps its precision.
double normal_upper_tail(double x);

/// E[D | D > threshold] for D ~ Normal(mu, sigma).
double truncated_normal_mean(double mu, double sigma, double threshold);
/// E[D | D > served] - served, the expected unserved quantity after `served`
/// units have been collected. Falls back to sigma * (alpha + 1/alpha) for the
/// conditional excess when the upper tail underflows.
double truncated_remaining(double mu, double sigma, double served);

class DemandEstimator {
 public:
  explicit DemandEstimator(EstimatorMode mode = EstimatorMode::Actual) : mode_(mode) {}
  EstimatorMode mode() const { return mode_; }

  /// Estimated unserved demand of task edge `e`. Untouched tasks report their
  /// mean in both modes; only Actual mode ever reads the sample's demand.
  double remaining(const InstanceSample& sample, EdgeId e, double served, bool touched) const;

 private:
  EstimatorMode mode_;
};

}  // namespace ucarp
