#include "ucarp/stochastic.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ucarp/distance.hpp"
#include "ucarp/rng.hpp"

namespace ucarp {

InstanceSample::InstanceSample(const Instance& base, std::uint64_t seed,
                               std::vector<double> actual_demand,
                               std::vector<double> traversal_cost)
    : base_(&base), seed_(seed), demand_(std::move(actual_demand)),
      cost_(std::move(traversal_cost)) {
  const auto n = static_cast<size_t>(base.num_edges());
  if (demand_.size() != n || cost_.size() != n)
    throw std::invalid_argument("sample vectors must have one entry per edge");
  for (size_t e = 0; e < n; ++e) {
    if (!base.edges()[e].is_task() && demand_[e] != 0.0)
      throw std::invalid_argument("non-required edges carry no demand");
    if (demand_[e] < 0.0) throw std::invalid_argument("sampled demand must be non-negative");
    if (!(cost_[e] > 0.0)) throw std::invalid_argument("sampled cost must be positive");
  }
}

InstanceSample sample_instance(const Instance& instance, std::uint64_t seed,
                               const SamplingParams& params) {
  Rng rng(seed);
  const auto n = static_cast<size_t>(instance.num_edges());
  std::vector<double> demand(n, 0.0), cost(n, 0.0);
  for (size_t e = 0; e < n; ++e) {
    const auto& edge = instance.edges()[e];
    if (!edge.is_task()) continue;
    demand[e] = std::max(0.0, rng.normal(edge.demand, params.demand_cv * edge.demand));
  }
  for (size_t e = 0; e < n; ++e) {
    const auto& edge = instance.edges()[e];
    const double draw = rng.normal(edge.traversal_cost, params.cost_cv * edge.traversal_cost);
    // a zero draw cannot be traversed either
    cost[e] = draw > 0.0 ? draw : InstanceSample::kInaccessible;
  }
  return InstanceSample(instance, seed, std::move(demand), std::move(cost));
}

InstanceSample mean_sample(const Instance& instance) {
  std::vector<double> demand, cost;
  for (const auto& e : instance.edges()) {
    demand.push_back(e.demand);
    cost.push_back(e.traversal_cost);
  }
  return InstanceSample(instance, 0, std::move(demand), std::move(cost));
}

bool is_servable(const InstanceSample& sample) {
  const auto& instance = sample.base();
  std::vector<EdgeId> blocked;
  for (EdgeId e = 0; e < instance.num_edges(); ++e) {
    if (sample.accessible(e)) continue;
    if (instance.edge(e).is_task()) return false;
    blocked.push_back(e);
  }
  if (blocked.empty()) return true;
  std::vector<VertexId> needed;
  for (auto e : instance.tasks()) {
    needed.push_back(instance.edge(e).u);
    needed.push_back(instance.edge(e).v);
  }
  try {
    build_distance_oracle(instance, blocked, needed);
  } catch (const UnreachableError&) {
    return false;
  }
  return true;
}

std::string_view to_string(EstimatorMode mode) {
  return mode == EstimatorMode::Actual ? "actual" : "truncate";
}

EstimatorMode estimator_from_string(std::string_view name) {
  if (name == "actual" || name == "Actual") return EstimatorMode::Actual;
  if (name == "truncate" || name == "Truncate") return EstimatorMode::Truncate;
  throw std::invalid_argument(fmt::format("unknown estimator '{}'", name));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {
// E[D | D > threshold] - threshold
double conditional_excess(double mu, double sigma, double threshold) {
  const double alpha = (threshold - mu) / sigma;
  const double tail = normal_upper_tail(alpha);
  const double pdf = normal_pdf(alpha);
  if (tail > 0.0 && pdf > 0.0) {
    const double excess = sigma * (pdf / tail - alpha);
    if (std::isfinite(excess) && excess > 0.0) return excess;
  }
  return sigma * (alpha + 1.0 / alpha) - (threshold - mu);
}
}  // namespace

double truncated_normal_mean(double mu, double sigma, double threshold) {
  return threshold + conditional_excess(mu, sigma, threshold);
}

double truncated_remaining(double mu, double sigma, double served) {
  return conditional_excess(mu, sigma, served);
}

double DemandEstimator::remaining(const InstanceSample& sample, EdgeId e, double served,
                                  bool touched) const {
  const double mean = sample.base().edge(e).demand;
  if (!touched) return mean;
  if (mode_ == EstimatorMode::Actual) return std::max(0.0, sample.actual_demand(e) - served);
  return truncated_remaining(mean, demand_sigma(mean), served);
}

}  // namespace ucarp
