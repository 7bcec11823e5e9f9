#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucarp/instance.hpp"
#include "ucarp/policy.hpp"
#include "ucarp/rng.hpp"
#include "ucarp/simulator.hpp"
#include "ucarp/stochastic.hpp"

#ifndef UCARP_SOURCE_DIR
#error "UCARP_SOURCE_DIR must point at the repository root"
#endif

namespace testing {

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(UCARP_SOURCE_DIR) / relative;
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

/// A hand-traced scenario from tests/fixtures. Vertices, tasks and vehicles
/// are 1-based in the files.
struct Fixture {
  nlohmann::json doc;
  std::unique_ptr<ucarp::Instance> instance;
  std::unique_ptr<ucarp::InstanceSample> sample;

  ucarp::SimConfig config() const {
    ucarp::SimConfig c;
    c.collab_route_failure = doc.value("collab_route_failure", true);
    c.collab_refill = doc.value("collab_refill", true);
    c.record_log = true;
    return c;
  }
  int vehicles() const { return doc.at("vehicles").get<int>(); }
  ucarp::PolicyExpr policy() const { return ucarp::parse_policy(doc.at("policy").get<std::string>()); }
};

inline Fixture load_fixture(const std::string& name) {
  Fixture f;
  f.doc = read_json(source_path("tests/fixtures/" + name + ".json"));
  std::vector<ucarp::Edge> edges;
  for (const auto& e : f.doc.at("edges")) {
    ucarp::Edge edge;
    edge.u = e[0].get<int>() - 1;
    edge.v = e[1].get<int>() - 1;
    edge.traversal_cost = e[2].get<double>();
    edge.serving_cost = e[3].get<double>();
    edge.demand = e[4].get<double>();
    edges.push_back(edge);
  }
  f.instance = std::make_unique<ucarp::Instance>(
      f.doc.at("name").get<std::string>(), f.doc.at("vertices").get<int>(),
      f.doc.at("depot").get<int>() - 1, edges, f.doc.at("capacity").get<double>());
  f.sample = std::make_unique<ucarp::InstanceSample>(
      *f.instance, 0, f.doc.at("actual_demand").get<std::vector<double>>(),
      f.doc.at("actual_cost").get<std::vector<double>>());
  return f;
}

/// Small connected random instance: a random spanning tree plus extra edges,
/// integer costs in [1, 20], a random subset of required edges.
inline ucarp::Instance random_instance(std::uint64_t seed, int min_vertices = 3, int max_vertices = 8,
                                       double required_share = 0.7) {
  ucarp::Rng rng(seed);
  const int n = min_vertices + static_cast<int>(rng.uniform_int(
                                   static_cast<std::uint64_t>(max_vertices - min_vertices + 1)));
  std::vector<ucarp::Edge> edges;
  std::vector<std::vector<bool>> present(static_cast<size_t>(n), std::vector<bool>(static_cast<size_t>(n)));
  auto add = [&](int u, int v) {
    if (u == v || present[static_cast<size_t>(u)][static_cast<size_t>(v)]) return;
    present[static_cast<size_t>(u)][static_cast<size_t>(v)] = present[static_cast<size_t>(v)][static_cast<size_t>(u)] = true;
    ucarp::Edge e;
    e.u = u;
    e.v = v;
    e.traversal_cost = 1.0 + static_cast<double>(rng.uniform_int(20));
    edges.push_back(e);
  };
  for (int v = 1; v < n; ++v) add(v, static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(v))));
  const int extra = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n + 1)));
  for (int i = 0; i < extra; ++i)
    add(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))),
        static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))));
  const double capacity = 10.0;
  bool any_task = false;
  for (auto& e : edges) {
    if (rng.uniform01() < required_share) {
      e.demand = 1.0 + static_cast<double>(rng.uniform_int(6));
      e.serving_cost = e.traversal_cost;
      any_task = true;
    }
  }
  if (!any_task) {
    edges.front().demand = 3.0;
    edges.front().serving_cost = edges.front().traversal_cost;
  }
  return ucarp::Instance("random" + std::to_string(seed), n,
                         static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))), edges,
                         capacity);
}

/// Shortest path cost by exhaustive enumeration of simple paths.
inline double brute_force_distance(const ucarp::Instance& inst, int from, int to,
                                   const std::vector<int>& excluded = {}) {
  if (from == to) return 0.0;
  const int n = inst.num_vertices();
  std::vector<bool> visited(static_cast<size_t>(n), false);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, double)> walk = [&](int v, double cost) {
    if (v == to) {
      best = std::min(best, cost);
      return;
    }
    visited[static_cast<size_t>(v)] = true;
    for (int w = 0; w < n; ++w) {
      const int e = inst.edge_between(v, w);
      if (e < 0 || visited[static_cast<size_t>(w)]) continue;
      if (std::find(excluded.begin(), excluded.end(), e) != excluded.end()) continue;
      walk(w, cost + inst.edge(e).traversal_cost);
    }
    visited[static_cast<size_t>(v)] = false;
  };
  walk(from, 0.0);
  return best;
}

/// E[D | D > t] for D ~ Normal(mu, sigma) by composite Simpson integration of
/// x * pdf and pdf over [t, mu + 12 sigma].
inline double integrated_truncated_mean(double mu, double sigma, double t) {
  const double hi = std::max(t, mu) + 12.0 * sigma;
  const int n = 200000;
  const double h = (hi - t) / n;
  auto pdf = [&](double x) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z);
  };
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = t + h * i;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double p = pdf(x);
    num += w * x * p;
    den += w * p;
  }
  return num / den;
}

/// Exact two-sided rank-sum p-value by enumerating every assignment of the
/// pooled midranks to the first sample.
inline double enumerated_rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const size_t n = pooled.size(), na = a.size();
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) ++below;
      if (pooled[j] == pooled[i]) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  bool all_equal = true;
  for (double x : pooled) all_equal = all_equal && x == pooled[0];
  if (all_equal) return 1.0;
  double observed = 0.0;
  for (size_t i = 0; i < na; ++i) observed += ranks[i];
  long total = 0, le = 0, ge = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<size_t>(__builtin_popcount(mask)) != na) continue;
    double s = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s += ranks[i];
    ++total;
    if (s <= observed + 1e-9) ++le;
    if (s >= observed - 1e-9) ++ge;
  }
  return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
}

/// A random policy tree of depth at most `depth` over the full terminal set.
inline ucarp::PolicyExpr random_policy(ucarp::Rng& rng, int depth) {
  static constexpr ucarp::Op kOps[] = {ucarp::Op::Add, ucarp::Op::Sub, ucarp::Op::Mul,
                                       ucarp::Op::Div, ucarp::Op::Max, ucarp::Op::Min};
  std::function<void(std::vector<ucarp::Node>&, int)> grow = [&](std::vector<ucarp::Node>& out,
                                                                 int level) {
    if (level >= depth || rng.uniform01() < 0.35) {
      const auto pick = rng.uniform_int(ucarp::kNumTerminals + 1);
      out.push_back(pick == ucarp::kNumTerminals
                        ? ucarp::Node::constant(rng.uniform(-1.0, 1.0))
                        : ucarp::Node::var(ucarp::kAllTerminals[pick]));
      return;
    }
    out.push_back(ucarp::Node::function(kOps[rng.uniform_int(6)]));
    grow(out, level + 1);
    grow(out, level + 1);
  };
  std::vector<ucarp::Node> nodes;
  grow(nodes, 1);
  return ucarp::PolicyExpr(std::move(nodes));
}

}  // namespace testing
