#include "ucarp/distance.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ucarp {

namespace {
std::string stranded_message(const std::vector<VertexId>& stranded) {
  std::vector<int> labels;
  labels.reserve(stranded.size());
  for (auto v : stranded) labels.push_back(v + 1);
  return fmt::format("vertices unreachable from the depot: {}", fmt::join(labels, ", "));
}
}  // namespace

UnreachableError::UnreachableError(std::vector<VertexId> stranded)
    : std::runtime_error(stranded_message(stranded)), stranded_(std::move(stranded)) {}

bool DistanceOracle::reachable(VertexId from, VertexId to) const {
  return dist(from, to) < std::numeric_limits<double>::infinity();
}

std::vector<VertexId> DistanceOracle::path(VertexId from, VertexId to) const {
  std::vector<VertexId> out{from};
  if (!reachable(from, to)) return {};
  while (from != to) {
    from = next_hop(from, to);
    out.push_back(from);
  }
  return out;
}

DistanceOracle build_distance_oracle(const Instance& instance, std::span<const EdgeId> excluded,
                                     std::span<const VertexId> needed) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  DistanceOracle oracle;
  const int n = instance.num_vertices();
  oracle.n_ = n;
  oracle.excluded_.assign(excluded.begin(), excluded.end());
  std::sort(oracle.excluded_.begin(), oracle.excluded_.end());
  oracle.excluded_.erase(std::unique(oracle.excluded_.begin(), oracle.excluded_.end()),
                         oracle.excluded_.end());

  const auto nn = static_cast<size_t>(n) * static_cast<size_t>(n);
  oracle.dist_.assign(nn, inf);
  oracle.next_.assign(nn, -1);
  for (VertexId v = 0; v < n; ++v) oracle.dist_[oracle.index(v, v)] = 0.0;

  std::vector<char> off(static_cast<size_t>(instance.num_edges()), 0);
  for (auto e : oracle.excluded_) off[static_cast<size_t>(e)] = 1;
  for (EdgeId id = 0; id < instance.num_edges(); ++id) {
    if (off[static_cast<size_t>(id)]) continue;
    const auto& e = instance.edge(id);
    oracle.dist_[oracle.index(e.u, e.v)] = e.traversal_cost;
    oracle.dist_[oracle.index(e.v, e.u)] = e.traversal_cost;
    oracle.next_[oracle.index(e.u, e.v)] = e.v;
    oracle.next_[oracle.index(e.v, e.u)] = e.u;
  }

  auto* d = oracle.dist_.data();
  auto* nx = oracle.next_.data();
  const auto stride = static_cast<size_t>(n);
  for (size_t k = 0; k < stride; ++k) {
    for (size_t i = 0; i < stride; ++i) {
      const double dik = d[i * stride + k];
      if (dik == inf) continue;
      const VertexId hop = nx[i * stride + k];
      for (size_t j = 0; j < stride; ++j) {
        const double via = dik + d[k * stride + j];
        if (via < d[i * stride + j]) {
          d[i * stride + j] = via;
          nx[i * stride + j] = hop;
        }
      }
    }
  }

  std::vector<VertexId> stranded;
  const VertexId depot = instance.depot();
  if (needed.empty()) {
    for (VertexId v = 0; v < n; ++v)
      if (!oracle.reachable(depot, v)) stranded.push_back(v);
  } else {
    for (auto v : needed)
      if (!oracle.reachable(depot, v)) stranded.push_back(v);
    std::sort(stranded.begin(), stranded.end());
    stranded.erase(std::unique(stranded.begin(), stranded.end()), stranded.end());
  }
  if (!stranded.empty()) throw UnreachableError(std::move(stranded));
  return oracle;
}

}  // namespace ucarp
