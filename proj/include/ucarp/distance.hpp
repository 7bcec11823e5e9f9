#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ucarp/instance.hpp"

namespace ucarp {

/// Raised when excluded edges cut needed vertices off from the depot.
class UnreachableError : public std::runtime_error {
 public:
  explicit UnreachableError(std::vector<VertexId> stranded);
  const std::vector<VertexId>& stranded() const { return stranded_; }

 private:
  std::vector<VertexId> stranded_;
};

/// All-pairs shortest paths over mean traversal costs with a set of edges
/// removed. Immutable after construction.
class DistanceOracle {
 public:
  DistanceOracle() = default;

  double dist(VertexId from, VertexId to) const { return dist_[index(from, to)]; }
  bool reachable(VertexId from, VertexId to) const;
  /// First vertex after `from` on a shortest path to `to`; -1 when
  /// `from == to` or `to` is unreachable.
  VertexId next_hop(VertexId from, VertexId to) const { return next_[index(from, to)]; }
  std::vector<VertexId> path(VertexId from, VertexId to) const;

  int num_vertices() const { return n_; }
  const std::vector<EdgeId>& excluded() const { return excluded_; }

  friend DistanceOracle build_distance_oracle(const Instance&, std::span<const EdgeId>,
                                              std::span<const VertexId>);

 private:
  size_t index(VertexId a, VertexId b) const {
    return static_cast<size_t>(a) * static_cast<size_t>(n_) + static_cast<size_t>(b);
  }

  int n_ = 0;
  std::vector<double> dist_;
  std::vector<VertexId> next_;
  std::vector<EdgeId> excluded_;
};

/// Floyd-Warshall over the non-excluded edges. `needed` lists the vertices
/// that must stay reachable from the depot; an empty span means all of them.
DistanceOracle build_distance_oracle(const Instance& instance,
                                     std::span<const EdgeId> excluded = {},
                                     std::span<const VertexId> needed = {});

}  // namespace ucarp
