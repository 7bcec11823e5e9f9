#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ucarp {

using VertexId = int;  // 0-based internally, 1-based in files and reports
using EdgeId = int;    // index into Instance::edges(), file order
using TaskId = int;    // index into Instance::tasks(), file order

enum class InstanceFormat { Gdb, Val, Egl };

std::string_view to_string(InstanceFormat format);
InstanceFormat format_from_string(std::string_view name);
/// Guess the family from a file name ("gdb1.dat", "egl-s1-A.dat", ...).
std::optional<InstanceFormat> infer_format(std::string_view file_name);

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double traversal_cost = 0.0;  // mean deadheading cost
  double serving_cost = 0.0;    // 0 for non-required edges
  double demand = 0.0;          // mean demand, 0 for non-required edges

  bool is_task() const { return demand > 0.0; }
  VertexId other(VertexId w) const { return w == u ? v : u; }
  bool operator==(const Edge&) const = default;
};

class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Deterministic skeleton of a UCARP problem: an undirected connected graph,
/// the depot, vehicle capacity and the mean demand/cost of every edge.
/// Immutable once built.
class Instance {
 public:
  Instance(std::string name, int num_vertices, VertexId depot,
           std::vector<Edge> edges, double capacity, int declared_vehicles = 0);

  const std::string& name() const { return name_; }
  int num_vertices() const { return num_vertices_; }
  VertexId depot() const { return depot_; }
  double capacity() const { return capacity_; }
  /// VEHICULOS field of the source file; 0 when unknown.
  int declared_vehicles() const { return declared_vehicles_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<size_t>(e)]; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<EdgeId>& tasks() const { return tasks_; }
  int num_tasks() const { return static_cast<int>(tasks_.size()); }
  EdgeId task_edge(TaskId t) const { return tasks_[static_cast<size_t>(t)]; }
  const Edge& task(TaskId t) const { return edge(task_edge(t)); }
  /// -1 for non-required edges.
  TaskId task_of_edge(EdgeId e) const { return task_of_edge_[static_cast<size_t>(e)]; }

  /// -1 when u and v are not adjacent.
  EdgeId edge_between(VertexId u, VertexId v) const {
    return adjacency_[static_cast<size_t>(u) * static_cast<size_t>(num_vertices_) +
                      static_cast<size_t>(v)];
  }

  double total_demand() const;

  bool operator==(const Instance& other) const;

 private:
  std::string name_;
  int num_vertices_;
  VertexId depot_;
  std::vector<Edge> edges_;
  double capacity_;
  int declared_vehicles_;
  std::vector<EdgeId> tasks_;
  std::vector<TaskId> task_of_edge_;
  std::vector<EdgeId> adjacency_;
};

/// Parse the classic DAT layout shared by the gdb, val and egl families.
/// gdb and val files list every edge as required; egl files add a
/// LISTA_ARISTAS_NOREQ block of edges without demand.
Instance parse_instance(std::string_view text, InstanceFormat format);
Instance load_instance(const std::filesystem::path& path,
                       std::optional<InstanceFormat> format = std::nullopt);
std::string serialize_instance(const Instance& instance, InstanceFormat format);

/// ceil(total mean demand / Q).
int min_vehicles(const Instance& instance);

}  // namespace ucarp
