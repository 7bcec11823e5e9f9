#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucarp/distance.hpp"
#include "ucarp/instance.hpp"
#include "ucarp/policy.hpp"
#include "ucarp/stochastic.hpp"

namespace ucarp {

/// One serving direction of a task.
struct Arc {
  TaskId task = -1;
  VertexId entry = -1;
  VertexId exit = -1;
  bool operator==(const Arc&) const = default;
};

struct SimConfig {
  bool collab_route_failure = true;
  bool collab_refill = true;
  EstimatorMode estimator = EstimatorMode::Actual;
  /// Divide cost terminals by the longest shortest path and demand
  /// terminals by Q. Off by default.
  bool normalize_terminals = false;
  /// Keep an ordered trace of every triggered event in the Solution.
  bool record_log = false;
};

enum class EventKind { Refill, Serving };

struct Event {
  EventKind kind = EventKind::Refill;
  double time = 0.0;
  int vehicle = 0;
  std::optional<Arc> target;  // Serving only
};

struct VehicleState {
  VertexId node = 0;
  double q = 0.0;
  std::vector<VertexId> route;   // X
  std::vector<double> fractions; // Y, one per step of X
  std::optional<Arc> target;     // assigned task
  /// Non-collaborative route failure: the target is kept across the refill trip.
  bool resume_after_refill = false;
  bool finished = false;
  std::optional<Event> pending;  // at most one queued event per vehicle
};

/// Mutable simulation state. `sample` and `oracle` are non-owning views.
struct SimState {
  const InstanceSample* sample = nullptr;
  std::shared_ptr<const DistanceOracle> oracle;
  double clock = 0.0;
  std::vector<VehicleState> vehicles;
  std::vector<double> theta;         // remaining fraction per task
  std::vector<double> served;        // demand units collected per task
  std::vector<std::uint8_t> touched; // any service attempted
  std::vector<std::uint8_t> unserved;
  std::vector<std::uint8_t> unassigned;
  int num_unserved = 0;
  int num_unassigned = 0;
  std::vector<int> assigned_to;      // vehicle id or -1
  std::vector<EdgeId> blocked;       // inaccessible edges discovered so far

  const Instance& instance() const { return sample->base(); }
  void set_unserved(TaskId t, bool value);
  void set_unassigned(TaskId t, bool value);
};

struct Route {
  std::vector<VertexId> nodes;
  std::vector<double> fractions;
  bool operator==(const Route&) const = default;
};

struct LogRecord {
  double time = 0.0;
  int vehicle = 0;
  EventKind kind = EventKind::Refill;
  VertexId node = 0;
  std::string action;  // step, serve, partial, failure, select, reassign, refill, finish, detour
  TaskId task = -1;
  double fraction = 0.0;
  double q = 0.0;
  bool operator==(const LogRecord&) const = default;
};

struct Solution {
  std::vector<Route> routes;
  double total_cost = 0.0;
  std::vector<LogRecord> event_log;
  std::vector<EdgeId> blocked;
};

/// The sample cannot be completed: a task edge is inaccessible or edge
/// failures cut a task off from the depot.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Event-driven construction of one solution. Pending events are kept one
/// per vehicle; the earliest is triggered next, ties broken by vehicle id.
class Simulation {
 public:
  /// `base_oracle` may be supplied to share the all-pairs table of the
  /// instance across simulations; it must be built without exclusions.
  Simulation(const InstanceSample& sample, int num_vehicles, const PolicyExpr& policy,
             const SimConfig& config,
             std::shared_ptr<const DistanceOracle> base_oracle = nullptr);

  /// Trigger the next event. Returns false once no event is pending.
  bool step();
  Solution run();

  const SimState& state() const { return state_; }
  SimState& mutable_state() { return state_; }
  const SimConfig& config() const { return config_; }

  void trigger_refill(const Event& event);
  void trigger_serving(const Event& event);
  /// Arcs of unassigned tasks whose estimated remaining demand fits q(k).
  std::vector<Arc> candidate_filter(int vehicle) const;
  /// Estimated remaining demand of task t under the configured estimator.
  double estimated_remaining(TaskId t) const;
  /// argmin of the policy over `candidates`, ties by task id then entry.
  Arc select(int vehicle, const std::vector<Arc>& candidates) const;

  Solution solution() const;

 private:
  void schedule(int vehicle, EventKind kind, double time, std::optional<Arc> target);
  void decide(int vehicle, double time);
  void reassign(int vehicle);
  VertexId next_hop(VertexId from, VertexId to);
  void record(const Event& event, const char* action, TaskId task = -1, double fraction = 0.0);

  PolicyExpr policy_;
  SimConfig config_;
  DemandEstimator estimator_;
  SimState state_;
  std::vector<LogRecord> log_;
  double cost_scale_ = 1.0;
};

Solution construct_solution(const InstanceSample& sample, int num_vehicles,
                            const PolicyExpr& policy, const SimConfig& config,
                            std::shared_ptr<const DistanceOracle> base_oracle = nullptr);

/// Sum of realized traversal costs along every route plus, once per task,
/// serving cost minus realized traversal cost.
double total_cost(const Solution& solution, const InstanceSample& sample);

struct Violation {
  std::string constraint;  // depot, coverage, non_required, capacity, adjacency, fraction, shape
  int vehicle = -1;
  int position = -1;       // step index or -1
  std::string detail;
};

std::vector<Violation> validate_solution(const Solution& solution, const InstanceSample& sample,
                                         double capacity);

std::string event_log_json(const Solution& solution, const Instance& instance);

}  // namespace ucarp
