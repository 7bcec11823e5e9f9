#include "ucarp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ucarp/features.hpp"

namespace ucarp {

namespace {
// A remaining fraction this small after a partial service counts as done.
constexpr double kThetaEpsilon = 1e-12;
}  // namespace

void SimState::set_unserved(TaskId t, bool value) {
  auto& flag = unserved[static_cast<size_t>(t)];
  if (static_cast<bool>(flag) == value) return;
  flag = value;
  num_unserved += value ? 1 : -1;
}

void SimState::set_unassigned(TaskId t, bool value) {
  auto& flag = unassigned[static_cast<size_t>(t)];
  if (static_cast<bool>(flag) == value) return;
  flag = value;
  num_unassigned += value ? 1 : -1;
}

Simulation::Simulation(const InstanceSample& sample, int num_vehicles, const PolicyExpr& policy,
                       const SimConfig& config, std::shared_ptr<const DistanceOracle> base_oracle)
    : policy_(policy), config_(config), estimator_(config.estimator) {
  if (num_vehicles < 1) throw std::invalid_argument("at least one vehicle is required");
  const Instance& inst = sample.base();
  for (EdgeId e : inst.tasks())
    if (!sample.accessible(e))
      throw SimulationError(fmt::format("task edge ({}, {}) is inaccessible in sample {}",
                                        inst.edge(e).u + 1, inst.edge(e).v + 1, sample.seed()));

  state_.sample = &sample;
  state_.oracle = base_oracle ? std::move(base_oracle)
                              : std::make_shared<const DistanceOracle>(build_distance_oracle(inst));
  const auto n_tasks = static_cast<size_t>(inst.num_tasks());
  state_.theta.assign(n_tasks, 1.0);
  state_.served.assign(n_tasks, 0.0);
  state_.touched.assign(n_tasks, 0);
  state_.unserved.assign(n_tasks, 1);
  state_.unassigned.assign(n_tasks, 1);
  state_.num_unserved = state_.num_unassigned = inst.num_tasks();
  state_.assigned_to.assign(n_tasks, -1);
  state_.vehicles.resize(static_cast<size_t>(num_vehicles));
  for (auto& veh : state_.vehicles) {
    veh.node = inst.depot();
    veh.q = inst.capacity();
    veh.route = {inst.depot()};
  }

  if (config_.normalize_terminals) {
    double longest = 0.0;
    for (VertexId a = 0; a < inst.num_vertices(); ++a)
      for (VertexId b = 0; b < inst.num_vertices(); ++b) {
        const double d = state_.oracle->dist(a, b);
        if (std::isfinite(d)) longest = std::max(longest, d);
      }
    cost_scale_ = longest > 0.0 ? longest : 1.0;
  }

  for (int k = 0; k < num_vehicles; ++k) schedule(k, EventKind::Refill, 0.0, std::nullopt);
}

void Simulation::schedule(int vehicle, EventKind kind, double time, std::optional<Arc> target) {
  state_.vehicles[static_cast<size_t>(vehicle)].pending = Event{kind, time, vehicle, target};
}

void Simulation::record(const Event& event, const char* action, TaskId task, double fraction) {
  if (!config_.record_log) return;
  const auto& veh = state_.vehicles[static_cast<size_t>(event.vehicle)];
  log_.push_back({state_.clock, event.vehicle, event.kind, veh.node, action, task, fraction, veh.q});
}

bool Simulation::step() {
  int next = -1;
  for (size_t k = 0; k < state_.vehicles.size(); ++k) {
    const auto& p = state_.vehicles[k].pending;
    if (!p) continue;
    if (next < 0 || p->time < state_.vehicles[static_cast<size_t>(next)].pending->time)
      next = static_cast<int>(k);
  }
  if (next < 0) return false;
  auto& veh = state_.vehicles[static_cast<size_t>(next)];
  const Event event = *veh.pending;
  veh.pending.reset();
  state_.clock = event.time;
  if (event.kind == EventKind::Refill)
    trigger_refill(event);
  else
    trigger_serving(event);
  return true;
}

Solution Simulation::run() {
  const Instance& inst = state_.instance();
  // Each event moves a vehicle or makes a decision; this bound is far above
  // anything a terminating run needs.
  const long limit = 1000L * (inst.num_edges() + 1) * static_cast<long>(state_.vehicles.size() + 1) *
                     (inst.num_tasks() + 1);
  long count = 0;
  while (step())
    if (++count > limit) throw std::logic_error("simulation did not terminate");
  if (state_.num_unserved != 0) throw std::logic_error("simulation ended with unserved tasks");
  return solution();
}

double Simulation::estimated_remaining(TaskId t) const {
  const auto ti = static_cast<size_t>(t);
  return estimator_.remaining(*state_.sample, state_.instance().task_edge(t), state_.served[ti],
                              state_.touched[ti] != 0);
}

std::vector<Arc> Simulation::candidate_filter(int vehicle) const {
  const Instance& inst = state_.instance();
  const double q = state_.vehicles[static_cast<size_t>(vehicle)].q;
  std::vector<Arc> out;
  for (TaskId t = 0; t < inst.num_tasks(); ++t) {
    if (!state_.unassigned[static_cast<size_t>(t)]) continue;
    if (estimated_remaining(t) > q) continue;
    const Edge& e = inst.task(t);
    const VertexId lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
    out.push_back({t, lo, hi});
    out.push_back({t, hi, lo});
  }
  return out;
}

Arc Simulation::select(int vehicle, const std::vector<Arc>& candidates) const {
  const TerminalMask mask = policy_.used_terminals();
  const FeatureScale scale =
      config_.normalize_terminals ? FeatureScale{cost_scale_, state_.instance().capacity()}
                                  : FeatureScale{};
  size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < candidates.size(); ++i) {
    const double value =
        policy_.evaluate(extract_features(state_, estimator_, vehicle, candidates[i], mask, scale));
    if (i == 0 || value < best_value) {
      best = i;
      best_value = value;
    }
  }
  return candidates[best];
}

VertexId Simulation::next_hop(VertexId from, VertexId to) {
  const Instance& inst = state_.instance();
  const InstanceSample& sample = *state_.sample;
  for (;;) {
    const VertexId hop = state_.oracle->next_hop(from, to);
    if (hop < 0)
      throw SimulationError(fmt::format("vertex {} cannot reach vertex {} in sample {}", from + 1,
                                        to + 1, sample.seed()));
    const EdgeId e = inst.edge_between(from, hop);
    if (sample.accessible(e)) return hop;

    // edge failure: the leg is replanned around every edge known to be closed
    state_.blocked.push_back(e);
    if (config_.record_log)
      log_.push_back({state_.clock, -1, EventKind::Refill, from, "detour", -1, 0.0, 0.0});
    std::vector<VertexId> needed{inst.depot()};
    for (TaskId t = 0; t < inst.num_tasks(); ++t) {
      if (!state_.unserved[static_cast<size_t>(t)]) continue;
      needed.push_back(inst.task(t).u);
      needed.push_back(inst.task(t).v);
    }
    for (const auto& veh : state_.vehicles) needed.push_back(veh.node);
    try {
      state_.oracle = std::make_shared<const DistanceOracle>(
          build_distance_oracle(inst, state_.blocked, needed));
    } catch (const UnreachableError& err) {
      throw SimulationError(fmt::format("sample {}: {}", sample.seed(), err.what()));
    }
  }
}

void Simulation::decide(int vehicle, double time) {
  const Instance& inst = state_.instance();
  auto& veh = state_.vehicles[static_cast<size_t>(vehicle)];
  const bool at_depot = veh.node == inst.depot();
  auto candidates = candidate_filter(vehicle);
  if (candidates.empty()) {
    if (state_.num_unassigned == 0 && at_depot) {
      veh.finished = true;
      record({EventKind::Refill, time, vehicle, std::nullopt}, "finish");
      return;
    }
    if (state_.num_unassigned == 0 || !at_depot || veh.q < inst.capacity()) {
      schedule(vehicle, EventKind::Refill, time, std::nullopt);
      return;
    }
    // a full vehicle at the depot takes any unassigned task rather than idle
    for (TaskId t = 0; t < inst.num_tasks(); ++t) {
      if (!state_.unassigned[static_cast<size_t>(t)]) continue;
      const Edge& e = inst.task(t);
      const VertexId lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
      candidates.push_back({t, lo, hi});
      candidates.push_back({t, hi, lo});
    }
  }
  const Arc arc = select(vehicle, candidates);
  state_.set_unassigned(arc.task, false);
  state_.assigned_to[static_cast<size_t>(arc.task)] = vehicle;
  veh.target = arc;
  schedule(vehicle, EventKind::Serving, time, arc);
  if (config_.record_log) record(*veh.pending, "select", arc.task);
}

void Simulation::reassign(int vehicle) {
  auto& veh = state_.vehicles[static_cast<size_t>(vehicle)];
  veh.target.reset();
  if (veh.resume_after_refill) {
    veh.resume_after_refill = false;
    return;
  }
  const double time = veh.pending ? veh.pending->time : state_.clock;
  veh.pending.reset();
  if (veh.node == state_.instance().depot()) veh.q = state_.instance().capacity();
  if (config_.record_log) record({EventKind::Serving, time, vehicle, std::nullopt}, "reassign");
  decide(vehicle, time);
}

void Simulation::trigger_refill(const Event& event) {
  const Instance& inst = state_.instance();
  const InstanceSample& sample = *state_.sample;
  const int k = event.vehicle;
  auto& veh = state_.vehicles[static_cast<size_t>(k)];

  if (veh.node == inst.depot()) {
    veh.q = inst.capacity();
    record(event, "refill");
    if (veh.resume_after_refill && veh.target) {
      veh.resume_after_refill = false;
      schedule(k, EventKind::Serving, event.time, veh.target);
      return;
    }
    decide(k, event.time);
    return;
  }

  const VertexId from = veh.node;
  const VertexId to = next_hop(from, inst.depot());
  const EdgeId e = inst.edge_between(from, to);
  const TaskId t = inst.task_of_edge(e);
  double y = 0.0;
  int displaced = -1;
  if (config_.collab_refill && t >= 0 && state_.theta[static_cast<size_t>(t)] > 0.0) {
    const auto ti = static_cast<size_t>(t);
    const double d = sample.actual_demand(e);
    const double need = state_.theta[ti] * d;
    if (need <= veh.q) {
      y = state_.theta[ti];
      veh.q -= need;
      state_.served[ti] += need;
    } else if (veh.q > 0.0) {
      y = veh.q / d;
      state_.served[ti] += veh.q;
      veh.q = 0.0;
    }
    if (y > 0.0) {
      state_.touched[ti] = 1;
      state_.theta[ti] -= y;
      if (state_.theta[ti] <= kThetaEpsilon) {
        state_.theta[ti] = 0.0;
        state_.set_unserved(t, false);
        state_.set_unassigned(t, false);
        displaced = state_.assigned_to[ti];
        state_.assigned_to[ti] = -1;
      }
    }
  }
  veh.route.push_back(to);
  veh.fractions.push_back(y);
  veh.node = to;
  if (y > 0.0) record(event, state_.theta[static_cast<size_t>(t)] == 0.0 ? "serve" : "partial", t, y);
  else record(event, "step");

  if (displaced == k) {
    veh.target.reset();
    veh.resume_after_refill = false;
  } else if (displaced >= 0) {
    reassign(displaced);
  }
  const double dt = y > 0.0 ? inst.edge(e).serving_cost : sample.traversal_cost(e);
  schedule(k, EventKind::Refill, event.time + dt, std::nullopt);
}

void Simulation::trigger_serving(const Event& event) {
  const Instance& inst = state_.instance();
  const InstanceSample& sample = *state_.sample;
  const int k = event.vehicle;
  auto& veh = state_.vehicles[static_cast<size_t>(k)];
  const Arc arc = *event.target;
  const auto ti = static_cast<size_t>(arc.task);

  if (veh.node == inst.depot()) veh.q = inst.capacity();

  if (veh.node == arc.entry && state_.theta[ti] > 0.0) {
    const EdgeId e = inst.task_edge(arc.task);
    const double d = sample.actual_demand(e);
    const double need = state_.theta[ti] * d;
    veh.route.push_back(arc.exit);
    veh.node = arc.exit;
    state_.touched[ti] = 1;
    const double dt = inst.edge(e).serving_cost;
    if (need <= veh.q) {
      veh.fractions.push_back(state_.theta[ti]);
      veh.q -= need;
      state_.served[ti] += need;
      record(event, "serve", arc.task, state_.theta[ti]);
      state_.theta[ti] = 0.0;
      state_.set_unserved(arc.task, false);
      state_.assigned_to[ti] = -1;
      schedule(k, EventKind::Serving, event.time + dt, arc);
      return;
    }
    // route failure
    const double y = veh.q / d;
    veh.fractions.push_back(y);
    state_.served[ti] += veh.q;
    veh.q = 0.0;
    state_.theta[ti] -= y;
    record(event, "failure", arc.task, y);
    if (state_.theta[ti] <= kThetaEpsilon) {
      state_.theta[ti] = 0.0;
      state_.set_unserved(arc.task, false);
      state_.assigned_to[ti] = -1;
      schedule(k, EventKind::Serving, event.time + dt, arc);
      return;
    }
    schedule(k, EventKind::Refill, event.time + dt, std::nullopt);
    if (config_.collab_route_failure) {
      state_.assigned_to[ti] = -1;
      state_.set_unassigned(arc.task, true);
      veh.target.reset();
    } else {
      veh.resume_after_refill = true;
    }
    return;
  }

  if (state_.theta[ti] == 0.0) {
    // at the exit after completing the target
    veh.target.reset();
    decide(k, event.time);
    return;
  }

  const VertexId from = veh.node;
  const VertexId to = next_hop(from, arc.entry);
  const EdgeId e = inst.edge_between(from, to);
  veh.route.push_back(to);
  veh.fractions.push_back(0.0);
  veh.node = to;
  record(event, "step");
  schedule(k, EventKind::Serving, event.time + sample.traversal_cost(e), arc);
}

Solution Simulation::solution() const {
  Solution out;
  out.routes.reserve(state_.vehicles.size());
  for (const auto& veh : state_.vehicles) out.routes.push_back({veh.route, veh.fractions});
  out.event_log = log_;
  out.blocked = state_.blocked;
  out.total_cost = total_cost(out, *state_.sample);
  return out;
}

Solution construct_solution(const InstanceSample& sample, int num_vehicles,
                            const PolicyExpr& policy, const SimConfig& config,
                            std::shared_ptr<const DistanceOracle> base_oracle) {
  return Simulation(sample, num_vehicles, policy, config, std::move(base_oracle)).run();
}

}  // namespace ucarp
