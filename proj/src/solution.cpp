#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "ucarp/simulator.hpp"

namespace ucarp {

namespace {
constexpr double kTolerance = 1e-9;
}

double total_cost(const Solution& solution, const InstanceSample& sample) {
  const Instance& inst = sample.base();
  double cost = 0.0;
  for (const auto& route : solution.routes) {
    for (size_t i = 0; i + 1 < route.nodes.size(); ++i) {
      const EdgeId e = inst.edge_between(route.nodes[i], route.nodes[i + 1]);
      if (e < 0)
        throw std::invalid_argument(fmt::format("route step ({}, {}) is not an edge",
                                                route.nodes[i] + 1, route.nodes[i + 1] + 1));
      cost += sample.traversal_cost(e);
    }
  }
  for (EdgeId e : inst.tasks()) cost += inst.edge(e).serving_cost - sample.traversal_cost(e);
  return cost;
}

std::vector<Violation> validate_solution(const Solution& solution, const InstanceSample& sample,
                                         double capacity) {
  const Instance& inst = sample.base();
  std::vector<Violation> out;
  std::vector<double> served(static_cast<size_t>(inst.num_edges()), 0.0);

  for (size_t k = 0; k < solution.routes.size(); ++k) {
    const auto& route = solution.routes[k];
    const int vk = static_cast<int>(k);
    if (route.nodes.empty() || route.nodes.size() != route.fractions.size() + 1) {
      out.push_back({"shape", vk, -1, "need |X| = |Y| + 1 with X non-empty"});
      continue;
    }
    if (route.nodes.front() != inst.depot() || route.nodes.back() != inst.depot())
      out.push_back({"depot", vk, -1, "route does not start and end at the depot"});

    double load = 0.0;
    for (size_t i = 0; i < route.fractions.size(); ++i) {
      const int pos = static_cast<int>(i);
      const double y = route.fractions[i];
      if (!(y >= 0.0 && y <= 1.0 + kTolerance))
        out.push_back({"fraction", vk, pos, fmt::format("fraction {} outside [0, 1]", y)});
      const EdgeId e = inst.edge_between(route.nodes[i], route.nodes[i + 1]);
      if (e < 0) {
        out.push_back({"adjacency", vk, pos,
                       fmt::format("({}, {}) is not an edge", route.nodes[i] + 1,
                                   route.nodes[i + 1] + 1)});
        continue;
      }
      if (!sample.accessible(e))
        out.push_back({"adjacency", vk, pos, fmt::format("edge ({}, {}) is inaccessible",
                                                   route.nodes[i] + 1, route.nodes[i + 1] + 1)});
      served[static_cast<size_t>(e)] += y;
      load += y * sample.actual_demand(e);
      if (route.nodes[i + 1] == inst.depot()) {
        if (load > capacity * (1.0 + kTolerance))
          out.push_back({"capacity", vk, pos, fmt::format("trip load {} exceeds Q = {}", load, capacity)});
        load = 0.0;
      }
    }
    if (load > capacity * (1.0 + kTolerance))
      out.push_back({"capacity", vk, -1, fmt::format("trip load {} exceeds Q = {}", load, capacity)});
  }

  for (EdgeId e = 0; e < inst.num_edges(); ++e) {
    const double s = served[static_cast<size_t>(e)];
    const Edge& edge = inst.edge(e);
    if (edge.is_task() && std::abs(s - 1.0) > kTolerance)
      out.push_back({"coverage", -1, -1,
                     fmt::format("task ({}, {}) served fraction {}", edge.u + 1, edge.v + 1, s)});
    if (!edge.is_task() && s != 0.0)
      out.push_back({"non_required", -1, -1,
                     fmt::format("edge ({}, {}) is not required but served fraction {}", edge.u + 1,
                                 edge.v + 1, s)});
  }
  return out;
}

std::string event_log_json(const Solution& solution, const Instance& instance) {
  using nlohmann::json;
  json routes = json::array();
  for (const auto& route : solution.routes) {
    json nodes = json::array();
    for (VertexId v : route.nodes) nodes.push_back(v + 1);
    routes.push_back({{"X", nodes}, {"Y", route.fractions}});
  }
  json events = json::array();
  for (const auto& r : solution.event_log) {
    json entry = {{"time", r.time},
                  {"vehicle", r.vehicle + 1},
                  {"event", r.kind == EventKind::Refill ? "refill" : "serving"},
                  {"node", r.node + 1},
                  {"action", r.action},
                  {"q", r.q}};
    if (r.task >= 0) {
      const Edge& e = instance.task(r.task);
      entry["task"] = {e.u + 1, e.v + 1};
      entry["fraction"] = r.fraction;
    }
    events.push_back(std::move(entry));
  }
  json blocked = json::array();
  for (EdgeId e : solution.blocked) blocked.push_back({instance.edge(e).u + 1, instance.edge(e).v + 1});
  json doc = {{"instance", instance.name()},
              {"total_cost", solution.total_cost},
              {"routes", routes},
              {"blocked", blocked},
              {"events", events}};
  return doc.dump(2);
}

}  // namespace ucarp
