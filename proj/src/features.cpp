#include "ucarp/features.hpp"

#include <algorithm>
#include <limits>

namespace ucarp {

namespace {

bool wants(TerminalMask mask, Terminal t) { return (mask & terminal_bit(t)) != 0; }

double remaining_of(const SimState& state, const DemandEstimator& estimator, TaskId t) {
  const auto ti = static_cast<size_t>(t);
  return estimator.remaining(*state.sample, state.instance().task_edge(t), state.served[ti],
                             state.touched[ti] != 0);
}

}  // namespace

FeatureVector extract_features(const SimState& state, const DemandEstimator& estimator,
                               int vehicle, const Arc& arc, TerminalMask mask,
                               const FeatureScale& scale) {
  const Instance& inst = state.instance();
  const DistanceOracle& dist = *state.oracle;
  const VehicleState& veh = state.vehicles[static_cast<size_t>(vehicle)];
  const double Q = inst.capacity();
  const double n_tasks = static_cast<double>(inst.num_tasks());
  FeatureVector f;

  if (wants(mask, Terminal::CFH)) f[Terminal::CFH] = dist.dist(veh.node, arc.entry) / scale.cost;
  if (wants(mask, Terminal::CR)) f[Terminal::CR] = dist.dist(veh.node, inst.depot()) / scale.cost;
  if (wants(mask, Terminal::CTD)) f[Terminal::CTD] = dist.dist(arc.exit, inst.depot()) / scale.cost;
  if (wants(mask, Terminal::SC)) f[Terminal::SC] = inst.task(arc.task).serving_cost / scale.cost;
  if (wants(mask, Terminal::DEM)) f[Terminal::DEM] = remaining_of(state, estimator, arc.task) / scale.demand;
  if (wants(mask, Terminal::FULL)) f[Terminal::FULL] = (Q - veh.q) / Q;
  if (wants(mask, Terminal::RQ)) f[Terminal::RQ] = veh.q / scale.demand;
  if (wants(mask, Terminal::FRT)) f[Terminal::FRT] = state.num_unserved / n_tasks;
  if (wants(mask, Terminal::FUT)) f[Terminal::FUT] = state.num_unassigned / n_tasks;

  if (wants(mask, Terminal::CFR1) || wants(mask, Terminal::RQ1)) {
    double best = std::numeric_limits<double>::infinity();
    int best_vehicle = -1;
    for (size_t k = 0; k < state.vehicles.size(); ++k) {
      const auto& other = state.vehicles[k];
      if (static_cast<int>(k) == vehicle || other.finished) continue;
      const double d = std::min(dist.dist(other.node, arc.entry), dist.dist(other.node, arc.exit));
      if (d < best) {
        best = d;
        best_vehicle = static_cast<int>(k);
      }
    }
    if (best_vehicle >= 0) {
      f[Terminal::CFR1] = best / scale.cost;
      f[Terminal::RQ1] = state.vehicles[static_cast<size_t>(best_vehicle)].q / scale.demand;
    }
  }

  if (wants(mask, Terminal::CTT1) || wants(mask, Terminal::DEM1)) {
    double best = std::numeric_limits<double>::infinity();
    TaskId best_task = -1;
    for (TaskId t = 0; t < inst.num_tasks(); ++t) {
      if (t == arc.task || !state.unserved[static_cast<size_t>(t)]) continue;
      const Edge& e = inst.task(t);
      const double d = std::min(dist.dist(arc.exit, e.u), dist.dist(arc.exit, e.v));
      if (d < best) {
        best = d;
        best_task = t;
      }
    }
    if (best_task >= 0) {
      f[Terminal::CTT1] = best / scale.cost;
      if (wants(mask, Terminal::DEM1))
        f[Terminal::DEM1] = remaining_of(state, estimator, best_task) / scale.demand;
    }
  }
  return f;
}

}  // namespace ucarp
