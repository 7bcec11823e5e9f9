#pragma once

#include "ucarp/policy.hpp"
#include "ucarp/simulator.hpp"

namespace ucarp {

struct FeatureScale {
  double cost = 1.0;
  double demand = 1.0;
};

/// Terminal values for `vehicle` considering `arc`. Only the terminals in
/// `mask` are computed; the others are left at 0.
FeatureVector extract_features(const SimState& state, const DemandEstimator& estimator,
                               int vehicle, const Arc& arc,
                               TerminalMask mask = kAllTerminalsMask,
                               const FeatureScale& scale = {});

}  // namespace ucarp
