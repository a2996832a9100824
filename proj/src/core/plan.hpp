#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "core/explain.hpp"
#include "core/precedence.hpp"

namespace defplan {

enum class PlannerId { classical, time, random };

// Stable lowercase identifier ("classical", "time", "random").
std::string_view planner_name(PlannerId id);

// Inverse of planner_name; unknown names raise a config error.
PlannerId planner_from_name(std::string_view name);

// A change plan for one unit: target intervals in normalized [0,1] space,
// keyed by feature index. Features absent from the map mean "do not
// change". The seed is meaningful for the random planner only.
struct Plan {
  std::string unit;
  PlannerId planner = PlannerId::classical;
  std::map<int, Interval> proposals;
  std::uint64_t seed = 0;

  bool operator==(const Plan&) const = default;

  // One-line JSON record: unit, planner, proposals {feature, lo, hi} in
  // feature order; seed for the random planner.
  std::string to_json() const;
};

// Reflects an interval about the midpoint of [0,1]: [lo,hi] -> [1-hi,1-lo].
Interval flip_around_mid(const Interval& interval);

// Flips the interval of every explanation entry with weight >= 0 (zero
// included); negative-weight entries are left alone.
Plan classical_plan(const Explanation& explanation);

// classical_plan restricted to precedented features, so the plan can never
// touch more than the profile's top-M movers.
Plan time_plan(const Explanation& explanation,
               const PrecedenceProfile& profile);

// Baseline: draws one sorted interval (a,b), then proposes that same
// interval for each feature independently with probability p_change.
Plan random_walk_plan(const std::string& unit, const FeatureVector& instance,
                      double p_change, std::uint64_t seed);

}  // namespace defplan
