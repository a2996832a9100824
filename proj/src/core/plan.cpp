#include "core/plan.hpp"

#include <utility>

#include "json.hpp"

namespace defplan {

std::string_view planner_name(PlannerId id) {
  switch (id) {
    case PlannerId::classical:
      return "classical";
    case PlannerId::time:
      return "time";
    case PlannerId::random:
      return "random";
  }
  fail(ErrorCode::contract, "unknown planner id");
}

PlannerId planner_from_name(std::string_view name) {
  if (name == "classical") return PlannerId::classical;
  if (name == "time") return PlannerId::time;
  if (name == "random") return PlannerId::random;
  fail(ErrorCode::config, "unknown planner \"" + std::string(name) +
                              "\" (expected classical, time, or random)");
}

std::string Plan::to_json() const {
  nlohmann::json record;
  record["unit"] = unit;
  record["planner"] = std::string(planner_name(planner));
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [feature, interval] : proposals) {
    nlohmann::json p;
    p["feature"] =
        std::string(kFeatureNames[static_cast<std::size_t>(feature)]);
    p["lo"] = interval.lo;
    p["hi"] = interval.hi;
    list.push_back(std::move(p));
  }
  record["proposals"] = std::move(list);
  if (planner == PlannerId::random) record["seed"] = seed;
  return record.dump();
}

Interval flip_around_mid(const Interval& interval) {
  require(0.0 <= interval.lo && interval.lo <= interval.hi &&
              interval.hi <= 1.0,
          ErrorCode::contract, "flip_around_mid: interval not in [0,1]");
  return {1.0 - interval.hi, 1.0 - interval.lo};
}

Plan classical_plan(const Explanation& explanation) {
  Plan plan;
  plan.unit = explanation.unit;
  plan.planner = PlannerId::classical;
  for (const ExplanationEntry& entry : explanation.entries) {
    if (entry.weight >= 0.0) {
      plan.proposals[entry.feature] = flip_around_mid(entry.interval);
    }
  }
  return plan;
}

Plan time_plan(const Explanation& explanation,
               const PrecedenceProfile& profile) {
  Plan plan;
  plan.unit = explanation.unit;
  plan.planner = PlannerId::time;
  for (const ExplanationEntry& entry : explanation.entries) {
    if (entry.weight >= 0.0 && profile.is_precedented(entry.feature)) {
      plan.proposals[entry.feature] = flip_around_mid(entry.interval);
    }
  }
  return plan;
}

Plan random_walk_plan(const std::string& unit, const FeatureVector& instance,
                      double p_change, std::uint64_t seed) {
  for (double value : instance) {
    require(value >= 0.0 && value <= 1.0, ErrorCode::contract,
            "random_walk_plan: instance not normalized");
  }
  require(p_change >= 0.0 && p_change <= 1.0, ErrorCode::contract,
          "random_walk_plan: p_change outside [0,1]");
  Plan plan;
  plan.unit = unit;
  plan.planner = PlannerId::random;
  plan.seed = seed;
  Rng rng(seed);
  // One shared interval is drawn up front; the per-feature coin only
  // decides whether a feature receives it.
  double a = rng.uniform01();
  double b = rng.uniform01();
  if (b < a) std::swap(a, b);
  const Interval interval{a, b};
  for (int feature = 0; feature < kFeatureCount; ++feature) {
    if (rng.uniform01() < p_change) plan.proposals[feature] = interval;
  }
  return plan;
}

}  // namespace defplan
