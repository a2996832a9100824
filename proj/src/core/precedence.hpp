#pragma once

#include <span>
#include <vector>

#include "core/dataset.hpp"

namespace defplan {

// Sample standard deviation (n-1 denominator); a single value has spread 0.
double sample_std(std::span<const double> values);

// Pooled standard deviation of two samples described by size and spread.
// Undefined when n1 + n2 <= 2 (undefined_effect error).
double pooled_std(std::size_t n1, double s1, std::size_t n2, double s2);

// Effect size g = (mean(x) - mean(y)) / pooled std. When the pooled spread
// is zero: equal means give 0, differing means give a signed infinity
// sentinel that outranks every finite effect.
double hedges_g(std::span<const double> values_x,
                std::span<const double> values_y);

// How much each feature actually moved between two consecutive releases,
// and which top-M movers a change plan is allowed to touch.
struct PrecedenceProfile {
  std::array<double, kFeatureCount> effect{};  // g per feature index
  std::vector<int> ranking;      // all features, |g| descending
  std::vector<int> precedented;  // leading min(M, 20) of ranking
  int m = 0;

  bool is_precedented(int feature) const;
};

// Profile over the aligned unit lists of releases x and y; effect sizes use
// raw (un-normalized) values, which g is insensitive to anyway. Ranking
// ties break toward the lower feature index.
PrecedenceProfile build_profile(const ReleaseDataset& x,
                                const ReleaseDataset& y, int m);

// CSV report: feature, g, rank, precedented flag (header included).
std::string profile_to_csv(const PrecedenceProfile& profile);

}  // namespace defplan
