#pragma once

#include <utility>
#include <vector>

#include "core/dataset.hpp"

namespace defplan {

// Bins of one feature over the normalized [0,1] axis.
struct FeatureBins {
  std::vector<double> cuts;         // strictly increasing, inside (0,1)
  std::vector<std::size_t> counts;  // training occupancy, cuts.size()+1 bins
};

// Cut points for one feature: recursive entropy minimization over all
// midpoints between consecutive distinct values, each split accepted only
// if it passes the MDL criterion. `values` pairs a normalized value with
// its binary defect label; input order is irrelevant.
std::vector<double> mdlp_cuts(std::vector<std::pair<double, int>> values);

// Entropy-based supervised discretizer fit on a normalized training
// release. Each feature's bins partition [0,1]; a feature with no accepted
// cut keeps a single bin.
class Discretizer {
 public:
  // Requires both classes present and all feature values inside [0,1].
  static Discretizer fit(const ReleaseDataset& normalized_training);

  // Assembles a discretizer from explicit bins (tests, fixtures).
  static Discretizer from_bins(std::vector<FeatureBins> bins);

  int bin_count(int feature) const;
  // Bin containing `value`; a value equal to a cut belongs to the bin on
  // the right, values outside [0,1] clamp into the outermost bins.
  int bin_of(int feature, double value) const;
  // Closed bounds of one bin; outermost bins end at 0 and 1.
  Interval bin_bounds(int feature, int bin) const;

  const FeatureBins& feature(int f) const;

 private:
  Discretizer() = default;

  std::vector<FeatureBins> bins_;  // one entry per schema feature
};

}  // namespace defplan
