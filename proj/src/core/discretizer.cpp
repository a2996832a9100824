#include "core/discretizer.hpp"

#include <algorithm>
#include <cmath>

namespace defplan {
namespace {

double entropy2(std::size_t positives, std::size_t total) {
  if (total == 0 || positives == 0 || positives == total) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

int class_count(std::size_t positives, std::size_t total) {
  return (positives > 0 ? 1 : 0) + (positives < total ? 1 : 0);
}

// Recursive binary splitting of sorted[begin,end) with the MDL stop rule.
void mdlp_recurse(const std::vector<std::pair<double, int>>& sorted,
                  std::size_t begin, std::size_t end,
                  std::vector<double>& cuts) {
  const std::size_t n = end - begin;
  if (n < 2) return;
  std::size_t total_pos = 0;
  for (std::size_t i = begin; i < end; ++i) {
    total_pos += static_cast<std::size_t>(sorted[i].second);
  }

  // Best candidate: the midpoint between consecutive distinct values that
  // minimizes the size-weighted child entropy (first wins on ties).
  bool found = false;
  std::size_t best_i = 0;
  std::size_t best_left_pos = 0;
  double best_avg = 0.0;
  std::size_t left_pos = 0;
  for (std::size_t i = begin; i + 1 < end; ++i) {
    left_pos += static_cast<std::size_t>(sorted[i].second);
    if (sorted[i].first == sorted[i + 1].first) continue;
    const std::size_t nl = i + 1 - begin;
    const std::size_t nr = end - (i + 1);
    const double avg =
        (static_cast<double>(nl) * entropy2(left_pos, nl) +
         static_cast<double>(nr) * entropy2(total_pos - left_pos, nr)) /
        static_cast<double>(n);
    if (!found || avg < best_avg) {
      found = true;
      best_i = i;
      best_left_pos = left_pos;
      best_avg = avg;
    }
  }
  if (!found) return;

  const std::size_t nl = best_i + 1 - begin;
  const std::size_t nr = end - (best_i + 1);
  const double es = entropy2(total_pos, n);
  const double e1 = entropy2(best_left_pos, nl);
  const double e2 = entropy2(total_pos - best_left_pos, nr);
  const double gain = es - best_avg;
  const int k = class_count(total_pos, n);
  const int k1 = class_count(best_left_pos, nl);
  const int k2 = class_count(total_pos - best_left_pos, nr);
  const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                       (k * es - k1 * e1 - k2 * e2);
  const double threshold =
      (std::log2(static_cast<double>(n - 1)) + delta) / static_cast<double>(n);
  if (gain <= threshold) return;

  cuts.push_back((sorted[best_i].first + sorted[best_i + 1].first) / 2.0);
  mdlp_recurse(sorted, begin, best_i + 1, cuts);
  mdlp_recurse(sorted, best_i + 1, end, cuts);
}

}  // namespace

std::vector<double> mdlp_cuts(std::vector<std::pair<double, int>> values) {
  for (const auto& [v, label] : values) {
    require(label == 0 || label == 1, ErrorCode::contract,
            "mdlp_cuts: labels must be binary");
    require(std::isfinite(v), ErrorCode::contract,
            "mdlp_cuts: non-finite value");
  }
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  mdlp_recurse(values, 0, values.size(), cuts);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

Discretizer Discretizer::fit(const ReleaseDataset& normalized_training) {
  const std::size_t defective = normalized_training.defective_count();
  require(defective > 0 && defective < normalized_training.size(),
          ErrorCode::contract,
          "Discretizer::fit: training data must contain both classes");

  Discretizer d;
  d.bins_.resize(kFeatureCount);
  std::vector<std::pair<double, int>> column(normalized_training.size());
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::size_t fi = static_cast<std::size_t>(f);
    for (std::size_t i = 0; i < normalized_training.size(); ++i) {
      const CodeUnit& unit = normalized_training.units()[i];
      const double v = unit.features[fi];
      require(v >= 0.0 && v <= 1.0, ErrorCode::contract,
              "Discretizer::fit: feature values must be normalized to [0,1]");
      column[i] = {v, unit.defective() ? 1 : 0};
    }
    FeatureBins& bins = d.bins_[fi];
    bins.cuts = mdlp_cuts(column);
    bins.counts.assign(bins.cuts.size() + 1, 0);
    for (const auto& [v, label] : column) {
      ++bins.counts[static_cast<std::size_t>(d.bin_of(f, v))];
    }
  }
  return d;
}

Discretizer Discretizer::from_bins(std::vector<FeatureBins> bins) {
  require(bins.size() == kFeatureCount, ErrorCode::contract,
          "from_bins: need one FeatureBins per schema feature");
  for (const FeatureBins& fb : bins) {
    require(fb.counts.size() == fb.cuts.size() + 1, ErrorCode::contract,
            "from_bins: counts must cover cuts+1 bins");
    for (std::size_t i = 0; i < fb.cuts.size(); ++i) {
      require(fb.cuts[i] > 0.0 && fb.cuts[i] < 1.0, ErrorCode::contract,
              "from_bins: cuts must lie inside (0,1)");
      require(i == 0 || fb.cuts[i - 1] < fb.cuts[i], ErrorCode::contract,
              "from_bins: cuts must be strictly increasing");
    }
  }
  Discretizer d;
  d.bins_ = std::move(bins);
  return d;
}

const FeatureBins& Discretizer::feature(int f) const {
  require(f >= 0 && f < kFeatureCount, ErrorCode::contract,
          "feature index out of range");
  return bins_[static_cast<std::size_t>(f)];
}

int Discretizer::bin_count(int f) const {
  return static_cast<int>(feature(f).cuts.size()) + 1;
}

int Discretizer::bin_of(int f, double value) const {
  const std::vector<double>& cuts = feature(f).cuts;
  const auto it = std::upper_bound(cuts.begin(), cuts.end(), value);
  return static_cast<int>(it - cuts.begin());
}

Interval Discretizer::bin_bounds(int f, int bin) const {
  const FeatureBins& fb = feature(f);
  require(bin >= 0 && bin <= static_cast<int>(fb.cuts.size()),
          ErrorCode::contract, "bin index out of range");
  const std::size_t b = static_cast<std::size_t>(bin);
  Interval out;
  out.lo = (b == 0) ? 0.0 : fb.cuts[b - 1];
  out.hi = (b == fb.cuts.size()) ? 1.0 : fb.cuts[b];
  return out;
}

}  // namespace defplan
