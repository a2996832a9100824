#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace defplan {

// One source file (class) in one release: 20 static metrics plus the
// post-release defect count.
struct CodeUnit {
  std::string name;
  FeatureVector features{};
  int bug_count = 0;

  bool defective() const { return bug_count > 0; }
  bool operator==(const CodeUnit&) const = default;
};

// A single release of a project. Construction validates the invariants:
// unique unit names, finite metric values, non-negative bug counts.
class ReleaseDataset {
 public:
  ReleaseDataset(std::string project, std::string version,
                 std::vector<CodeUnit> units);

  const std::string& project() const { return project_; }
  const std::string& version() const { return version_; }
  const std::vector<CodeUnit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  std::size_t defective_count() const;

  // Pointer into units(), or nullptr when absent.
  const CodeUnit* find(std::string_view name) const;

  bool operator==(const ReleaseDataset&) const = default;

 private:
  std::string project_;
  std::string version_;
  std::vector<CodeUnit> units_;
};

// Conventional on-disk location: <root>/<project>/<version>.csv
std::string dataset_path(const std::string& root, const std::string& project,
                         const std::string& version);

// Loads one release table. Columns are located by header name; the required
// set is `name`, the 20 metrics, and `bug`. Extra columns are ignored.
// Errors carry file/line context (io, schema, parse).
ReleaseDataset load_release_csv(const std::string& path,
                                const std::string& project,
                                const std::string& version);

// Three consecutive releases of one project, restricted to the units that
// appear in all of them, each sorted by unit name.
struct AlignedTriple {
  ReleaseDataset x;  // oldest: training
  ReleaseDataset y;  // middle: units to plan for
  ReleaseDataset z;  // newest: held-out outcome
};

AlignedTriple align_releases(const ReleaseDataset& x, const ReleaseDataset& y,
                             const ReleaseDataset& z);

// Per-feature min-max scaler fit on one release. Transforms map onto
// [0, 1], clamping values outside the fitted range; a constant feature
// maps to 0.
class Normalizer {
 public:
  static Normalizer fit(const ReleaseDataset& release);

  double transform_one(int feature, double value) const;
  FeatureVector transform(const FeatureVector& features) const;
  // Same release with transformed feature vectors (names/bugs unchanged).
  ReleaseDataset apply(const ReleaseDataset& release) const;

  double fitted_min(int feature) const { return min_[check_index(feature)]; }
  double fitted_max(int feature) const { return max_[check_index(feature)]; }

 private:
  Normalizer() = default;
  static std::size_t check_index(int feature);

  FeatureVector min_{};
  FeatureVector max_{};
};

// Minority-class oversampling by interpolation between nearest minority
// neighbors (Euclidean on the feature vectors, which are expected to be
// normalized already). The result has equal class counts; synthetic units
// carry the minority class label and fresh `~smote<i>` names. An already
// balanced input is returned unchanged. Requires at least two minority
// units (rebalance error otherwise).
ReleaseDataset smote(const ReleaseDataset& training, int k_neighbors,
                     std::uint64_t seed);

}  // namespace defplan
