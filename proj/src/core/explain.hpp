#pragma once

#include <string>
#include <vector>

#include "core/discretizer.hpp"
#include "core/forest.hpp"

namespace defplan {

inline constexpr int kDefaultSampleCount = 5000;
inline constexpr int kDefaultExplanationSize = 10;

// Similarity kernel width over the binary same-bin space: 0.75 * sqrt(20).
double default_kernel_width();

// exp(-distance^2 / width^2); distance >= 0, width > 0.
double kernel_weight(double distance, double width);

// Explanation seed for one unit: master seed XOR a stable hash of the unit
// name, so per-unit explanations are order- and parallelism-independent.
std::uint64_t unit_explanation_seed(std::uint64_t master_seed,
                                    std::string_view unit_name);

// Neighborhood of one instance. Row 0 is the instance's own clone (weight
// exactly 1); rows 1..n are synthetic draws from the discretizer's
// per-feature bin distribution.
struct SampleSet {
  std::vector<FeatureVector> points;
  std::vector<std::array<int, kFeatureCount>> bins;  // bin per feature
  std::vector<double> probabilities;  // black-box P(defective) per row
  std::vector<double> weights;        // kernel weight per row, in (0,1]
};

SampleSet generate_samples(const FeatureVector& instance,
                           const Discretizer& discretizer,
                           const BinaryClassifier& model, int n,
                           std::uint64_t seed,
                           double kernel_width = default_kernel_width());

// Result of the Lasso-path feature selection plus the final unpenalized
// weighted least-squares refit.
struct KLassoSelection {
  std::vector<int> features;     // ascending feature index
  std::vector<double> weights;   // surrogate coefficient per feature
  double intercept = 0.0;
  bool fell_short = false;       // path never had exactly K active features
};

// Sweeps the kernel-weighted Lasso path on the binary same-bin matrix from
// lambda_max downward and stops at exactly K active features; K = 20 is
// plain weighted least squares over all non-constant columns.
KLassoSelection k_lasso(const SampleSet& samples, int k);

struct ExplanationEntry {
  int feature = -1;
  double weight = 0.0;   // positive pushes toward the defective class
  Interval interval;     // instance's discretizer bin, lo <= value <= hi
  bool operator==(const ExplanationEntry&) const = default;
};

struct Explanation {
  std::string unit;
  std::vector<ExplanationEntry> entries;  // |weight| descending, at most K
  double intercept = 0.0;
  double fidelity = 0.0;      // weighted R^2 clamped into [0,1]
  double fidelity_raw = 0.0;  // unclamped weighted R^2
  std::uint64_t seed = 0;
  bool flagged = false;       // selection fell short of K active features

  // One-line JSON record: unit, entries {feature, weight, lo, hi},
  // intercept, fidelity, seed.
  std::string to_json() const;
};

// End-to-end local explanation of one normalized instance against a
// black-box classifier.
Explanation explain_instance(const BinaryClassifier& model,
                             const CodeUnit& instance,
                             const Discretizer& discretizer, int k, int n,
                             std::uint64_t seed);

}  // namespace defplan
