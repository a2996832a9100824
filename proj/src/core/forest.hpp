#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace defplan {

// The only surface the explainer is allowed to see: a queryable probability
// for the defective class. Everything else about the model stays opaque.
class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;

  // P(defective) in [0,1] for a 20-metric feature vector.
  virtual double predict_proba(std::span<const double> features) const = 0;

  // Decision rule: defective iff proba >= 0.5.
  int predict(std::span<const double> features) const;
};

// predict_proba with the [0,1] range contract enforced at the call site.
double checked_proba(const BinaryClassifier& model,
                     std::span<const double> features);

struct ForestParams {
  int tree_count = 100;
  std::optional<int> max_depth;  // absent: grow until pure / min_leaf
  int features_per_split = 4;    // floor(sqrt(20))
  int min_leaf = 1;
  std::uint64_t seed = 0;
};

// Axis-aligned binary decision tree over normalized metric vectors.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when value < threshold
    int left = -1;
    int right = -1;
    int vote = -1;           // leaf class in {0,1}; -1 on internal nodes
    bool operator==(const Node&) const = default;
  };

  // Validates the node table: in-range child links, leaf votes in {0,1},
  // node 0 is the root.
  explicit DecisionTree(std::vector<Node> nodes);

  int vote(std::span<const double> features) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

// Bagged ensemble of Gini-split trees. Trees bootstrap from the name-sorted
// unit order, so predictions are invariant under input row permutations.
class RandomForest : public BinaryClassifier {
 public:
  // Requires both classes present (training error otherwise).
  static RandomForest train(const ReleaseDataset& data,
                            const ForestParams& params);

  // Assembles a forest from prebuilt trees (persistence, test doubles).
  static RandomForest from_trees(std::vector<DecisionTree> trees);

  // Exact vote fraction: (trees voting 1) / tree_count.
  double predict_proba(std::span<const double> features) const override;

  const std::vector<DecisionTree>& trees() const { return trees_; }

  // Structured-text persistence; only round-trip fidelity is contractual.
  std::string to_text() const;
  static RandomForest from_text(const std::string& text);

 private:
  explicit RandomForest(std::vector<DecisionTree> trees)
      : trees_(std::move(trees)) {}

  std::vector<DecisionTree> trees_;
};

}  // namespace defplan
