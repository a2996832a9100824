#include "core/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace defplan {

int BinaryClassifier::predict(std::span<const double> features) const {
  return checked_proba(*this, features) >= 0.5 ? 1 : 0;
}

double checked_proba(const BinaryClassifier& model,
                     std::span<const double> features) {
  const double p = model.predict_proba(features);
  require(p >= 0.0 && p <= 1.0, ErrorCode::contract,
          "classifier produced probability outside [0,1]");
  return p;
}

DecisionTree::DecisionTree(std::vector<Node> nodes)
    : nodes_(std::move(nodes)) {
  require(!nodes_.empty(), ErrorCode::contract, "tree with no nodes");
  const int count = static_cast<int>(nodes_.size());
  for (const Node& node : nodes_) {
    if (node.feature < 0) {
      require(node.vote == 0 || node.vote == 1, ErrorCode::contract,
              "leaf vote must be 0 or 1");
    } else {
      require(node.feature < kFeatureCount, ErrorCode::contract,
              "split feature out of range");
      require(node.left >= 0 && node.left < count && node.right >= 0 &&
                  node.right < count,
              ErrorCode::contract, "child index out of range");
    }
  }
}

int DecisionTree::vote(std::span<const double> features) const {
  require(features.size() == kFeatureCount, ErrorCode::contract,
          "feature vector length mismatch");
  std::size_t at = 0;
  for (std::size_t steps = 0; steps <= nodes_.size(); ++steps) {
    const Node& node = nodes_[at];
    if (node.feature < 0) return node.vote;
    at = static_cast<std::size_t>(
        features[static_cast<std::size_t>(node.feature)] < node.threshold
            ? node.left
            : node.right);
  }
  fail(ErrorCode::contract, "cyclic tree structure");
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // row-weighted mean Gini of the two sides
};

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<CodeUnit>& units, const ForestParams& params,
              Rng& rng)
      : units_(units), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  std::size_t positives(const std::vector<std::size_t>& rows) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](std::size_t r) {
          return units_[r].defective();
        }));
  }

  int make_leaf(std::size_t pos, std::size_t total) {
    DecisionTree::Node leaf;
    leaf.vote = (pos * 2 >= total) ? 1 : 0;  // exact tie goes defective
    nodes_.push_back(leaf);
    return static_cast<int>(nodes_.size() - 1);
  }

  // `features_per_split` distinct candidate features, drawn even when the
  // node turns into a leaf anyway, so the random stream does not depend on
  // data-driven shortcuts. Returned ascending: the lowest feature index
  // wins Gini ties because it is examined first.
  std::vector<int> draw_candidates() {
    std::array<int, kFeatureCount> pool{};
    std::iota(pool.begin(), pool.end(), 0);
    const std::size_t want =
        static_cast<std::size_t>(params_.features_per_split);
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j =
          i + rng_.uniform_below(static_cast<std::size_t>(kFeatureCount) - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> candidates(pool.begin(),
                                pool.begin() + static_cast<long>(want));
    std::sort(candidates.begin(), candidates.end());
    return candidates;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows,
                         const std::vector<int>& candidates) const {
    const std::size_t n = rows.size();
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    SplitChoice best;
    std::vector<std::pair<double, int>> column(n);  // (value, label)
    for (int f : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        const CodeUnit& unit = units_[rows[i]];
        column[i] = {unit.features[static_cast<std::size_t>(f)],
                     unit.defective() ? 1 : 0};
      }
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      std::size_t total_pos = 0;
      for (const auto& [value, label] : column) total_pos += label;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<std::size_t>(column[i].second);
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t left = i + 1;
        const std::size_t right = n - left;
        if (left < min_leaf || right < min_leaf) continue;
        const double impurity =
            (static_cast<double>(left) * gini(left_pos, left) +
             static_cast<double>(right) * gini(total_pos - left_pos, right)) /
            static_cast<double>(n);
        if (!best.found || impurity < best.child_impurity) {
          best.found = true;
          best.feature = f;
          best.threshold = (column[i].first + column[i + 1].first) / 2.0;
          best.child_impurity = impurity;
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const std::size_t n = rows.size();
    const std::size_t pos = positives(rows);
    const bool depth_capped =
        params_.max_depth.has_value() && depth >= *params_.max_depth;
    if (pos == 0 || pos == n || depth_capped ||
        n < 2 * static_cast<std::size_t>(params_.min_leaf)) {
      return make_leaf(pos, n);
    }

    const std::vector<int> candidates = draw_candidates();
    const SplitChoice split = best_split(rows, candidates);
    // Require a real impurity drop; float-noise "gains" become leaves.
    if (!split.found || split.child_impurity >= gini(pos, n) - 1e-12) {
      return make_leaf(pos, n);
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      const double v =
          units_[r].features[static_cast<std::size_t>(split.feature)];
      (v < split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    DecisionTree::Node node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    nodes_.push_back(node);
    const std::size_t self = nodes_.size() - 1;
    const int left = grow(std::move(left_rows), depth + 1);
    const int right = grow(std::move(right_rows), depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return static_cast<int>(self);
  }

  const std::vector<CodeUnit>& units_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

RandomForest RandomForest::train(const ReleaseDataset& data,
                                 const ForestParams& params) {
  require(params.tree_count >= 1, ErrorCode::contract,
          "tree_count must be positive");
  require(params.features_per_split >= 1 &&
              params.features_per_split <= kFeatureCount,
          ErrorCode::contract, "features_per_split out of range");
  require(params.min_leaf >= 1, ErrorCode::contract,
          "min_leaf must be positive");
  require(!params.max_depth || *params.max_depth >= 1, ErrorCode::contract,
          "max_depth must be positive when set");
  const std::size_t defective = data.defective_count();
  require(defective > 0 && defective < data.size(), ErrorCode::training,
          data.project() + " " + data.version() +
              ": training data must contain both classes");

  // Canonical row order: sorted by unit name. Bootstrapping from this order
  // makes the forest independent of the input permutation.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.units()[a].name < data.units()[b].name;
  });

  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.tree_count));
  for (int t = 0; t < params.tree_count; ++t) {
    Rng rng(derive_stream(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sample(data.size());
    for (std::size_t& row : sample) {
      row = order[rng.uniform_below(data.size())];
    }
    TreeBuilder builder(data.units(), params, rng);
    trees.push_back(builder.build(std::move(sample)));
  }
  return RandomForest(std::move(trees));
}

RandomForest RandomForest::from_trees(std::vector<DecisionTree> trees) {
  require(!trees.empty(), ErrorCode::contract, "forest with no trees");
  return RandomForest(std::move(trees));
}

double RandomForest::predict_proba(std::span<const double> features) const {
  std::size_t ones = 0;
  for (const DecisionTree& tree : trees_) {
    ones += static_cast<std::size_t>(tree.vote(features));
  }
  return static_cast<double>(ones) / static_cast<double>(trees_.size());
}

std::string RandomForest::to_text() const {
  std::string out = "forest 1 " + std::to_string(trees_.size()) + "\n";
  for (const DecisionTree& tree : trees_) {
    out += "tree " + std::to_string(tree.nodes().size()) + "\n";
    for (const DecisionTree::Node& n : tree.nodes()) {
      out += std::to_string(n.feature) + " " + format_double(n.threshold) +
             " " + std::to_string(n.left) + " " + std::to_string(n.right) +
             " " + std::to_string(n.vote) + "\n";
    }
  }
  return out;
}

RandomForest RandomForest::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int version = 0;
  std::size_t tree_count = 0;
  in >> tag >> version >> tree_count;
  require(in.good() && tag == "forest" && version == 1, ErrorCode::parse,
          "forest text: bad header");
  std::vector<DecisionTree> trees;
  trees.reserve(tree_count);
  for (std::size_t t = 0; t < tree_count; ++t) {
    std::size_t node_count = 0;
    in >> tag >> node_count;
    require(in.good() && tag == "tree", ErrorCode::parse,
            "forest text: bad tree header");
    std::vector<DecisionTree::Node> nodes(node_count);
    for (DecisionTree::Node& n : nodes) {
      in >> n.feature >> n.threshold >> n.left >> n.right >> n.vote;
      require(!in.fail(), ErrorCode::parse, "forest text: bad node record");
    }
    trees.emplace_back(std::move(nodes));
  }
  return from_trees(std::move(trees));
}

}  // namespace defplan
