#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/forest.hpp"
#include "support/helpers.hpp"

using namespace defplan;
using namespace defplan::testing;

namespace {

DecisionTree leaf_tree(int vote) {
  DecisionTree::Node n;
  n.vote = vote;
  return DecisionTree({n});
}

DecisionTree stump_tree(int feature, double threshold, int left_vote,
                        int right_vote) {
  DecisionTree::Node root;
  root.feature = feature;
  root.threshold = threshold;
  root.left = 1;
  root.right = 2;
  DecisionTree::Node l;
  l.vote = left_vote;
  DecisionTree::Node r;
  r.vote = right_vote;
  return DecisionTree({root, l, r});
}

struct FixedProba final : BinaryClassifier {
  explicit FixedProba(double p) : p(p) {}
  double predict_proba(std::span<const double>) const override { return p; }
  double p;
};

// Exhaustive best single split by weighted Gini; the independent oracle for
// the one-tree stump comparison.
struct StumpOracle {
  int feature = -1;
  double threshold = 0.0;
  int left_vote = 0;
  int right_vote = 0;

  static StumpOracle fit(const ReleaseDataset& data) {
    StumpOracle best;
    double best_impurity = 1e9;
    auto gini2 = [](double pos, double n) {
      if (n == 0) return 0.0;
      const double p = pos / n;
      return 2.0 * p * (1.0 - p);
    };
    for (int f = 0; f < kFeatureCount; ++f) {
      std::vector<std::pair<double, int>> col;
      for (const CodeUnit& u : data.units()) {
        col.emplace_back(u.features[static_cast<std::size_t>(f)],
                         u.defective() ? 1 : 0);
      }
      std::sort(col.begin(), col.end());
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        if (col[i].first == col[i + 1].first) continue;
        const double cut = (col[i].first + col[i + 1].first) / 2.0;
        double lp = 0, ln = 0, rp = 0, rn = 0;
        for (const auto& [v, y] : col) {
          if (v < cut) {
            lp += y;
            ln += 1;
          } else {
            rp += y;
            rn += 1;
          }
        }
        const double impurity =
            (ln * gini2(lp, ln) + rn * gini2(rp, rn)) / (ln + rn);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best.feature = f;
          best.threshold = cut;
          best.left_vote = lp * 2 >= ln ? 1 : 0;
          best.right_vote = rp * 2 >= rn ? 1 : 0;
        }
      }
    }
    return best;
  }

  int predict(const FeatureVector& x) const {
    return x[static_cast<std::size_t>(feature)] < threshold ? left_vote
                                                            : right_vote;
  }
};

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("hand-built forest tallies votes exactly") {
    const RandomForest forest =
        RandomForest::from_trees({leaf_tree(1), leaf_tree(1), leaf_tree(0)});
    const FeatureVector x = constant_features(0.5);
    CHECK(forest.predict_proba(x) == doctest::Approx(2.0 / 3.0));
    CHECK(forest.predict(x) == 1);

    const RandomForest even =
        RandomForest::from_trees({leaf_tree(1), leaf_tree(0)});
    CHECK(even.predict_proba(x) == 0.5);
    CHECK(even.predict(x) == 1);  // >= 0.5 rule: threshold ties go defective

    const RandomForest none = RandomForest::from_trees({leaf_tree(0)});
    CHECK(none.predict_proba(x) == 0.0);
    CHECK(none.predict(x) == 0);
  }

  TEST_CASE("stump routing uses strict less-than on the threshold") {
    const DecisionTree t = stump_tree(2, 0.5, 0, 1);
    FeatureVector x = constant_features(0.0);
    x[2] = 0.49;
    CHECK(t.vote(x) == 0);
    x[2] = 0.5;  // boundary value goes right
    CHECK(t.vote(x) == 1);
    x[2] = 0.51;
    CHECK(t.vote(x) == 1);

    const std::vector<double> wrong(5, 0.0);
    CHECK_THROWS_AS(t.vote(wrong), Error);
  }

  TEST_CASE("tree validation") {
    DecisionTree::Node bad_leaf;
    bad_leaf.vote = 2;
    CHECK_THROWS_AS(DecisionTree({bad_leaf}), Error);

    DecisionTree::Node dangling;
    dangling.feature = 0;
    dangling.threshold = 0.5;
    dangling.left = 5;
    dangling.right = 1;
    CHECK_THROWS_AS(DecisionTree({dangling, {}}), Error);
    CHECK_THROWS_AS(DecisionTree({}), Error);
    CHECK_THROWS_AS(RandomForest::from_trees({}), Error);
  }

  TEST_CASE("separable data is learned perfectly") {
    std::vector<CodeUnit> units;
    Rng gen(21);
    for (int i = 0; i < 40; ++i) {
      FeatureVector f{};
      for (double& v : f) v = gen.uniform01();
      const bool defective = i % 2 == 0;
      f[4] = defective ? 0.75 + 0.2 * gen.uniform01()
                       : 0.05 + 0.2 * gen.uniform01();
      units.push_back(make_unit("u" + std::to_string(i), f, defective ? 1 : 0));
    }
    const ReleaseDataset data("p", "v", units);
    ForestParams params;
    params.tree_count = 25;
    params.seed = 9;
    const RandomForest forest = RandomForest::train(data, params);
    for (const CodeUnit& u : data.units()) {
      CHECK(forest.predict(u.features) == (u.defective() ? 1 : 0));
    }
  }

  TEST_CASE("single tree stump matches exhaustive threshold search") {
    // One informative feature, clean threshold at 0.45, every distinct
    // value repeated 20 times so each bootstrap sees all of them.
    std::vector<CodeUnit> units;
    for (int v = 0; v < 10; ++v) {
      for (int c = 0; c < 20; ++c) {
        FeatureVector f = constant_features(0.3);
        f[3] = 0.1 * v;
        units.push_back(make_unit("u" + std::to_string(v) + "_" +
                                      std::to_string(c),
                                  f, v >= 5 ? 1 : 0));
      }
    }
    const ReleaseDataset data("p", "v", units);
    ForestParams params;
    params.tree_count = 1;
    params.max_depth = 1;
    params.features_per_split = kFeatureCount;
    params.seed = 1234;
    const RandomForest forest = RandomForest::train(data, params);
    const StumpOracle oracle = StumpOracle::fit(data);
    CHECK(oracle.feature == 3);
    CHECK(oracle.threshold == doctest::Approx(0.45));
    for (int g = 0; g <= 50; ++g) {
      FeatureVector probe = constant_features(0.3);
      probe[3] = g / 50.0;
      CHECK(forest.predict(probe) == oracle.predict(probe));
    }
  }

  TEST_CASE("training is deterministic and row-order invariant") {
    std::vector<CodeUnit> units;
    Rng gen(77);
    for (int i = 0; i < 60; ++i) {
      FeatureVector f{};
      for (double& v : f) v = gen.uniform01();
      units.push_back(make_unit("u" + std::to_string(i), f,
                                f[0] + f[7] > 1.0 ? 1 : 0));
    }
    const ReleaseDataset data("p", "v", units);
    std::vector<CodeUnit> shuffled = units;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[3], shuffled[31]);
    const ReleaseDataset permuted("p", "v", shuffled);

    ForestParams params;
    params.tree_count = 12;
    params.seed = 555;
    const RandomForest a = RandomForest::train(data, params);
    const RandomForest b = RandomForest::train(data, params);
    const RandomForest c = RandomForest::train(permuted, params);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.to_text() == c.to_text());

    params.seed = 556;
    const RandomForest d = RandomForest::train(data, params);
    CHECK(a.to_text() != d.to_text());
  }

  TEST_CASE("training rejects bad input") {
    const ReleaseDataset one_class("p", "v", {make_unit("a", 0.1, 1),
                                              make_unit("b", 0.9, 1)});
    try {
      RandomForest::train(one_class, {});
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::training);
    }

    const ReleaseDataset ok("p", "v", {make_unit("a", 0.1, 1),
                                       make_unit("b", 0.9, 0)});
    ForestParams bad;
    bad.tree_count = 0;
    CHECK_THROWS_AS(RandomForest::train(ok, bad), Error);
    bad = {};
    bad.features_per_split = 21;
    CHECK_THROWS_AS(RandomForest::train(ok, bad), Error);
    bad = {};
    bad.min_leaf = 0;
    CHECK_THROWS_AS(RandomForest::train(ok, bad), Error);
    bad = {};
    bad.max_depth = 0;
    CHECK_THROWS_AS(RandomForest::train(ok, bad), Error);
  }

  TEST_CASE("text persistence round-trips") {
    std::vector<CodeUnit> units;
    Rng gen(101);
    for (int i = 0; i < 30; ++i) {
      FeatureVector f{};
      for (double& v : f) v = gen.uniform01();
      units.push_back(make_unit("u" + std::to_string(i), f, f[2] > 0.5));
    }
    const ReleaseDataset data("p", "v", units);
    ForestParams params;
    params.tree_count = 7;
    params.seed = 31;
    const RandomForest forest = RandomForest::train(data, params);
    const std::string text = forest.to_text();
    const RandomForest restored = RandomForest::from_text(text);
    CHECK(restored.to_text() == text);
    CHECK(restored.trees().size() == 7);
    for (const CodeUnit& u : data.units()) {
      CHECK(restored.predict_proba(u.features) ==
            forest.predict_proba(u.features));
    }
    CHECK_THROWS_AS(RandomForest::from_text("garbage"), Error);
    CHECK_THROWS_AS(RandomForest::from_text("forest 2 1\n"), Error);
  }

  TEST_CASE("probability is the exact vote fraction") {
    std::vector<CodeUnit> units;
    Rng gen(13);
    for (int i = 0; i < 50; ++i) {
      FeatureVector f{};
      for (double& v : f) v = gen.uniform01();
      units.push_back(make_unit("u" + std::to_string(i), f,
                                f[11] > 0.4 ? 1 : 0));
    }
    const ReleaseDataset data("p", "v", units);
    ForestParams params;
    params.tree_count = 9;
    params.seed = 2;
    const RandomForest forest = RandomForest::train(data, params);
    FeatureVector probe{};
    for (int g = 0; g < 20; ++g) {
      for (double& v : probe) v = gen.uniform01();
      int ones = 0;
      for (const DecisionTree& tree : forest.trees()) ones += tree.vote(probe);
      CHECK(forest.predict_proba(probe) == static_cast<double>(ones) / 9.0);
    }
  }

  TEST_CASE("checked_proba rejects out-of-range probabilities") {
    const FeatureVector x = constant_features(0.0);
    CHECK(checked_proba(FixedProba(0.0), x) == 0.0);
    CHECK(checked_proba(FixedProba(1.0), x) == 1.0);
    CHECK(FixedProba(0.5).predict(x) == 1);
    CHECK(FixedProba(0.49).predict(x) == 0);
    CHECK_THROWS_AS(checked_proba(FixedProba(1.5), x), Error);
    CHECK_THROWS_AS(checked_proba(FixedProba(-0.1), x), Error);
  }
}
