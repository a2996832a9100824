#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/discretizer.hpp"
#include "core/explain.hpp"
#include "core/forest.hpp"
#include "core/plan.hpp"
#include "core/precedence.hpp"

namespace defplan {

// Absolute slack at interval endpoints (and for "did this value change"
// in the strict variant), so normalization round-off cannot flip a match.
inline constexpr double kOverlapTolerance = 1e-9;

// How plan proposals are scored against the next release. containment is
// the worked-example counting (matched proposals / total proposals);
// strict_jaccard is the literal set form over features that actually
// changed between y and z.
enum class OverlapMode { containment, strict_jaccard };

// Fraction of proposals whose z-value lies inside the proposed closed
// interval; an empty plan scores 0 by convention.
double overlap_score(const Plan& plan, const CodeUnit& unit_z);

// Set variant: delta = features whose value changed from y to z; score =
// |changed features matched by the plan| / |delta union proposed|.
double overlap_score_strict(const Plan& plan, const CodeUnit& unit_y,
                            const CodeUnit& unit_z);

// n_i = bug_count(y) - bug_count(z); positive means bugs were reduced.
int ndpv_delta(const CodeUnit& unit_y, const CodeUnit& unit_z);

// One scored plan.
struct EvaluationRecord {
  std::string unit;
  PlannerId planner = PlannerId::classical;
  double overlap = 0.0;  // s_i in [0,1]
  int ndpv = 0;          // n_i
  int plan_size = 0;

  bool operator==(const EvaluationRecord&) const = default;
};

// S = sum of s_i * n_i.
double weighted_score(std::span<const EvaluationRecord> records);

// S / sum of n_i; empty when the denominator is zero (never a silent
// division).
std::optional<double> scaled_score(std::span<const EvaluationRecord> records);

// Two-sided Mann-Whitney U with average ranks, tie-corrected normal
// approximation, and no continuity correction. u is the first sample's
// statistic. Degenerate spread (all values tied) gives p = 1.
struct RankTest {
  double u = 0.0;
  double p = 1.0;
};

RankTest mann_whitney(std::span<const double> a, std::span<const double> b);

// Mann-Whitney over the overlap scores of two record lists.
RankTest compare_planners(std::span<const EvaluationRecord> a,
                          std::span<const EvaluationRecord> b);

// Mean of the overlap column; 0 for an empty list.
double mean_overlap(std::span<const EvaluationRecord> records);

// Per-planner slice of a report.
struct PlannerSummary {
  PlannerId planner = PlannerId::classical;
  std::vector<EvaluationRecord> records;  // name order
  double s = 0.0;
  std::optional<double> s_scaled;
  double mean_plan_size = 0.0;              // 0 with no records
  std::array<int, 5> overlap_histogram{};   // equal-width bins over [0,1]
  int skipped = 0;  // buggy in y but predicted clean, no plan issued
  int failed = 0;   // units whose explanation failed
  std::vector<std::string> failures;  // "unit: reason" notes
};

struct PlannerComparison {
  PlannerId a = PlannerId::classical;
  PlannerId b = PlannerId::classical;
  RankTest test;
};

struct EvaluationReport {
  std::string project;
  std::vector<PlannerSummary> planners;      // requested order
  std::vector<PlannerComparison> comparisons;

  // One-line JSON with every aggregate (records included).
  std::string to_json() const;
};

// CSV emitters behind the report files: per-unit records and the
// key/value aggregate table.
std::string records_to_csv(std::span<const EvaluationRecord> records);
std::string summary_to_csv(const PlannerSummary& summary);

// Everything run_ktest needs beyond the data itself. The forest seed, the
// rebalance seed, and each unit's explanation seed are derived from the
// master seed; the seed field inside forest is overwritten.
struct KTestConfig {
  int m = 5;                        // precedence budget
  int k = kDefaultExplanationSize;  // explanation size
  int samples = kDefaultSampleCount;
  double p_change = 0.5;
  int smote_neighbors = 5;
  ForestParams forest;
  std::uint64_t master_seed = 0;
  OverlapMode overlap_mode = OverlapMode::containment;
};

// Stages 1-3 of the historical test: everything that may be computed
// before the final release exists. Built from releases x and y only, so
// plans are fixed before z can be consulted.
class KTestPipeline {
 public:
  KTestPipeline(const ReleaseDataset& x, const ReleaseDataset& y,
                const KTestConfig& config);

  // One entry per unit that is buggy in y, in dataset (name) order.
  struct UnitOutcome {
    std::string unit;
    FeatureVector normalized{};  // y features through the x-fitted scaler
    bool eligible = false;       // predicted defective, plan owed
    bool failed = false;
    std::string note;  // failure reason when failed
    std::optional<Explanation> explanation;
  };

  const Normalizer& normalizer() const { return normalizer_; }
  const RandomForest& model() const { return *model_; }
  const Discretizer& discretizer() const { return discretizer_; }
  const PrecedenceProfile& profile() const { return profile_; }
  const std::vector<UnitOutcome>& outcomes() const { return outcomes_; }
  std::uint64_t rebalance_seed() const { return rebalance_seed_; }
  std::uint64_t forest_seed() const { return forest_seed_; }

  // Plans for every eligible, successfully explained unit.
  std::vector<Plan> plans(PlannerId planner) const;

  // Stage 4: score one planner's plans against the final release.
  PlannerSummary score(PlannerId planner, const ReleaseDataset& z) const;

 private:
  Plan plan_for(const UnitOutcome& outcome, PlannerId planner) const;

  KTestConfig config_;
  ReleaseDataset y_;
  Normalizer normalizer_;
  std::unique_ptr<RandomForest> model_;
  Discretizer discretizer_;
  PrecedenceProfile profile_;
  std::vector<UnitOutcome> outcomes_;
  std::uint64_t rebalance_seed_ = 0;
  std::uint64_t forest_seed_ = 0;
};

// Scores every requested planner against the final release and adds the
// pairwise comparisons (pairs with an empty side are skipped).
EvaluationReport score_planners(const KTestPipeline& pipeline,
                                std::span<const PlannerId> planners,
                                const ReleaseDataset& z,
                                std::string project);

// Full historical test for one project: train on x, plan for the units
// buggy in y, score against z, compare planners pairwise.
EvaluationReport run_ktest(const AlignedTriple& triple,
                           std::span<const PlannerId> planners,
                           const KTestConfig& config);

}  // namespace defplan
