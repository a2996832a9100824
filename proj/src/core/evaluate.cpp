#include "core/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "json.hpp"

namespace defplan {

namespace {

void require_normalized(const CodeUnit& unit, const char* where) {
  for (double value : unit.features) {
    require(value >= 0.0 && value <= 1.0, ErrorCode::contract,
            std::string(where) + ": unit \"" + unit.name +
                "\" is not normalized");
  }
}

bool inside(double value, const Interval& interval) {
  return value >= interval.lo - kOverlapTolerance &&
         value <= interval.hi + kOverlapTolerance;
}

}  // namespace

double overlap_score(const Plan& plan, const CodeUnit& unit_z) {
  require(plan.unit == unit_z.name, ErrorCode::contract,
          "overlap_score: plan for \"" + plan.unit +
              "\" scored against \"" + unit_z.name + "\"");
  require_normalized(unit_z, "overlap_score");
  if (plan.proposals.empty()) return 0.0;
  std::size_t matched = 0;
  for (const auto& [feature, interval] : plan.proposals) {
    if (inside(unit_z.features[static_cast<std::size_t>(feature)],
               interval)) {
      ++matched;
    }
  }
  return static_cast<double>(matched) /
         static_cast<double>(plan.proposals.size());
}

double overlap_score_strict(const Plan& plan, const CodeUnit& unit_y,
                            const CodeUnit& unit_z) {
  require(plan.unit == unit_y.name && plan.unit == unit_z.name,
          ErrorCode::contract, "overlap_score_strict: unit mismatch");
  require_normalized(unit_y, "overlap_score_strict");
  require_normalized(unit_z, "overlap_score_strict");
  std::size_t union_size = plan.proposals.size();
  std::size_t matched = 0;
  for (int feature = 0; feature < kFeatureCount; ++feature) {
    std::size_t f = static_cast<std::size_t>(feature);
    bool changed =
        std::fabs(unit_y.features[f] - unit_z.features[f]) >
        kOverlapTolerance;
    if (!changed) continue;
    auto proposal = plan.proposals.find(feature);
    if (proposal == plan.proposals.end()) {
      ++union_size;  // changed but never proposed
    } else if (inside(unit_z.features[f], proposal->second)) {
      ++matched;
    }
  }
  if (union_size == 0) return 0.0;
  return static_cast<double>(matched) / static_cast<double>(union_size);
}

int ndpv_delta(const CodeUnit& unit_y, const CodeUnit& unit_z) {
  require(unit_y.name == unit_z.name, ErrorCode::contract,
          "ndpv_delta: unit mismatch (\"" + unit_y.name + "\" vs \"" +
              unit_z.name + "\")");
  return unit_y.bug_count - unit_z.bug_count;
}

double weighted_score(std::span<const EvaluationRecord> records) {
  double s = 0.0;
  for (const EvaluationRecord& record : records) {
    s += record.overlap * record.ndpv;
  }
  return s;
}

std::optional<double> scaled_score(
    std::span<const EvaluationRecord> records) {
  long long denominator = 0;
  for (const EvaluationRecord& record : records) {
    denominator += record.ndpv;
  }
  if (denominator == 0) return std::nullopt;
  return weighted_score(records) / static_cast<double>(denominator);
}

RankTest mann_whitney(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::contract,
          "mann_whitney: empty sample");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double value : a) pooled.emplace_back(value, 0);
  for (double value : b) pooled.emplace_back(value, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& lhs, const auto& rhs) {
              return lhs.first < rhs.first;
            });

  // Average ranks across tie runs; accumulate the tie correction term.
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double run = static_cast<double>(j - i);
    const double rank = (static_cast<double>(i + 1) +
                         static_cast<double>(j)) /
                        2.0;  // 1-based average rank of the run
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_a += rank;
    }
    tie_term += run * run * run - run;
    i = j;
  }

  RankTest result;
  result.u = rank_sum_a -
             static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  const double mean =
      static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double variance =
      (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
      (static_cast<double>(n + 1) -
       tie_term / (static_cast<double>(n) * static_cast<double>(n - 1)));
  if (variance <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double z = (result.u - mean) / std::sqrt(variance);
  result.p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  return result;
}

RankTest compare_planners(std::span<const EvaluationRecord> a,
                          std::span<const EvaluationRecord> b) {
  std::vector<double> overlaps_a;
  std::vector<double> overlaps_b;
  overlaps_a.reserve(a.size());
  overlaps_b.reserve(b.size());
  for (const EvaluationRecord& record : a) {
    overlaps_a.push_back(record.overlap);
  }
  for (const EvaluationRecord& record : b) {
    overlaps_b.push_back(record.overlap);
  }
  return mann_whitney(overlaps_a, overlaps_b);
}

namespace {

// Equal-width histogram bin over [0,1]; the top edge closes the last bin.
std::size_t histogram_bin(double overlap) {
  int bin = static_cast<int>(overlap * 5.0);
  if (bin < 0) bin = 0;
  if (bin > 4) bin = 4;
  return static_cast<std::size_t>(bin);
}

KTestConfig validated(KTestConfig config) {
  require(config.m >= 1 && config.m <= kFeatureCount, ErrorCode::config,
          "precedence budget M outside [1,20]");
  require(config.k >= 1 && config.k <= kFeatureCount, ErrorCode::config,
          "explanation size K outside [1,20]");
  require(config.samples >= 1, ErrorCode::config,
          "sample count must be positive");
  require(config.p_change >= 0.0 && config.p_change <= 1.0,
          ErrorCode::config, "p_change outside [0,1]");
  require(config.smote_neighbors >= 1, ErrorCode::config,
          "smote_neighbors must be positive");
  return config;
}

}  // namespace

std::string records_to_csv(std::span<const EvaluationRecord> records) {
  std::string out = "unit,planner,overlap,ndpv,plan_size\n";
  for (const EvaluationRecord& record : records) {
    out += csv_field(record.unit);
    out += ',';
    out += planner_name(record.planner);
    out += ',';
    out += format_double(record.overlap);
    out += ',';
    out += std::to_string(record.ndpv);
    out += ',';
    out += std::to_string(record.plan_size);
    out += '\n';
  }
  return out;
}

std::string summary_to_csv(const PlannerSummary& summary) {
  std::string out = "metric,value\n";
  auto row = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += ',';
    out += value;
    out += '\n';
  };
  row("planner", std::string(planner_name(summary.planner)));
  row("records", std::to_string(summary.records.size()));
  row("skipped", std::to_string(summary.skipped));
  row("failed", std::to_string(summary.failed));
  row("s", format_double(summary.s));
  row("s_scaled", summary.s_scaled.has_value()
                      ? format_double(*summary.s_scaled)
                      : std::string("undefined"));
  row("mean_plan_size", format_double(summary.mean_plan_size));
  for (std::size_t bin = 0; bin < summary.overlap_histogram.size(); ++bin) {
    row("hist_" + std::to_string(bin),
        std::to_string(summary.overlap_histogram[bin]));
  }
  return out;
}

std::string EvaluationReport::to_json() const {
  nlohmann::json record;
  record["project"] = project;
  nlohmann::json planner_list = nlohmann::json::array();
  for (const PlannerSummary& summary : planners) {
    nlohmann::json p;
    p["planner"] = std::string(planner_name(summary.planner));
    nlohmann::json rec_list = nlohmann::json::array();
    for (const EvaluationRecord& rec : summary.records) {
      nlohmann::json r;
      r["unit"] = rec.unit;
      r["overlap"] = rec.overlap;
      r["ndpv"] = rec.ndpv;
      r["plan_size"] = rec.plan_size;
      rec_list.push_back(std::move(r));
    }
    p["records"] = std::move(rec_list);
    p["s"] = summary.s;
    if (summary.s_scaled.has_value()) {
      p["s_scaled"] = *summary.s_scaled;
    } else {
      p["s_scaled"] = nullptr;
    }
    p["mean_plan_size"] = summary.mean_plan_size;
    p["overlap_histogram"] = summary.overlap_histogram;
    p["skipped"] = summary.skipped;
    p["failed"] = summary.failed;
    p["failures"] = summary.failures;
    planner_list.push_back(std::move(p));
  }
  record["planners"] = std::move(planner_list);
  nlohmann::json comparison_list = nlohmann::json::array();
  for (const PlannerComparison& comparison : comparisons) {
    nlohmann::json c;
    c["a"] = std::string(planner_name(comparison.a));
    c["b"] = std::string(planner_name(comparison.b));
    c["u"] = comparison.test.u;
    c["p"] = comparison.test.p;
    comparison_list.push_back(std::move(c));
  }
  record["comparisons"] = std::move(comparison_list);
  return record.dump();
}

KTestPipeline::KTestPipeline(const ReleaseDataset& x, const ReleaseDataset& y,
                             const KTestConfig& config)
    : config_(validated(config)),
      y_(y),
      normalizer_(Normalizer::fit(x)),
      discretizer_(Discretizer::fit(normalizer_.apply(x))),
      profile_(build_profile(x, y, config_.m)),
      rebalance_seed_(derive_stream(config_.master_seed, 0)),
      forest_seed_(derive_stream(config_.master_seed, 1)) {
  // Train on the rebalanced, normalized first release.
  ReleaseDataset balanced = smote(normalizer_.apply(x),
                                  config_.smote_neighbors, rebalance_seed_);
  ForestParams params = config_.forest;
  params.seed = forest_seed_;
  model_ = std::make_unique<RandomForest>(RandomForest::train(balanced,
                                                              params));

  // Decide and explain every unit that is buggy in the middle release.
  for (const CodeUnit& unit : y_.units()) {
    if (unit.bug_count <= 0) continue;
    UnitOutcome outcome;
    outcome.unit = unit.name;
    outcome.normalized = normalizer_.transform(unit.features);
    if (model_->predict(outcome.normalized) == 1) {
      outcome.eligible = true;
      CodeUnit probe{unit.name, outcome.normalized, unit.bug_count};
      try {
        outcome.explanation = explain_instance(
            *model_, probe, discretizer_, config_.k, config_.samples,
            unit_explanation_seed(config_.master_seed, unit.name));
      } catch (const Error& error) {
        outcome.failed = true;
        outcome.note = error.what();
        outcome.explanation.reset();
      }
    }
    outcomes_.push_back(std::move(outcome));
  }
}

Plan KTestPipeline::plan_for(const UnitOutcome& outcome,
                             PlannerId planner) const {
  switch (planner) {
    case PlannerId::classical:
      return classical_plan(*outcome.explanation);
    case PlannerId::time:
      return time_plan(*outcome.explanation, profile_);
    case PlannerId::random:
      return random_walk_plan(
          outcome.unit, outcome.normalized, config_.p_change,
          unit_explanation_seed(config_.master_seed, outcome.unit));
  }
  fail(ErrorCode::contract, "unknown planner id");
}

std::vector<Plan> KTestPipeline::plans(PlannerId planner) const {
  std::vector<Plan> result;
  for (const UnitOutcome& outcome : outcomes_) {
    if (!outcome.eligible || outcome.failed) continue;
    result.push_back(plan_for(outcome, planner));
  }
  return result;
}

PlannerSummary KTestPipeline::score(PlannerId planner,
                                    const ReleaseDataset& z) const {
  PlannerSummary summary;
  summary.planner = planner;
  double size_total = 0.0;
  for (const UnitOutcome& outcome : outcomes_) {
    if (!outcome.eligible) {
      ++summary.skipped;
      continue;
    }
    if (outcome.failed) {
      ++summary.failed;
      summary.failures.push_back(outcome.unit + ": " + outcome.note);
      continue;
    }
    const CodeUnit* unit_z = z.find(outcome.unit);
    require(unit_z != nullptr, ErrorCode::alignment,
            "unit \"" + outcome.unit + "\" missing from release " +
                z.version());
    const CodeUnit* unit_y = y_.find(outcome.unit);

    Plan plan = plan_for(outcome, planner);
    CodeUnit z_norm{unit_z->name, normalizer_.transform(unit_z->features),
                    unit_z->bug_count};

    EvaluationRecord record;
    record.unit = outcome.unit;
    record.planner = planner;
    if (config_.overlap_mode == OverlapMode::containment) {
      record.overlap = overlap_score(plan, z_norm);
    } else {
      CodeUnit y_norm{unit_y->name, outcome.normalized, unit_y->bug_count};
      record.overlap = overlap_score_strict(plan, y_norm, z_norm);
    }
    record.ndpv = ndpv_delta(*unit_y, *unit_z);
    record.plan_size = static_cast<int>(plan.proposals.size());
    size_total += record.plan_size;
    ++summary.overlap_histogram[histogram_bin(record.overlap)];
    summary.records.push_back(std::move(record));
  }
  summary.s = weighted_score(summary.records);
  summary.s_scaled = scaled_score(summary.records);
  if (!summary.records.empty()) {
    summary.mean_plan_size =
        size_total / static_cast<double>(summary.records.size());
  }
  return summary;
}

double mean_overlap(std::span<const EvaluationRecord> records) {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const EvaluationRecord& record : records) {
    total += record.overlap;
  }
  return total / static_cast<double>(records.size());
}

EvaluationReport score_planners(const KTestPipeline& pipeline,
                                std::span<const PlannerId> planners,
                                const ReleaseDataset& z,
                                std::string project) {
  EvaluationReport report;
  report.project = std::move(project);
  for (PlannerId planner : planners) {
    report.planners.push_back(pipeline.score(planner, z));
  }
  for (std::size_t i = 0; i < report.planners.size(); ++i) {
    for (std::size_t j = i + 1; j < report.planners.size(); ++j) {
      const PlannerSummary& a = report.planners[i];
      const PlannerSummary& b = report.planners[j];
      if (a.records.empty() || b.records.empty()) continue;
      report.comparisons.push_back(PlannerComparison{
          a.planner, b.planner, compare_planners(a.records, b.records)});
    }
  }
  return report;
}

EvaluationReport run_ktest(const AlignedTriple& triple,
                           std::span<const PlannerId> planners,
                           const KTestConfig& config) {
  KTestPipeline pipeline(triple.x, triple.y, config);
  return score_planners(pipeline, planners, triple.z,
                        triple.x.project());
}

}  // namespace defplan
