#include "core/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace defplan {

double default_kernel_width() {
  return 0.75 * std::sqrt(static_cast<double>(kFeatureCount));
}

double kernel_weight(double distance, double width) {
  require(distance >= 0.0, ErrorCode::contract,
          "kernel_weight: negative distance");
  require(width > 0.0, ErrorCode::contract,
          "kernel_weight: width must be positive");
  return std::exp(-(distance * distance) / (width * width));
}

std::uint64_t unit_explanation_seed(std::uint64_t master_seed,
                                    std::string_view unit_name) {
  return master_seed ^ fnv1a64(unit_name);
}

SampleSet generate_samples(const FeatureVector& instance,
                           const Discretizer& discretizer,
                           const BinaryClassifier& model, int n,
                           std::uint64_t seed, double kernel_width) {
  require(n >= 1, ErrorCode::contract, "generate_samples: n must be >= 1");
  require(kernel_width > 0.0, ErrorCode::contract,
          "generate_samples: kernel width must be positive");

  // Per-feature cumulative bin occupancy for frequency-proportional draws.
  std::array<std::vector<std::size_t>, kFeatureCount> cumulative;
  std::array<std::size_t, kFeatureCount> total{};
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::size_t fi = static_cast<std::size_t>(f);
    std::size_t running = 0;
    cumulative[fi].reserve(discretizer.feature(f).counts.size());
    for (std::size_t c : discretizer.feature(f).counts) {
      running += c;
      cumulative[fi].push_back(running);
    }
    total[fi] = running;
    require(running > 0, ErrorCode::contract,
            "generate_samples: feature with empty bin occupancy");
  }

  const std::size_t rows = static_cast<std::size_t>(n) + 1;
  SampleSet set;
  set.points.reserve(rows);
  set.bins.reserve(rows);
  set.probabilities.reserve(rows);
  set.weights.reserve(rows);

  // Row 0: the instance itself.
  set.points.push_back(instance);
  std::array<int, kFeatureCount> instance_bins{};
  for (int f = 0; f < kFeatureCount; ++f) {
    instance_bins[static_cast<std::size_t>(f)] =
        discretizer.bin_of(f, instance[static_cast<std::size_t>(f)]);
  }
  set.bins.push_back(instance_bins);

  // Rows 1..n: per feature, draw a bin by training frequency, then a value
  // uniformly inside the bin. Draw order is fixed (feature 0..19, bin then
  // value) so streams are reproducible.
  Rng rng(seed);
  for (int row = 0; row < n; ++row) {
    FeatureVector point{};
    std::array<int, kFeatureCount> bins{};
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::size_t fi = static_cast<std::size_t>(f);
      const std::size_t ticket = rng.uniform_below(total[fi]);
      const auto it = std::upper_bound(cumulative[fi].begin(),
                                       cumulative[fi].end(), ticket);
      const int bin = static_cast<int>(it - cumulative[fi].begin());
      const Interval bounds = discretizer.bin_bounds(f, bin);
      point[fi] = bounds.lo + rng.uniform01() * (bounds.hi - bounds.lo);
      bins[fi] = bin;
    }
    set.points.push_back(point);
    set.bins.push_back(bins);
  }

  for (std::size_t row = 0; row < rows; ++row) {
    set.probabilities.push_back(checked_proba(model, set.points[row]));
    std::size_t differing = 0;
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::size_t fi = static_cast<std::size_t>(f);
      if (set.bins[row][fi] != instance_bins[fi]) ++differing;
    }
    set.weights.push_back(kernel_weight(
        std::sqrt(static_cast<double>(differing)), kernel_width));
  }
  return set;
}

namespace {

// Gaussian elimination with partial pivoting; `a` is square, `b` the right
// hand side; returns the solution. A tiny ridge is expected to have been
// added by the caller, so pivots stay usable on collinear columns.
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    require(std::abs(a[col][col]) > 0.0, ErrorCode::contract,
            "solve_linear: singular system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

struct InterpretableProblem {
  // Binary same-bin matrix relative to row 0, one column per feature.
  std::vector<std::array<double, kFeatureCount>> z;
  const std::vector<double>* weights = nullptr;
  const std::vector<double>* target = nullptr;
  double weight_total = 0.0;

  // Weighted, centered second moments for the coordinate descent path.
  std::array<double, kFeatureCount> z_mean{};
  double target_mean = 0.0;
  double target_var = 0.0;
  std::array<std::array<double, kFeatureCount>, kFeatureCount> gram{};
  std::array<double, kFeatureCount> cov{};

  explicit InterpretableProblem(const SampleSet& samples)
      : weights(&samples.weights), target(&samples.probabilities) {
    const std::size_t rows = samples.bins.size();
    z.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (int f = 0; f < kFeatureCount; ++f) {
        const std::size_t fi = static_cast<std::size_t>(f);
        z[r][fi] =
            samples.bins[r][fi] == samples.bins[0][fi] ? 1.0 : 0.0;
      }
    }
    for (double w : *weights) weight_total += w;

    for (std::size_t r = 0; r < rows; ++r) {
      const double w = (*weights)[r];
      target_mean += w * (*target)[r];
      for (int f = 0; f < kFeatureCount; ++f) {
        const std::size_t fi = static_cast<std::size_t>(f);
        z_mean[fi] += w * z[r][fi];
      }
    }
    target_mean /= weight_total;
    for (double& m : z_mean) m /= weight_total;

    for (std::size_t r = 0; r < rows; ++r) {
      const double w = (*weights)[r];
      std::array<double, kFeatureCount> centered{};
      for (int f = 0; f < kFeatureCount; ++f) {
        const std::size_t fi = static_cast<std::size_t>(f);
        centered[fi] = z[r][fi] - z_mean[fi];
      }
      const double t = (*target)[r] - target_mean;
      target_var += w * t * t;
      for (int i = 0; i < kFeatureCount; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        cov[ii] += w * centered[ii] * t;
        for (int j = i; j < kFeatureCount; ++j) {
          const std::size_t jj = static_cast<std::size_t>(j);
          gram[ii][jj] += w * centered[ii] * centered[jj];
        }
      }
    }
    for (int i = 0; i < kFeatureCount; ++i) {
      for (int j = i; j < kFeatureCount; ++j) {
        const std::size_t ii = static_cast<std::size_t>(i);
        const std::size_t jj = static_cast<std::size_t>(j);
        gram[ii][jj] /= weight_total;
        gram[jj][ii] = gram[ii][jj];
      }
    }
    for (double& c : cov) c /= weight_total;
    target_var /= weight_total;
  }

  // Unpenalized weighted least squares (with intercept) on a feature
  // subset. A tiny ridge keeps exactly collinear selections solvable.
  void refit(const std::vector<int>& selected, std::vector<double>& out,
             double& intercept) const {
    const std::size_t m = selected.size();
    std::vector<std::vector<double>> normal(
        m + 1, std::vector<double>(m + 1, 0.0));
    std::vector<double> rhs(m + 1, 0.0);
    const std::size_t rows = z.size();
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = (*weights)[r];
      const double y = (*target)[r];
      normal[0][0] += w;
      rhs[0] += w * y;
      for (std::size_t i = 0; i < m; ++i) {
        const double zi = z[r][static_cast<std::size_t>(selected[i])];
        normal[0][i + 1] += w * zi;
        rhs[i + 1] += w * zi * y;
        for (std::size_t j = i; j < m; ++j) {
          normal[i + 1][j + 1] +=
              w * zi * z[r][static_cast<std::size_t>(selected[j])];
        }
      }
    }
    for (std::size_t i = 0; i <= m; ++i) {
      for (std::size_t j = i; j <= m; ++j) normal[j][i] = normal[i][j];
      normal[i][i] += 1e-10 * (1.0 + normal[i][i]);
    }
    const std::vector<double> beta = solve_linear(std::move(normal), rhs);
    intercept = beta[0];
    out.assign(beta.begin() + 1, beta.end());
  }
};

double soft_threshold(double value, double lambda) {
  if (value > lambda) return value - lambda;
  if (value < -lambda) return value + lambda;
  return 0.0;
}

}  // namespace

KLassoSelection k_lasso(const SampleSet& samples, int k) {
  require(k >= 1 && k <= kFeatureCount, ErrorCode::contract,
          "k_lasso: K out of range");
  const std::size_t rows = samples.bins.size();
  require(rows >= 1 && samples.probabilities.size() == rows &&
              samples.weights.size() == rows,
          ErrorCode::contract, "k_lasso: inconsistent SampleSet");
  for (double w : samples.weights) {
    require(w > 0.0 && w <= 1.0, ErrorCode::contract,
            "k_lasso: kernel weights must lie in (0,1]");
  }

  const InterpretableProblem problem(samples);
  KLassoSelection result;

  // A target whose weighted variance is float-rounding noise is constant:
  // empty explanation rather than coefficients fit to that noise.
  if (problem.target_var <= 1e-18) {
    result.fell_short = true;
    return result;
  }

  std::vector<int> varying;
  for (int f = 0; f < kFeatureCount; ++f) {
    if (problem.gram[static_cast<std::size_t>(f)][static_cast<std::size_t>(
            f)] > 0.0) {
      varying.push_back(f);
    }
  }

  if (k == kFeatureCount) {
    // No-selection limit: plain weighted least squares over every column
    // that varies at all.
    result.features = varying;
  } else {
    double lambda_max = 0.0;
    for (int f : varying) {
      lambda_max = std::max(
          lambda_max, std::abs(problem.cov[static_cast<std::size_t>(f)]));
    }
    if (lambda_max <= 0.0) {
      result.fell_short = true;
      return result;
    }

    constexpr int kGridSize = 50;
    constexpr double kGridFloor = 1e-3;
    constexpr double kTolerance = 1e-6;
    constexpr int kMaxSweeps = 1000;
    constexpr int kMaxBisections = 60;

    std::array<double, kFeatureCount> beta{};
    const auto solve_at = [&](double lambda) {
      for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double largest_change = 0.0;
        for (int f : varying) {
          const std::size_t fi = static_cast<std::size_t>(f);
          double rho = problem.cov[fi];
          for (int g : varying) {
            const std::size_t gi = static_cast<std::size_t>(g);
            if (g != f) rho -= problem.gram[fi][gi] * beta[gi];
          }
          const double updated =
              soft_threshold(rho, lambda) / problem.gram[fi][fi];
          largest_change =
              std::max(largest_change, std::abs(updated - beta[fi]));
          beta[fi] = updated;
        }
        if (largest_change < kTolerance) break;
      }
      std::vector<int> active;
      for (int f : varying) {
        if (beta[static_cast<std::size_t>(f)] != 0.0) active.push_back(f);
      }
      return active;
    };

    bool hit_exactly = false;
    std::vector<int> fallback;
    const auto note = [&](const std::vector<int>& active) {
      if (static_cast<int>(active.size()) == k) {
        result.features = active;
        hit_exactly = true;
      } else if (static_cast<int>(active.size()) < k &&
                 active.size() > fallback.size()) {
        fallback = active;
      }
    };

    double previous_lambda = lambda_max;
    std::size_t previous_count = 0;
    std::array<double, kFeatureCount> previous_beta{};
    for (int step = 0; step < kGridSize && !hit_exactly; ++step) {
      const double lambda =
          lambda_max * std::pow(kGridFloor, static_cast<double>(step) /
                                                (kGridSize - 1));
      const std::vector<int> active = solve_at(lambda);
      note(active);
      if (hit_exactly) break;

      if (active.size() > static_cast<std::size_t>(k) &&
          previous_count < static_cast<std::size_t>(k)) {
        // The grid stepped over K: refine between the bracketing penalties
        // by geometric bisection, warm-starting from the sparser side.
        double lo = lambda;            // too many active
        double hi = previous_lambda;   // too few active
        std::array<double, kFeatureCount> hi_beta = previous_beta;
        for (int iter = 0; iter < kMaxBisections && !hit_exactly; ++iter) {
          const double mid = std::sqrt(lo * hi);
          beta = hi_beta;
          const std::vector<int> mid_active = solve_at(mid);
          note(mid_active);
          if (hit_exactly) break;
          if (mid_active.size() < static_cast<std::size_t>(k)) {
            hi = mid;
            hi_beta = beta;
          } else {
            lo = mid;
          }
        }
        // Whether refined or genuinely unreachable (ties), resume the grid
        // from the overshooting penalty.
        beta = {};
        solve_at(lambda);
      }
      previous_lambda = lambda;
      previous_count = active.size();
      previous_beta = beta;
    }
    if (!hit_exactly) {
      result.features = fallback;
      result.fell_short = true;
    }
  }

  if (result.features.empty()) {
    result.fell_short = true;
    return result;
  }
  problem.refit(result.features, result.weights, result.intercept);
  return result;
}

Explanation explain_instance(const BinaryClassifier& model,
                             const CodeUnit& instance,
                             const Discretizer& discretizer, int k, int n,
                             std::uint64_t seed) {
  for (double v : instance.features) {
    require(v >= 0.0 && v <= 1.0, ErrorCode::contract,
            "explain_instance: instance features must be normalized");
  }

  const SampleSet samples =
      generate_samples(instance.features, discretizer, model, n, seed);
  const KLassoSelection selection = k_lasso(samples, k);

  Explanation explanation;
  explanation.unit = instance.name;
  explanation.seed = seed;
  explanation.flagged = selection.fell_short;
  explanation.intercept = selection.intercept;

  for (std::size_t i = 0; i < selection.features.size(); ++i) {
    ExplanationEntry entry;
    entry.feature = selection.features[i];
    entry.weight = selection.weights[i];
    const double value =
        instance.features[static_cast<std::size_t>(entry.feature)];
    entry.interval = discretizer.bin_bounds(
        entry.feature, discretizer.bin_of(entry.feature, value));
    explanation.entries.push_back(entry);
  }
  std::stable_sort(explanation.entries.begin(), explanation.entries.end(),
                   [](const ExplanationEntry& a, const ExplanationEntry& b) {
                     const double ma = std::abs(a.weight);
                     const double mb = std::abs(b.weight);
                     if (ma != mb) return ma > mb;
                     return a.feature < b.feature;
                   });

  // Weighted R^2 of the surrogate over the whole sample set.
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double mean = 0.0;
  double weight_total = 0.0;
  for (std::size_t r = 0; r < samples.weights.size(); ++r) {
    mean += samples.weights[r] * samples.probabilities[r];
    weight_total += samples.weights[r];
  }
  mean /= weight_total;
  for (std::size_t r = 0; r < samples.weights.size(); ++r) {
    double predicted = selection.intercept;
    for (std::size_t i = 0; i < selection.features.size(); ++i) {
      const std::size_t fi =
          static_cast<std::size_t>(selection.features[i]);
      if (samples.bins[r][fi] == samples.bins[0][fi]) {
        predicted += selection.weights[i];
      }
    }
    const double err = samples.probabilities[r] - predicted;
    const double dev = samples.probabilities[r] - mean;
    ss_res += samples.weights[r] * err * err;
    ss_tot += samples.weights[r] * dev * dev;
  }
  if (ss_tot <= weight_total * 1e-18) {
    explanation.fidelity_raw = 0.0;  // constant target: R^2 by convention 0
  } else {
    explanation.fidelity_raw = 1.0 - ss_res / ss_tot;
  }
  explanation.fidelity = std::clamp(explanation.fidelity_raw, 0.0, 1.0);
  return explanation;
}

std::string Explanation::to_json() const {
  nlohmann::json record;
  record["unit"] = unit;
  nlohmann::json list = nlohmann::json::array();
  for (const ExplanationEntry& entry : entries) {
    nlohmann::json e;
    e["feature"] =
        std::string(kFeatureNames[static_cast<std::size_t>(entry.feature)]);
    e["weight"] = entry.weight;
    e["lo"] = entry.interval.lo;
    e["hi"] = entry.interval.hi;
    list.push_back(std::move(e));
  }
  record["entries"] = std::move(list);
  record["intercept"] = intercept;
  record["fidelity"] = fidelity;
  record["fidelity_raw"] = fidelity_raw;
  record["seed"] = seed;
  record["flagged"] = flagged;
  return record.dump();
}

}  // namespace defplan
