#include "core/precedence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace defplan {
namespace {

double mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

double sample_std(std::span<const double> values) {
  require(!values.empty(), ErrorCode::contract, "sample_std: empty sample");
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double pooled_std(std::size_t n1, double s1, std::size_t n2, double s2) {
  require(s1 >= 0.0 && s2 >= 0.0, ErrorCode::contract,
          "pooled_std: negative spread");
  require(n1 + n2 > 2, ErrorCode::undefined_effect,
          "pooled_std: needs more than two observations in total");
  const double num = static_cast<double>(n1 - 1) * s1 * s1 +
                     static_cast<double>(n2 - 1) * s2 * s2;
  return std::sqrt(num / static_cast<double>(n1 + n2 - 2));
}

double hedges_g(std::span<const double> values_x,
                std::span<const double> values_y) {
  require(!values_x.empty() && !values_y.empty(), ErrorCode::contract,
          "hedges_g: empty sample");
  const double diff = mean(values_x) - mean(values_y);
  const double sp = pooled_std(values_x.size(), sample_std(values_x),
                               values_y.size(), sample_std(values_y));
  if (sp == 0.0) {
    if (diff == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / sp;
}

bool PrecedenceProfile::is_precedented(int feature) const {
  return std::find(precedented.begin(), precedented.end(), feature) !=
         precedented.end();
}

PrecedenceProfile build_profile(const ReleaseDataset& x,
                                const ReleaseDataset& y, int m) {
  require(m >= 1 && m <= kFeatureCount, ErrorCode::contract,
          "build_profile: M out of range");
  require(x.size() == y.size() && x.size() > 0, ErrorCode::contract,
          "build_profile: releases are not aligned");
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x.units()[i].name == y.units()[i].name, ErrorCode::contract,
            "build_profile: releases are not aligned");
  }

  PrecedenceProfile profile;
  profile.m = m;
  std::vector<double> vx(x.size());
  std::vector<double> vy(y.size());
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::size_t fi = static_cast<std::size_t>(f);
    for (std::size_t i = 0; i < x.size(); ++i) {
      vx[i] = x.units()[i].features[fi];
      vy[i] = y.units()[i].features[fi];
    }
    profile.effect[fi] = hedges_g(vx, vy);
  }

  profile.ranking.resize(kFeatureCount);
  std::iota(profile.ranking.begin(), profile.ranking.end(), 0);
  std::stable_sort(profile.ranking.begin(), profile.ranking.end(),
                   [&](int a, int b) {
                     const double ga =
                         std::abs(profile.effect[static_cast<std::size_t>(a)]);
                     const double gb =
                         std::abs(profile.effect[static_cast<std::size_t>(b)]);
                     if (ga != gb) return ga > gb;
                     return a < b;
                   });
  profile.precedented.assign(profile.ranking.begin(),
                             profile.ranking.begin() + m);
  return profile;
}

std::string profile_to_csv(const PrecedenceProfile& profile) {
  std::string out = "feature,g,rank,precedented\n";
  std::array<int, kFeatureCount> rank_of{};
  for (int r = 0; r < kFeatureCount; ++r) {
    rank_of[static_cast<std::size_t>(profile.ranking[static_cast<std::size_t>(
        r)])] = r + 1;
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::size_t fi = static_cast<std::size_t>(f);
    out += std::string(kFeatureNames[fi]) + "," +
           format_double(profile.effect[fi]) + "," +
           std::to_string(rank_of[fi]) + "," +
           (profile.is_precedented(f) ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace defplan
