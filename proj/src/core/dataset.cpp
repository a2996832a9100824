#include "core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace defplan {
namespace {

// Splits one CSV record. Minimal quoting support: a field wrapped in double
// quotes may contain commas; "" inside quotes is a literal quote.
std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t line_no, std::string_view column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    fail(ErrorCode::parse, path + ":" + std::to_string(line_no) +
                               ": column '" + std::string(column) +
                               "' has non-numeric value '" + cell + "'");
  }
  return value;
}

}  // namespace

ReleaseDataset::ReleaseDataset(std::string project, std::string version,
                               std::vector<CodeUnit> units)
    : project_(std::move(project)),
      version_(std::move(version)),
      units_(std::move(units)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(units_.size());
  for (const CodeUnit& unit : units_) {
    require(!unit.name.empty(), ErrorCode::schema,
            project_ + " " + version_ + ": unit with empty name");
    require(seen.insert(unit.name).second, ErrorCode::schema,
            project_ + " " + version_ + ": duplicate unit name '" + unit.name +
                "'");
    require(unit.bug_count >= 0, ErrorCode::contract,
            "negative bug count for unit '" + unit.name + "'");
    for (double v : unit.features) {
      require(std::isfinite(v), ErrorCode::contract,
              "non-finite metric for unit '" + unit.name + "'");
    }
  }
}

std::size_t ReleaseDataset::defective_count() const {
  return static_cast<std::size_t>(
      std::count_if(units_.begin(), units_.end(),
                    [](const CodeUnit& u) { return u.defective(); }));
}

const CodeUnit* ReleaseDataset::find(std::string_view name) const {
  for (const CodeUnit& unit : units_) {
    if (unit.name == name) return &unit;
  }
  return nullptr;
}

std::string dataset_path(const std::string& root, const std::string& project,
                         const std::string& version) {
  return root + "/" + project + "/" + version + ".csv";
}

ReleaseDataset load_release_csv(const std::string& path,
                                const std::string& project,
                                const std::string& version) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "'");

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::schema,
          path + ": empty file, expected a header row");

  // Map required column names to their positions in this file.
  const std::vector<std::string> header = split_csv_record(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (position.count(name)) {
      fail(ErrorCode::schema, path + ": duplicate column '" + name + "'");
    }
    position.emplace(name, i);
  }
  std::vector<std::string> missing;
  auto locate = [&](std::string_view name) -> std::size_t {
    auto it = position.find(std::string(name));
    if (it == position.end()) {
      missing.emplace_back(name);
      return 0;
    }
    return it->second;
  };
  const std::size_t name_col = locate("name");
  std::array<std::size_t, kFeatureCount> metric_col{};
  for (int f = 0; f < kFeatureCount; ++f) {
    metric_col[static_cast<std::size_t>(f)] =
        locate(kFeatureNames[static_cast<std::size_t>(f)]);
  }
  const std::size_t bug_col = locate("bug");
  if (!missing.empty()) {
    std::string list;
    for (const std::string& m : missing) {
      if (!list.empty()) list += ", ";
      list += m;
    }
    fail(ErrorCode::schema, path + ": missing required columns: " + list);
  }

  std::vector<CodeUnit> units;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_record(line);
    if (fields.size() != header.size()) {
      fail(ErrorCode::parse,
           path + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(header.size()) + " fields, found " +
               std::to_string(fields.size()));
    }
    CodeUnit unit;
    unit.name = trim(fields[name_col]);
    require(!unit.name.empty(), ErrorCode::parse,
            path + ":" + std::to_string(line_no) + ": empty unit name");
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::size_t col = metric_col[static_cast<std::size_t>(f)];
      unit.features[static_cast<std::size_t>(f)] =
          parse_cell(trim(fields[col]), path, line_no,
                     kFeatureNames[static_cast<std::size_t>(f)]);
    }
    const double bug = parse_cell(trim(fields[bug_col]), path, line_no, "bug");
    if (bug < 0.0 || bug != std::floor(bug)) {
      fail(ErrorCode::parse, path + ":" + std::to_string(line_no) +
                                 ": column 'bug' must be a non-negative "
                                 "integer, found '" +
                                 trim(fields[bug_col]) + "'");
    }
    unit.bug_count = static_cast<int>(bug);
    units.push_back(std::move(unit));
  }

  try {
    return ReleaseDataset(project, version, std::move(units));
  } catch (const Error& e) {
    // Re-attach file context to construction-time validation failures.
    fail(e.code() == ErrorCode::contract ? ErrorCode::parse : e.code(),
         path + ": " + e.what());
  }
}

AlignedTriple align_releases(const ReleaseDataset& x, const ReleaseDataset& y,
                             const ReleaseDataset& z) {
  require(x.project() == y.project() && y.project() == z.project(),
          ErrorCode::contract, "align_releases: releases from mixed projects");

  auto index_names = [](const ReleaseDataset& r) {
    std::unordered_map<std::string_view, const CodeUnit*> map;
    map.reserve(r.size());
    for (const CodeUnit& unit : r.units()) map.emplace(unit.name, &unit);
    return map;
  };
  const auto in_y = index_names(y);
  const auto in_z = index_names(z);

  std::vector<std::string_view> shared;
  for (const CodeUnit& unit : x.units()) {
    if (in_y.count(unit.name) && in_z.count(unit.name)) {
      shared.push_back(unit.name);
    }
  }
  require(!shared.empty(), ErrorCode::alignment,
          x.project() + ": no unit appears in all of " + x.version() + ", " +
              y.version() + ", " + z.version());
  std::sort(shared.begin(), shared.end());

  auto restrict_sorted = [&](const ReleaseDataset& r) {
    std::vector<CodeUnit> units;
    units.reserve(shared.size());
    for (std::string_view name : shared) units.push_back(*r.find(name));
    return ReleaseDataset(r.project(), r.version(), std::move(units));
  };
  return AlignedTriple{restrict_sorted(x), restrict_sorted(y),
                       restrict_sorted(z)};
}

std::size_t Normalizer::check_index(int feature) {
  require(feature >= 0 && feature < kFeatureCount, ErrorCode::contract,
          "feature index out of range");
  return static_cast<std::size_t>(feature);
}

Normalizer Normalizer::fit(const ReleaseDataset& release) {
  require(release.size() > 0, ErrorCode::contract,
          "Normalizer::fit: empty release");
  Normalizer n;
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::size_t i = static_cast<std::size_t>(f);
    double lo = release.units().front().features[i];
    double hi = lo;
    for (const CodeUnit& unit : release.units()) {
      lo = std::min(lo, unit.features[i]);
      hi = std::max(hi, unit.features[i]);
    }
    n.min_[i] = lo;
    n.max_[i] = hi;
  }
  return n;
}

double Normalizer::transform_one(int feature, double value) const {
  const std::size_t i = check_index(feature);
  const double span = max_[i] - min_[i];
  if (span <= 0.0) return 0.0;
  return std::clamp((value - min_[i]) / span, 0.0, 1.0);
}

FeatureVector Normalizer::transform(const FeatureVector& features) const {
  FeatureVector out{};
  for (int f = 0; f < kFeatureCount; ++f) {
    out[static_cast<std::size_t>(f)] =
        transform_one(f, features[static_cast<std::size_t>(f)]);
  }
  return out;
}

ReleaseDataset Normalizer::apply(const ReleaseDataset& release) const {
  std::vector<CodeUnit> units = release.units();
  for (CodeUnit& unit : units) unit.features = transform(unit.features);
  return ReleaseDataset(release.project(), release.version(),
                        std::move(units));
}

ReleaseDataset smote(const ReleaseDataset& training, int k_neighbors,
                     std::uint64_t seed) {
  require(k_neighbors > 0, ErrorCode::contract,
          "smote: k_neighbors must be positive");

  std::vector<const CodeUnit*> defective;
  std::vector<const CodeUnit*> clean;
  for (const CodeUnit& unit : training.units()) {
    (unit.defective() ? defective : clean).push_back(&unit);
  }
  if (defective.size() == clean.size()) return training;

  const bool minority_defective = defective.size() < clean.size();
  const std::vector<const CodeUnit*>& minority =
      minority_defective ? defective : clean;
  const std::size_t need =
      (minority_defective ? clean.size() : defective.size()) - minority.size();
  require(minority.size() >= 2, ErrorCode::rebalance,
          training.project() + " " + training.version() +
              ": minority class has fewer than 2 units, cannot oversample");

  const std::size_t k_eff =
      std::min(static_cast<std::size_t>(k_neighbors), minority.size() - 1);

  // Nearest minority neighbors of each minority unit, by Euclidean distance
  // with index order breaking ties.
  auto distance2 = [](const FeatureVector& a, const FeatureVector& b) {
    double d2 = 0.0;
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::size_t i = static_cast<std::size_t>(f);
      const double d = a[i] - b[i];
      d2 += d * d;
    }
    return d2;
  };
  std::vector<std::vector<std::size_t>> neighbors(minority.size());
  for (std::size_t i = 0; i < minority.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(minority.size() - 1);
    for (std::size_t j = 0; j < minority.size(); ++j) {
      if (j == i) continue;
      order.emplace_back(
          distance2(minority[i]->features, minority[j]->features), j);
    }
    std::sort(order.begin(), order.end());
    neighbors[i].reserve(k_eff);
    for (std::size_t n = 0; n < k_eff; ++n) {
      neighbors[i].push_back(order[n].second);
    }
  }

  Rng rng(seed);
  std::vector<CodeUnit> units = training.units();
  units.reserve(units.size() + need);
  for (std::size_t s = 0; s < need; ++s) {
    const std::size_t base = s % minority.size();
    const std::size_t pick = neighbors[base][rng.uniform_below(k_eff)];
    const double t = rng.uniform01();
    CodeUnit synthetic;
    synthetic.name = "~smote" + std::to_string(s);
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::size_t i = static_cast<std::size_t>(f);
      const double p = minority[base]->features[i];
      const double q = minority[pick]->features[i];
      synthetic.features[i] = p + t * (q - p);
    }
    synthetic.bug_count = minority_defective ? 1 : 0;
    units.push_back(std::move(synthetic));
  }
  return ReleaseDataset(training.project(), training.version(),
                        std::move(units));
}

}  // namespace defplan
