#include "core/synthdata.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace defplan {

namespace {

// Churn features drift release to release and drop when bugs get fixed;
// sticky features separate risky files but never move; the rest is noise.
constexpr std::array<int, 5> kChurn = {0, 4, 10, 14, 18};
constexpr std::array<int, 5> kSticky = {3, 5, 7, 11, 15};

constexpr double kDrift = 0.18;  // population-wide churn shift, x -> y

// Raw scale per metric, so the CSVs look like code measures rather than
// unit-box values. The pipeline normalizes them away.
constexpr std::array<double, kFeatureCount> kScale = {
    120.0, 8.0,  12.0,   40.0, 200.0, 400.0, 30.0, 35.0, 60.0, 2.0,
    4000.0, 1.0, 15.0,   1.0,  1.0,   6.0,   20.0, 80.0, 25.0, 6.0};

bool contains(const std::array<int, 5>& set, int feature) {
  return std::find(set.begin(), set.end(), feature) != set.end();
}

// Stable per-(project, unit, feature, tag) uniform draw.
double hash_uniform(const std::string& project, int unit, int feature,
                    int tag) {
  std::uint64_t s = fnv1a64(project);
  s = splitmix64(s + static_cast<std::uint64_t>(unit));
  s = splitmix64(s + static_cast<std::uint64_t>(feature));
  s = splitmix64(s + static_cast<std::uint64_t>(tag));
  return static_cast<double>(s >> 11) * 0x1.0p-53;
}

double low_level(double u) { return 0.08 + 0.25 * u; }
double high_level(double u) { return 0.62 + 0.33 * u; }

// How the roster totals split into the three releases and the unit
// archetypes inside the shared roster prefix:
//   [0, rf)            buggy in y, fixed in z (churn drops)
//   [rf, b_y - quiet)  buggy in y, stuck in z (churn stays high)
//   [b_y - quiet, b_y) buggy in y but quiet -> predicted clean, skipped
//   [n - fresh, n)     clean in y, newly buggy in z
struct Counts {
  int n = 0;
  int extra_x = 0;
  int extra_y = 0;
  int b_x = 0;
  int b_y = 0;
  int b_z = 0;
  int quiet = 0;
  int rf = 0;
  int rs = 0;
  int fresh = 0;
};

Counts plan_counts(const FixtureProject& project) {
  Counts c;
  c.n = project.files / 3;
  int extras = project.files - 3 * c.n;
  c.extra_x = extras >= 1 ? 1 : 0;
  c.extra_y = extras == 2 ? 1 : 0;
  c.b_x = project.buggy / 3 + (project.buggy % 3 >= 1 ? 1 : 0);
  c.b_y = project.buggy / 3 + (project.buggy % 3 == 2 ? 1 : 0);
  c.b_z = project.buggy / 3;
  c.quiet = std::max(2, c.b_y / 10);
  int eligible = c.b_y - c.quiet;
  c.rf = std::min(3 * eligible / 4, c.n - c.b_z);
  c.rs = eligible - c.rf;
  c.fresh = c.b_z - c.rs - c.quiet;
  require(c.rf >= 1 && c.rs >= 0 && c.fresh >= 0 &&
              c.fresh <= c.n - c.b_y,
          ErrorCode::contract,
          "fixture counts are inconsistent for " + project.name);
  require(c.b_x >= 2 && c.n - c.b_x >= 2, ErrorCode::contract,
          "fixture training release needs both classes: " + project.name);
  return c;
}

bool in_quiet(const Counts& c, int i) {
  return i >= c.b_y - c.quiet && i < c.b_y;
}
bool in_fixed(const Counts& c, int i) { return i < c.rf; }
bool in_stuck(const Counts& c, int i) {
  return i >= c.rf && i < c.b_y - c.quiet;
}
bool in_fresh(const Counts& c, int i) { return i >= c.n - c.fresh; }

double intent_value(const std::string& project, const Counts& c, int i,
                    int feature, int release) {
  double u = hash_uniform(project, i, feature, 0);
  double jitter =
      (hash_uniform(project, i, feature, 16 + release) - 0.5) * 0.02;
  double v;
  if (contains(kChurn, feature)) {
    if (release == 0) {
      v = i < c.b_x ? high_level(u) : low_level(u);
    } else if (release == 1) {
      if (in_quiet(c, i)) {
        v = 0.02 + 0.10 * u;
      } else {
        v = (i < c.b_y ? high_level(u) : low_level(u)) + kDrift;
      }
    } else {
      if (in_fixed(c, i)) {
        v = 0.02 + 0.12 * hash_uniform(project, i, feature, 1);
      } else if (in_stuck(c, i) || in_fresh(c, i)) {
        v = high_level(u);
      } else if (in_quiet(c, i)) {
        v = 0.02 + 0.10 * u;
      } else {
        v = low_level(u);
      }
    }
    v += jitter;
  } else if (contains(kSticky, feature)) {
    bool hot = i < c.b_x && !in_quiet(c, i);
    v = (hot ? high_level(u) : low_level(u)) + 0.5 * jitter;
  } else {
    v = u + jitter;
  }
  return std::clamp(v, 0.0, 1.0);
}

int bug_count(const Counts& c, int i, int release) {
  if (release == 0) {
    return i < c.b_x ? 1 + i % 2 : 0;
  }
  if (release == 1) {
    if (in_fixed(c, i)) return 1 + i % 3;
    if (i < c.b_y) return 1 + i % 2;  // stuck and quiet units
    return 0;
  }
  if (in_stuck(c, i)) {
    int before = 1 + i % 2;
    return (i - c.rf) % 2 == 0 ? before : before + 1;
  }
  if (in_quiet(c, i)) return 1 + i % 2;
  if (in_fresh(c, i)) return 1;
  return 0;
}

std::string unit_name(const std::string& project, int i) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d", i);
  return "src/" + project + "/Module" + buffer + ".java";
}

CodeUnit make_unit(const std::string& project, const Counts& c, int i,
                   int release, std::string name) {
  FeatureVector features{};
  for (int f = 0; f < kFeatureCount; ++f) {
    features[static_cast<std::size_t>(f)] =
        intent_value(project, c, i, f, release) *
        kScale[static_cast<std::size_t>(f)];
  }
  return CodeUnit{std::move(name), features, bug_count(c, i, release)};
}

}  // namespace

const std::vector<FixtureProject>& fixture_roster() {
  static const std::vector<FixtureProject> roster = {
      {"jedit", {"4.0", "4.1", "4.2"}, 985, 233},
      {"camel", {"1.2", "1.4", "1.6"}, 2445, 506},
      {"xalan", {"2.5", "2.6", "2.7"}, 2597, 1209},
      {"ant", {"1.5", "1.6", "1.7"}, 1389, 216},
      {"lucene", {"2.0", "2.2", "2.4"}, 782, 379},
      {"velocity", {"1.4", "1.5", "1.6"}, 639, 431},
      {"poi", {"1.5", "2.5", "3.0"}, 1064, 637},
      {"synapse", {"1.0", "1.1", "1.2"}, 635, 136},
  };
  return roster;
}

ReleaseDataset make_fixture_release(const FixtureProject& project,
                                    int release_index) {
  require(release_index >= 0 && release_index < 3, ErrorCode::contract,
          "release index outside 0..2");
  Counts c = plan_counts(project);
  std::vector<CodeUnit> units;
  units.reserve(static_cast<std::size_t>(c.n) + 1);
  for (int i = 0; i < c.n; ++i) {
    units.push_back(
        make_unit(project.name, c, i, release_index,
                  unit_name(project.name, i)));
  }
  // Roster remainders: one-off clean units outside the aligned roster.
  if (release_index == 0 && c.extra_x == 1) {
    units.push_back(make_unit(project.name, c, c.n, 0,
                              "src/" + project.name + "/ExtraA.java"));
  }
  if (release_index == 1 && c.extra_y == 1) {
    units.push_back(make_unit(project.name, c, c.n + 1, 1,
                              "src/" + project.name + "/ExtraB.java"));
  }
  return ReleaseDataset(project.name, project.versions[
                            static_cast<std::size_t>(release_index)],
                        std::move(units));
}

std::string release_to_csv(const ReleaseDataset& release) {
  std::string out = "name";
  for (std::string_view feature : kFeatureNames) {
    out += ',';
    out += feature;
  }
  out += ",bug\n";
  for (const CodeUnit& unit : release.units()) {
    out += csv_field(unit.name);
    for (double value : unit.features) {
      out += ',';
      out += format_double(value);
    }
    out += ',';
    out += std::to_string(unit.bug_count);
    out += '\n';
  }
  return out;
}

void write_fixture_data(const std::filesystem::path& root) {
  for (const FixtureProject& project : fixture_roster()) {
    std::filesystem::create_directories(root / project.name);
    for (int r = 0; r < 3; ++r) {
      ReleaseDataset release = make_fixture_release(project, r);
      std::filesystem::path path =
          dataset_path(root, project.name, release.version());
      std::ofstream out(path, std::ios::binary);
      require(out.good(), ErrorCode::io,
              "cannot open " + path.string() + " for writing");
      out << release_to_csv(release);
      out.flush();
      require(out.good(), ErrorCode::io, "write failed: " + path.string());
    }
  }
}

}  // namespace defplan
