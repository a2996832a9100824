#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace defplan {

// One project of the bundled synthetic corpus: three consecutive releases
// whose combined file and buggy-file counts match the published roster.
struct FixtureProject {
  std::string name;
  std::array<std::string, 3> versions;
  int files = 0;   // units summed over the three releases
  int buggy = 0;   // buggy units summed over the three releases
};

// The eight-project roster.
const std::vector<FixtureProject>& fixture_roster();

// Deterministic release generator (release_index 0..2). The data plants
// the structure the planners are evaluated on: five churn features drift
// between the first two releases and drop for units whose bugs get fixed,
// five sticky complexity features separate the classes without moving,
// and the rest is noise.
ReleaseDataset make_fixture_release(const FixtureProject& project,
                                    int release_index);

// CSV round-trip of a release (canonical column order: name, the twenty
// metrics, bug).
std::string release_to_csv(const ReleaseDataset& release);

// Writes <root>/<project>/<version>.csv for the whole roster.
void write_fixture_data(const std::filesystem::path& root);

}  // namespace defplan
