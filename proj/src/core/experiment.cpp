#include "core/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace defplan {

namespace {

constexpr std::array<std::string_view, 14> kScalarKeys = {
    "data_root",       "output_dir", "planners",  "m",
    "k",               "samples",    "p_change",  "smote_neighbors",
    "trees",           "max_depth",  "features_per_split",
    "min_leaf",        "seed",       "overlap"};

std::string trim(std::string_view text) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  std::size_t end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split(const std::string& text, char separator) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(separator, start);
    if (pos == std::string::npos) {
      parts.push_back(trim(std::string_view(text).substr(start)));
      return parts;
    }
    parts.push_back(
        trim(std::string_view(text).substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream stream(text);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T parsed{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, parsed);
  require(ec == std::errc{} && ptr == end, ErrorCode::config,
          "key \"" + key + "\": cannot parse \"" + value + "\"");
  return parsed;
}

double parse_probability(const std::string& key, const std::string& value) {
  double parsed = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, parsed);
  require(ec == std::errc{} && ptr == end, ErrorCode::config,
          "key \"" + key + "\": cannot parse \"" + value + "\"");
  return parsed;
}

std::string hex_seed(std::uint64_t seed) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "0x%016llx",
                static_cast<unsigned long long>(seed));
  return buffer;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io,
          "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  require(out.good(), ErrorCode::io, "write failed: " + path.string());
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;

  std::istringstream stream(text);
  std::string raw_line;
  int line_number = 0;
  while (std::getline(stream, raw_line)) {
    ++line_number;
    std::string line = raw_line;
    std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    // Repeatable roster lines come first; everything else is key = value.
    std::vector<std::string> tokens = whitespace_tokens(line);
    if (!tokens.empty() && tokens[0] == "project") {
      require(tokens.size() == 5, ErrorCode::config,
              "line " + std::to_string(line_number) +
                  ": project expects <name> <vx> <vy> <vz>");
      config.projects.push_back(ProjectTriple{
          tokens[1], {tokens[2], tokens[3], tokens[4]}});
      continue;
    }

    std::size_t equals = line.find('=');
    require(equals != std::string::npos, ErrorCode::config,
            "line " + std::to_string(line_number) +
                ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, equals));
    std::string value = trim(std::string_view(line).substr(equals + 1));
    require(!key.empty(), ErrorCode::config,
            "line " + std::to_string(line_number) + ": empty key");

    bool known = std::find(kScalarKeys.begin(), kScalarKeys.end(), key) !=
                 kScalarKeys.end();
    require(known, ErrorCode::config,
            "line " + std::to_string(line_number) + ": unknown key \"" +
                key + "\"");
    require(seen.insert(key).second, ErrorCode::config,
            "line " + std::to_string(line_number) + ": duplicate key \"" +
                key + "\"");
    require(!value.empty(), ErrorCode::config,
            "line " + std::to_string(line_number) + ": key \"" + key +
                "\" has no value");

    if (key == "data_root") {
      config.data_root = value;
    } else if (key == "output_dir") {
      config.output_dir = value;
    } else if (key == "planners") {
      std::vector<PlannerId> planners;
      for (const std::string& item : split(value, ',')) {
        require(!item.empty(), ErrorCode::config,
                "key \"planners\": empty entry");
        PlannerId id = planner_from_name(item);
        require(std::find(planners.begin(), planners.end(), id) ==
                    planners.end(),
                ErrorCode::config,
                "key \"planners\": duplicate \"" + item + "\"");
        planners.push_back(id);
      }
      config.planners = std::move(planners);
    } else if (key == "m") {
      config.ktest.m = parse_number<int>(key, value);
      require(config.ktest.m >= 1 && config.ktest.m <= kFeatureCount,
              ErrorCode::config, "key \"m\": outside [1,20]");
    } else if (key == "k") {
      config.ktest.k = parse_number<int>(key, value);
      require(config.ktest.k >= 1 && config.ktest.k <= kFeatureCount,
              ErrorCode::config, "key \"k\": outside [1,20]");
    } else if (key == "samples") {
      config.ktest.samples = parse_number<int>(key, value);
      require(config.ktest.samples >= 1, ErrorCode::config,
              "key \"samples\": must be positive");
    } else if (key == "p_change") {
      config.ktest.p_change = parse_probability(key, value);
      require(config.ktest.p_change >= 0.0 && config.ktest.p_change <= 1.0,
              ErrorCode::config, "key \"p_change\": outside [0,1]");
    } else if (key == "smote_neighbors") {
      config.ktest.smote_neighbors = parse_number<int>(key, value);
      require(config.ktest.smote_neighbors >= 1, ErrorCode::config,
              "key \"smote_neighbors\": must be positive");
    } else if (key == "trees") {
      config.ktest.forest.tree_count = parse_number<int>(key, value);
      require(config.ktest.forest.tree_count >= 1, ErrorCode::config,
              "key \"trees\": must be positive");
    } else if (key == "max_depth") {
      int depth = parse_number<int>(key, value);
      require(depth >= 0, ErrorCode::config,
              "key \"max_depth\": must be >= 0 (0 = unlimited)");
      if (depth == 0) {
        config.ktest.forest.max_depth.reset();
      } else {
        config.ktest.forest.max_depth = depth;
      }
    } else if (key == "features_per_split") {
      config.ktest.forest.features_per_split = parse_number<int>(key, value);
      require(config.ktest.forest.features_per_split >= 1 &&
                  config.ktest.forest.features_per_split <= kFeatureCount,
              ErrorCode::config,
              "key \"features_per_split\": outside [1,20]");
    } else if (key == "min_leaf") {
      config.ktest.forest.min_leaf = parse_number<int>(key, value);
      require(config.ktest.forest.min_leaf >= 1, ErrorCode::config,
              "key \"min_leaf\": must be positive");
    } else if (key == "seed") {
      config.ktest.master_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "overlap") {
      if (value == "containment") {
        config.ktest.overlap_mode = OverlapMode::containment;
      } else if (value == "strict_jaccard") {
        config.ktest.overlap_mode = OverlapMode::strict_jaccard;
      } else {
        fail(ErrorCode::config,
             "key \"overlap\": expected containment or strict_jaccard");
      }
    }
  }

  require(!config.planners.empty(), ErrorCode::config,
          "planner list is empty");
  std::set<std::string> project_names;
  for (const ProjectTriple& project : config.projects) {
    require(project_names.insert(project.name).second, ErrorCode::config,
            "project \"" + project.name + "\" listed twice");
    require(project.versions[0] != project.versions[1] &&
                project.versions[1] != project.versions[2] &&
                project.versions[0] != project.versions[2],
            ErrorCode::config,
            "project \"" + project.name + "\": versions must be distinct");
  }

  for (std::string_view key : kScalarKeys) {
    if (seen.count(std::string(key)) == 0) {
      config.defaulted.push_back(std::string(key));
    }
  }
  return config;
}

ExperimentConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io,
          "cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void filter_project(ExperimentConfig& config, const std::string& name) {
  auto it = std::find_if(config.projects.begin(), config.projects.end(),
                         [&name](const ProjectTriple& project) {
                           return project.name == name;
                         });
  require(it != config.projects.end(), ErrorCode::config,
          "project \"" + name + "\" is not part of this run");
  ProjectTriple kept = *it;
  config.projects = {kept};
}

void filter_planner(ExperimentConfig& config, const std::string& name) {
  PlannerId id = planner_from_name(name);
  auto it =
      std::find(config.planners.begin(), config.planners.end(), id);
  require(it != config.planners.end(), ErrorCode::config,
          "planner \"" + name + "\" is not part of this run");
  config.planners = {id};
}

int run_experiment(const ExperimentConfig& config) {
  require(!config.planners.empty(), ErrorCode::config,
          "planner list is empty");

  // Fail on absent inputs before any computation starts.
  std::vector<std::string> missing;
  for (const ProjectTriple& project : config.projects) {
    for (const std::string& version : project.versions) {
      std::filesystem::path path =
          dataset_path(config.data_root, project.name, version);
      if (!std::filesystem::exists(path)) missing.push_back(path.string());
    }
  }
  if (!missing.empty()) {
    std::string joined;
    for (const std::string& path : missing) {
      if (!joined.empty()) joined += ", ";
      joined += path;
    }
    fail(ErrorCode::io, "missing data files: " + joined);
  }

  std::filesystem::create_directories(config.output_dir);

  std::string log;
  log += "experiment configuration\n";
  auto echo = [&config, &log](const std::string& key,
                              const std::string& value) {
    bool defaulted =
        std::find(config.defaulted.begin(), config.defaulted.end(), key) !=
        config.defaulted.end();
    log += "  " + key + " = " + value +
           (defaulted ? "  (default)" : "") + "\n";
  };
  echo("data_root", config.data_root.string());
  echo("output_dir", config.output_dir.string());
  {
    std::string names;
    for (PlannerId planner : config.planners) {
      if (!names.empty()) names += ",";
      names += planner_name(planner);
    }
    echo("planners", names);
  }
  echo("m", std::to_string(config.ktest.m));
  echo("k", std::to_string(config.ktest.k));
  echo("samples", std::to_string(config.ktest.samples));
  echo("p_change", format_double(config.ktest.p_change));
  echo("smote_neighbors", std::to_string(config.ktest.smote_neighbors));
  echo("trees", std::to_string(config.ktest.forest.tree_count));
  echo("max_depth",
       config.ktest.forest.max_depth.has_value()
           ? std::to_string(*config.ktest.forest.max_depth)
           : std::string("0"));
  echo("features_per_split",
       std::to_string(config.ktest.forest.features_per_split));
  echo("min_leaf", std::to_string(config.ktest.forest.min_leaf));
  echo("seed", hex_seed(config.ktest.master_seed));
  echo("overlap", config.ktest.overlap_mode == OverlapMode::containment
                      ? "containment"
                      : "strict_jaccard");
  for (const ProjectTriple& project : config.projects) {
    log += "  project " + project.name + " " + project.versions[0] + " " +
           project.versions[1] + " " + project.versions[2] + "\n";
  }

  std::string summary_csv =
      "project,planner,records,skipped,failed,mean_plan_size,mean_overlap,"
      "s,s_scaled\n";
  bool any_failed = false;

  for (const ProjectTriple& project : config.projects) {
    log += "project " + project.name + "\n";
    try {
      ReleaseDataset x = load_release_csv(
          dataset_path(config.data_root, project.name, project.versions[0]),
          project.name, project.versions[0]);
      ReleaseDataset y = load_release_csv(
          dataset_path(config.data_root, project.name, project.versions[1]),
          project.name, project.versions[1]);
      ReleaseDataset z = load_release_csv(
          dataset_path(config.data_root, project.name, project.versions[2]),
          project.name, project.versions[2]);
      AlignedTriple triple = align_releases(x, y, z);

      KTestPipeline pipeline(triple.x, triple.y, config.ktest);
      log += "  rebalance seed " + hex_seed(pipeline.rebalance_seed()) +
             "\n";
      log += "  forest seed " + hex_seed(pipeline.forest_seed()) + "\n";

      std::filesystem::path project_dir = config.output_dir / project.name;
      std::filesystem::create_directories(project_dir);
      write_text_file(project_dir / "profile.csv",
                      profile_to_csv(pipeline.profile()));

      std::string explanations;
      for (const KTestPipeline::UnitOutcome& outcome :
           pipeline.outcomes()) {
        if (outcome.explanation.has_value()) {
          log += "  unit " + outcome.unit + " seed " +
                 hex_seed(outcome.explanation->seed) + "\n";
          explanations += outcome.explanation->to_json();
          explanations += '\n';
        } else if (outcome.failed) {
          log += "  unit " + outcome.unit + " FAILED: " + outcome.note +
                 "\n";
        } else {
          log += "  unit " + outcome.unit + " skipped (predicted clean)\n";
        }
      }
      write_text_file(project_dir / "explanations.jsonl", explanations);

      EvaluationReport report = score_planners(
          pipeline, config.planners, triple.z, project.name);
      write_text_file(project_dir / "report.json", report.to_json());

      for (const PlannerSummary& summary : report.planners) {
        std::string planner(planner_name(summary.planner));
        write_text_file(project_dir / ("report_" + planner + ".csv"),
                        summary_to_csv(summary));
        write_text_file(project_dir / ("records_" + planner + ".csv"),
                        records_to_csv(summary.records));

        std::string plans;
        for (const Plan& plan : pipeline.plans(summary.planner)) {
          plans += plan.to_json();
          plans += '\n';
        }
        write_text_file(project_dir / ("plans_" + planner + ".jsonl"),
                        plans);

        log += "  planner " + planner + ": records " +
               std::to_string(summary.records.size()) + ", skipped " +
               std::to_string(summary.skipped) + ", failed " +
               std::to_string(summary.failed) + "\n";

        summary_csv +=
            project.name + "," + planner + "," +
            std::to_string(summary.records.size()) + "," +
            std::to_string(summary.skipped) + "," +
            std::to_string(summary.failed) + "," +
            format_double(summary.mean_plan_size) + "," +
            format_double(mean_overlap(summary.records)) + "," +
            format_double(summary.s) + "," +
            (summary.s_scaled.has_value() ? format_double(*summary.s_scaled)
                                          : std::string("undefined")) +
            "\n";
      }
      for (const PlannerComparison& comparison : report.comparisons) {
        log += "  compare " +
               std::string(planner_name(comparison.a)) + " vs " +
               std::string(planner_name(comparison.b)) + ": u " +
               format_double(comparison.test.u) + ", p " +
               format_double(comparison.test.p) + "\n";
      }
    } catch (const Error& error) {
      any_failed = true;
      log += "  FAILED: " + std::string(error.what()) + "\n";
    }
  }

  write_text_file(config.output_dir / "summary.csv", summary_csv);
  log += any_failed ? "status failed\n" : "status ok\n";
  write_text_file(config.output_dir / "run.log", log);
  return any_failed ? 1 : 0;
}

}  // namespace defplan
