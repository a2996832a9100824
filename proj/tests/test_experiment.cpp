#include <doctest.h>

#include <filesystem>

#include "core/experiment.hpp"
#include "core/synthdata.hpp"
#include "support/helpers.hpp"

using namespace defplan;
using defplan::testing::TempDir;
using defplan::testing::read_file;
using defplan::testing::write_file;

TEST_SUITE("experiment") {

TEST_CASE("defaults cover every key a minimal config omits") {
  ExperimentConfig config =
      parse_config_text("project jedit 4.0 4.1 4.2\n");

  CHECK(config.data_root == "data");
  CHECK(config.output_dir == "out");
  CHECK(config.planners == std::vector<PlannerId>{PlannerId::classical,
                                                  PlannerId::time,
                                                  PlannerId::random});
  CHECK(config.ktest.m == 5);
  CHECK(config.ktest.k == 10);
  CHECK(config.ktest.samples == 5000);
  CHECK(config.ktest.p_change == 0.5);
  CHECK(config.ktest.smote_neighbors == 5);
  CHECK(config.ktest.forest.tree_count == 100);
  CHECK_FALSE(config.ktest.forest.max_depth.has_value());
  CHECK(config.ktest.forest.features_per_split == 4);
  CHECK(config.ktest.forest.min_leaf == 1);
  CHECK(config.ktest.master_seed == 0);
  CHECK(config.ktest.overlap_mode == OverlapMode::containment);

  CHECK(config.projects.size() == 1);
  CHECK(config.projects[0] ==
        ProjectTriple{"jedit", {"4.0", "4.1", "4.2"}});

  // Every scalar key fell back to its default.
  CHECK(config.defaulted.size() == 14);
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
  ExperimentConfig config = parse_config_text(
      "# experiment settings\n"
      "m = 3        # plan budget\n"
      "\n"
      "samples=250\n"
      "project   jedit   4.0  4.1  4.2\n");

  CHECK(config.ktest.m == 3);
  CHECK(config.ktest.samples == 250);
  CHECK(config.projects.size() == 1);

  auto defaulted = [&config](const std::string& key) {
    return std::find(config.defaulted.begin(), config.defaulted.end(),
                     key) != config.defaulted.end();
  };
  CHECK_FALSE(defaulted("m"));
  CHECK_FALSE(defaulted("samples"));
  CHECK(defaulted("k"));
  CHECK(defaulted("seed"));
}

TEST_CASE("malformed lines raise config errors naming the offender") {
  auto parse = [](const std::string& text) {
    return parse_config_text(text);
  };

  CHECK_THROWS_WITH_AS(parse("m 5\n"), doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(parse("planers = classical\n"),
                       doctest::Contains("planers"), Error);
  CHECK_THROWS_WITH_AS(parse("m = 5\nm = 6\n"),
                       doctest::Contains("duplicate key \"m\""), Error);
  CHECK_THROWS_WITH_AS(parse("m = 5\nm = 6\n"),
                       doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(parse("m =\n"), doctest::Contains("no value"),
                       Error);
  CHECK_THROWS_WITH_AS(parse("m = twelve\n"),
                       doctest::Contains("cannot parse"), Error);
  CHECK_THROWS_WITH_AS(parse("m = 0\n"), doctest::Contains("[1,20]"),
                       Error);
  CHECK_THROWS_AS(parse("m = 21\n"), Error);
  CHECK_THROWS_AS(parse("k = 0\n"), Error);
  CHECK_THROWS_AS(parse("samples = 0\n"), Error);
  CHECK_THROWS_AS(parse("p_change = 1.5\n"), Error);
  CHECK_THROWS_AS(parse("smote_neighbors = 0\n"), Error);
  CHECK_THROWS_AS(parse("trees = 0\n"), Error);
  CHECK_THROWS_AS(parse("max_depth = -1\n"), Error);
  CHECK_THROWS_AS(parse("features_per_split = 0\n"), Error);
  CHECK_THROWS_AS(parse("min_leaf = 0\n"), Error);
  CHECK_THROWS_AS(parse("seed = -1\n"), Error);
  CHECK_THROWS_WITH_AS(parse("overlap = fuzzy\n"),
                       doctest::Contains("containment or strict_jaccard"),
                       Error);
  CHECK_THROWS_WITH_AS(parse("planners = classical,classical\n"),
                       doctest::Contains("duplicate"), Error);
  CHECK_THROWS_WITH_AS(parse("planners = classical,,time\n"),
                       doctest::Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(parse("planners = warp\n"),
                       doctest::Contains("warp"), Error);
  CHECK_THROWS_WITH_AS(parse("project jedit 4.0 4.1\n"),
                       doctest::Contains("project expects"), Error);
  CHECK_THROWS_WITH_AS(parse("project jedit 4.0 4.0 4.2\n"),
                       doctest::Contains("versions must be distinct"),
                       Error);
  CHECK_THROWS_WITH_AS(
      parse("project jedit 4.0 4.1 4.2\nproject jedit 4.1 4.2 4.3\n"),
      doctest::Contains("listed twice"), Error);

  try {
    parse("planers = classical\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
  }
}

TEST_CASE("planner, overlap, and depth settings parse into their types") {
  ExperimentConfig config = parse_config_text(
      "planners = time,random\n"
      "overlap = strict_jaccard\n"
      "max_depth = 0\n"
      "seed = 3735928559\n");

  CHECK(config.planners ==
        std::vector<PlannerId>{PlannerId::time, PlannerId::random});
  CHECK(config.ktest.overlap_mode == OverlapMode::strict_jaccard);
  CHECK_FALSE(config.ktest.forest.max_depth.has_value());
  CHECK(config.ktest.master_seed == 0xdeadbeefull);

  config = parse_config_text("max_depth = 6\n");
  CHECK(config.ktest.forest.max_depth == 6);
}

TEST_CASE("validate_config reads files and prefixes errors with the path") {
  TempDir dir;

  write_file(dir.file("good.conf"),
             "m = 4\nproject ant 1.5 1.6 1.7\n");
  ExperimentConfig config = validate_config(dir.file("good.conf"));
  CHECK(config.ktest.m == 4);
  CHECK(config.projects.size() == 1);

  write_file(dir.file("bad.conf"), "planers = x\n");
  CHECK_THROWS_WITH_AS(validate_config(dir.file("bad.conf")),
                       doctest::Contains("bad.conf"), Error);

  try {
    validate_config(dir.file("absent.conf"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("absent.conf") != std::string::npos);
  }
}

TEST_CASE("filters narrow the run to one project or planner") {
  const std::string text =
      "project ant 1.5 1.6 1.7\n"
      "project poi 1.5 2.5 3.0\n";

  ExperimentConfig config = parse_config_text(text);
  filter_project(config, "poi");
  CHECK(config.projects ==
        std::vector<ProjectTriple>{{"poi", {"1.5", "2.5", "3.0"}}});

  config = parse_config_text(text);
  CHECK_THROWS_WITH_AS(filter_project(config, "camel"),
                       doctest::Contains("not part of this run"), Error);

  config = parse_config_text(text);
  filter_planner(config, "time");
  CHECK(config.planners == std::vector<PlannerId>{PlannerId::time});

  config = parse_config_text(text + "planners = classical\n");
  CHECK_THROWS_WITH_AS(filter_planner(config, "time"),
                       doctest::Contains("not part of this run"), Error);
  CHECK_THROWS_WITH_AS(filter_planner(config, "warp"),
                       doctest::Contains("warp"), Error);
}

TEST_CASE("a run with no projects still writes its outputs") {
  TempDir dir;
  ExperimentConfig config = parse_config_text("m = 2\n");
  config.output_dir = dir.file("empty");

  CHECK(run_experiment(config) == 0);

  CHECK(read_file(dir.file("empty/summary.csv")) ==
        "project,planner,records,skipped,failed,mean_plan_size,"
        "mean_overlap,s,s_scaled\n");
  const std::string log = read_file(dir.file("empty/run.log"));
  CHECK(log.find("status ok") != std::string::npos);
  CHECK(log.find("m = 2\n") != std::string::npos);
  CHECK(log.find("k = 10  (default)") != std::string::npos);
}

TEST_CASE("missing data files abort before any output is written") {
  TempDir dir;
  ExperimentConfig config =
      parse_config_text("project jedit 4.0 4.1 4.2\n");
  config.data_root = dir.file("data");
  config.output_dir = dir.file("out");

  try {
    run_experiment(config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    const std::string what = e.what();
    CHECK(what.find("jedit/4.0.csv") != std::string::npos);
    CHECK(what.find("jedit/4.1.csv") != std::string::npos);
    CHECK(what.find("jedit/4.2.csv") != std::string::npos);
  }
  CHECK_FALSE(std::filesystem::exists(dir.file("out")));
}

TEST_CASE("a fixture project runs end to end and matches the module oracle") {
  TempDir dir;
  write_fixture_data(dir.file("data"));

  ExperimentConfig config = parse_config_text(
      "data_root = " + dir.file("data") + "\n" +
      "output_dir = " + dir.file("out") + "\n" +
      "samples = 200\n"
      "trees = 25\n"
      "seed = 413\n"
      "project synapse 1.0 1.1 1.2\n");

  CHECK(run_experiment(config) == 0);

  const std::string base = dir.file("out/synapse");
  for (const char* name :
       {"profile.csv", "explanations.jsonl", "report.json",
        "report_classical.csv", "records_classical.csv",
        "plans_classical.jsonl", "report_time.csv", "records_time.csv",
        "plans_time.jsonl", "report_random.csv", "records_random.csv",
        "plans_random.jsonl"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(base + "/" + name));
  }

  // The written report must equal what the modules produce directly.
  ReleaseDataset x = load_release_csv(
      dataset_path(config.data_root, "synapse", "1.0"), "synapse", "1.0");
  ReleaseDataset y = load_release_csv(
      dataset_path(config.data_root, "synapse", "1.1"), "synapse", "1.1");
  ReleaseDataset z = load_release_csv(
      dataset_path(config.data_root, "synapse", "1.2"), "synapse", "1.2");
  AlignedTriple triple = align_releases(x, y, z);
  EvaluationReport oracle =
      run_ktest(triple, config.planners, config.ktest);

  CHECK(read_file(base + "/report.json") == oracle.to_json());

  std::string expected_summary =
      "project,planner,records,skipped,failed,mean_plan_size,"
      "mean_overlap,s,s_scaled\n";
  for (const PlannerSummary& summary : oracle.planners) {
    expected_summary +=
        "synapse," + std::string(planner_name(summary.planner)) + "," +
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
  CHECK(read_file(dir.file("out/summary.csv")) == expected_summary);

  const std::string log = read_file(dir.file("out/run.log"));
  CHECK(log.find("samples = 200\n") != std::string::npos);
  CHECK(log.find("k = 10  (default)") != std::string::npos);
  CHECK(log.find("project synapse 1.0 1.1 1.2") != std::string::npos);
  CHECK(log.find("rebalance seed 0x") != std::string::npos);
  CHECK(log.find("forest seed 0x") != std::string::npos);
  CHECK(log.find("unit src/synapse/") != std::string::npos);
  CHECK(log.find("skipped (predicted clean)") != std::string::npos);
  CHECK(log.find("compare classical vs time:") != std::string::npos);
  CHECK(log.find("status ok") != std::string::npos);
  CHECK(log.find("FAILED") == std::string::npos);

  // Random plans carry their seed; the others never do.
  CHECK(read_file(base + "/plans_random.jsonl").find("\"seed\":") !=
        std::string::npos);
  CHECK(read_file(base + "/plans_classical.jsonl").find("\"seed\":") ==
        std::string::npos);
}

TEST_CASE("reruns into the same directory are byte identical") {
  TempDir dir;
  write_fixture_data(dir.file("data"));

  ExperimentConfig config = parse_config_text(
      "data_root = " + dir.file("data") + "\n" +
      "output_dir = " + dir.file("out") + "\n" +
      "samples = 150\n"
      "trees = 20\n"
      "seed = 7\n"
      "project velocity 1.4 1.5 1.6\n");

  CHECK(run_experiment(config) == 0);
  const std::string summary = read_file(dir.file("out/summary.csv"));
  const std::string log = read_file(dir.file("out/run.log"));
  const std::string report =
      read_file(dir.file("out/velocity/report.json"));

  CHECK(run_experiment(config) == 0);
  CHECK(read_file(dir.file("out/summary.csv")) == summary);
  CHECK(read_file(dir.file("out/run.log")) == log);
  CHECK(read_file(dir.file("out/velocity/report.json")) == report);
}

}  // TEST_SUITE
