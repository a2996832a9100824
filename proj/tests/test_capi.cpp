// Exercises the shared library exactly as an external consumer would:
// only the public C header, no core headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "defplan/defplan.h"

namespace {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("defplan_capi_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

const char* kReleaseHeader =
    "name,wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,lcom3,loc,dam,moa,mfa,cam,"
    "ic,cbm,amc,max_cc,avg_cc,bug";

std::string tiny_release(const std::string& unit_a,
                         const std::string& unit_b) {
  std::string csv = kReleaseHeader;
  csv += "\n" + unit_a;
  for (int i = 0; i < 20; ++i) csv += ",1";
  csv += ",1\n" + unit_b;
  for (int i = 0; i < 20; ++i) csv += ",2";
  csv += ",0\n";
  return csv;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and status names are stable") {
  CHECK(std::strcmp(dfp_version(), "1.0.0") == 0);
  CHECK(std::strcmp(dfp_status_name(DFP_OK), "ok") == 0);
  CHECK(std::strcmp(dfp_status_name(DFP_ERR_IO), "io") == 0);
  CHECK(std::strcmp(dfp_status_name(DFP_ERR_CONFIG), "config") == 0);
  CHECK(std::strcmp(dfp_status_name(DFP_ERR_RUN_FAILED), "run_failed") ==
        0);
  CHECK(std::strcmp(dfp_status_name(static_cast<dfp_status>(999)),
                    "unknown") == 0);
}

TEST_CASE("null arguments are contract violations") {
  dfp_config* config = nullptr;

  CHECK(dfp_config_load(nullptr, &config) == DFP_ERR_CONTRACT);
  CHECK(config == nullptr);
  CHECK(std::string(dfp_last_error()).empty() == false);
  CHECK(dfp_config_load("x", nullptr) == DFP_ERR_CONTRACT);

  CHECK(dfp_config_select_project(nullptr, "x") == DFP_ERR_CONTRACT);
  CHECK(dfp_config_select_planner(nullptr, "x") == DFP_ERR_CONTRACT);
  CHECK(dfp_config_set_seed(nullptr, 1) == DFP_ERR_CONTRACT);
  CHECK(dfp_config_set_data_root(nullptr, "x") == DFP_ERR_CONTRACT);
  CHECK(dfp_config_set_output_dir(nullptr, "x") == DFP_ERR_CONTRACT);
  CHECK(dfp_run_experiment(nullptr) == DFP_ERR_CONTRACT);
  CHECK(dfp_write_fixture_data(nullptr) == DFP_ERR_CONTRACT);

  dfp_config_free(nullptr);  // harmless no-op
}

TEST_CASE("config load surfaces parse failures with messages") {
  TempDir dir;

  write_file(dir.file("bad.conf"), "planers = x\n");
  dfp_config* config = reinterpret_cast<dfp_config*>(0x1);
  CHECK(dfp_config_load(dir.file("bad.conf").c_str(), &config) ==
        DFP_ERR_CONFIG);
  CHECK(config == nullptr);
  CHECK(std::string(dfp_last_error()).find("planers") !=
        std::string::npos);
  CHECK(std::string(dfp_last_error()).find("bad.conf") !=
        std::string::npos);

  CHECK(dfp_config_load(dir.file("absent.conf").c_str(), &config) ==
        DFP_ERR_IO);

  write_file(dir.file("good.conf"), "m = 3\nproject ant 1.5 1.6 1.7\n");
  CHECK(dfp_config_load(dir.file("good.conf").c_str(), &config) == DFP_OK);
  REQUIRE(config != nullptr);
  CHECK(std::string(dfp_last_error()).empty());

  CHECK(std::string(dfp_config_output_dir(config)) == "out");
  CHECK(dfp_config_set_output_dir(config, dir.file("away").c_str()) ==
        DFP_OK);
  CHECK(std::string(dfp_config_output_dir(config)) == dir.file("away"));
  CHECK(dfp_config_output_dir(nullptr) == nullptr);
  dfp_config_free(config);
}

TEST_CASE("selectors reject names outside the run") {
  TempDir dir;
  write_file(dir.file("run.conf"),
             "project ant 1.5 1.6 1.7\nproject poi 1.5 2.5 3.0\n");

  dfp_config* config = nullptr;
  REQUIRE(dfp_config_load(dir.file("run.conf").c_str(), &config) ==
          DFP_OK);

  CHECK(dfp_config_select_project(config, "poi") == DFP_OK);
  CHECK(dfp_config_select_project(config, "ant") == DFP_ERR_CONFIG);
  CHECK(std::string(dfp_last_error()).find("not part of this run") !=
        std::string::npos);

  CHECK(dfp_config_select_planner(config, "time") == DFP_OK);
  CHECK(dfp_config_select_planner(config, "classical") ==
        DFP_ERR_CONFIG);
  CHECK(dfp_config_select_planner(config, "warp") == DFP_ERR_CONFIG);

  CHECK(dfp_config_set_seed(config, 99) == DFP_OK);
  dfp_config_free(config);
}

TEST_CASE("fixture corpus and experiment run through the C boundary") {
  TempDir dir;
  REQUIRE(dfp_write_fixture_data(dir.file("data").c_str()) == DFP_OK);
  CHECK(std::filesystem::exists(dir.file("data/synapse/1.1.csv")));

  write_file(dir.file("run.conf"),
             "samples = 150\n"
             "trees = 20\n"
             "seed = 11\n"
             "project synapse 1.0 1.1 1.2\n");

  dfp_config* config = nullptr;
  REQUIRE(dfp_config_load(dir.file("run.conf").c_str(), &config) ==
          DFP_OK);
  CHECK(dfp_config_set_data_root(config, dir.file("data").c_str()) ==
        DFP_OK);
  CHECK(dfp_config_set_output_dir(config, dir.file("out").c_str()) ==
        DFP_OK);

  CHECK(dfp_run_experiment(config) == DFP_OK);
  dfp_config_free(config);

  const std::string summary = read_file(dir.file("out/summary.csv"));
  CHECK(summary.find("synapse,classical,") != std::string::npos);
  CHECK(summary.find("synapse,time,") != std::string::npos);
  CHECK(summary.find("synapse,random,") != std::string::npos);
  CHECK(read_file(dir.file("out/run.log")).find("status ok") !=
        std::string::npos);
  CHECK(std::filesystem::exists(
      dir.file("out/synapse/plans_time.jsonl")));
}

TEST_CASE("a failing project yields run_failed after the run completes") {
  TempDir dir;
  // Valid CSVs whose releases share no units: alignment fails per
  // project, but the run itself still writes its outputs.
  write_file(dir.file("data/tiny/1.csv"), tiny_release("a", "b"));
  write_file(dir.file("data/tiny/2.csv"), tiny_release("c", "d"));
  write_file(dir.file("data/tiny/3.csv"), tiny_release("e", "f"));
  write_file(dir.file("run.conf"), "project tiny 1 2 3\n");

  dfp_config* config = nullptr;
  REQUIRE(dfp_config_load(dir.file("run.conf").c_str(), &config) ==
          DFP_OK);
  CHECK(dfp_config_set_data_root(config, dir.file("data").c_str()) ==
        DFP_OK);
  CHECK(dfp_config_set_output_dir(config, dir.file("out").c_str()) ==
        DFP_OK);

  CHECK(dfp_run_experiment(config) == DFP_ERR_RUN_FAILED);
  CHECK(std::string(dfp_last_error()).find("run.log") !=
        std::string::npos);
  dfp_config_free(config);

  const std::string log = read_file(dir.file("out/run.log"));
  CHECK(log.find("FAILED") != std::string::npos);
  CHECK(log.find("status failed") != std::string::npos);
}

}  // TEST_SUITE
