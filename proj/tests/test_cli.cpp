#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coopbev/cli.hpp"
#include "coopbev/records.hpp"

using namespace coopbev;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name,
                      const std::string& text) {
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  return split(text, '\n');
}

}  // namespace

TEST_CASE("validate accepts good configs and rejects bad ones") {
  const auto dir = fresh_dir("coopbev-cli-validate");
  const auto good = write_config(
      dir, "good.cfg", "mode = synthetic\npolicy = alg1\nhorizon = 50\n");
  std::ostringstream out, err;
  CHECK(cmd_validate(good.string(), out, err) == 0);
  CHECK(out.str().find("ok:") != std::string::npos);
  CHECK(out.str().find("scenario") != std::string::npos);

  const auto bad = write_config(
      dir, "bad.cfg", "mode = synthetic\nomega = 1.5\nhorizon = 50\n");
  std::ostringstream out2, err2;
  CHECK(cmd_validate(bad.string(), out2, err2) == 2);
  CHECK(err2.str().find("omega") != std::string::npos);

  std::ostringstream out3, err3;
  CHECK(cmd_validate((dir / "absent.cfg").string(), out3, err3) == 4);
  fs::remove_all(dir);
}

TEST_CASE("run writes the three artifacts and replays byte-identically") {
  const auto dir = fresh_dir("coopbev-cli-run");
  const auto cfg = write_config(
      dir, "run.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 400\nseeds = 0,1\n");

  std::ostringstream out_a, err_a;
  const auto dir_a = (dir / "a").string();
  REQUIRE(cmd_run(cfg.string(), dir_a, out_a, err_a) == 0);
  CHECK(out_a.str().find("summary.json") != std::string::npos);
  CHECK(err_a.str().empty());

  std::ostringstream out_b, err_b;
  const auto dir_b = (dir / "b").string();
  REQUIRE(cmd_run(cfg.string(), dir_b, out_b, err_b) == 0);

  // The record stream and metrics table never depend on where they land.
  for (const char* name : {"records.jsonl", "metrics.csv", "summary.json"})
    CHECK(fs::exists(fs::path(dir_a) / name));
  CHECK(slurp(fs::path(dir_a) / "records.jsonl") ==
        slurp(fs::path(dir_b) / "records.jsonl"));
  CHECK(slurp(fs::path(dir_a) / "metrics.csv") ==
        slurp(fs::path(dir_b) / "metrics.csv"));

  // Rerunning into the same directory reproduces every artifact byte for
  // byte, the summary (which embeds the config, output_dir included) too.
  const auto summary_a = slurp(fs::path(dir_a) / "summary.json");
  std::ostringstream out_r, err_r;
  REQUIRE(cmd_run(cfg.string(), dir_a, out_r, err_r) == 0);
  CHECK(slurp(fs::path(dir_a) / "summary.json") == summary_a);

  const auto bad = write_config(
      dir, "bad.cfg", "mode = synthetic\nomega = 1.5\nhorizon = 50\n");
  std::ostringstream out_c, err_c;
  CHECK(cmd_run(bad.string(), (dir / "c").string(), out_c, err_c) == 2);
  CHECK(err_c.str().find("config error") != std::string::npos);

  std::ostringstream out_d, err_d;
  CHECK(cmd_run((dir / "absent.cfg").string(), (dir / "d").string(), out_d,
                err_d) == 4);
  fs::remove_all(dir);
}

TEST_CASE("the output root honors the environment variable") {
  const auto dir = fresh_dir("coopbev-cli-envroot");
  setenv("COOPBEV_OUT", dir.c_str(), 1);
  CHECK(default_output_root() == dir.string());

  const auto cfg = write_config(
      dir, "run.cfg", "mode = synthetic\npolicy = random\nhorizon = 50\n"
                      "seeds = 0\n");
  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg.string(), "", out, err) == 0);
  bool found = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("run-", 0) == 0) {
      found = fs::exists(entry.path() / "summary.json");
    }
  }
  CHECK(found);

  unsetenv("COOPBEV_OUT");
  CHECK(default_output_root() == "results");
  fs::remove_all(dir);
}

TEST_CASE("compare tabulates deltas against the reference") {
  const auto dir = fresh_dir("coopbev-cli-compare");
  const char* scenario =
      "mode = synthetic\nhorizon = 2000\nseeds = 0,1\npolicy = ";
  const auto cfg_alg1 =
      write_config(dir, "alg1.cfg", std::string(scenario) + "alg1\n");
  const auto cfg_random =
      write_config(dir, "random.cfg", std::string(scenario) + "random\n");

  std::ostringstream sink_out, sink_err;
  REQUIRE(cmd_run(cfg_alg1.string(), (dir / "alg1").string(), sink_out,
                  sink_err) == 0);
  REQUIRE(cmd_run(cfg_random.string(), (dir / "random").string(), sink_out,
                  sink_err) == 0);
  const auto sum_alg1 = (dir / "alg1" / "summary.json").string();
  const auto sum_random = (dir / "random" / "summary.json").string();

  CompareOptions options;
  options.paths = {sum_alg1, sum_random};
  options.output_path = (dir / "compare.csv").string();
  std::ostringstream out, err;
  REQUIRE(cmd_compare(options, out, err) == 0);
  CHECK(slurp(dir / "compare.csv") == out.str());

  const auto rows = lines_of(out.str());
  REQUIRE(rows.size() >= 6);
  CHECK(rows[0] == "#schema=coopbev-compare-v1");
  CHECK(rows[2] == "#reference=alg1");
  CHECK(rows[3].rfind("label,path,final_regret,d_final_regret,", 0) == 0);
  const auto alg1_row = split(rows[4], ',');
  const auto random_row = split(rows[5], ',');
  REQUIRE(alg1_row.size() == random_row.size());
  CHECK(alg1_row[0] == "alg1");
  CHECK(random_row[0] == "random");
  CHECK(std::stod(alg1_row[3]) == 0.0);  // reference delta
  CHECK(std::stod(random_row[2]) > std::stod(alg1_row[2]));
  CHECK(std::stod(random_row[3]) > 0.0);

  // Against the random reference the learner's regret delta is negative.
  options.reference = "random";
  std::ostringstream out_ref, err_ref;
  REQUIRE(cmd_compare(options, out_ref, err_ref) == 0);
  const auto ref_rows = lines_of(out_ref.str());
  CHECK(ref_rows[2] == "#reference=random");
  CHECK(std::stod(split(ref_rows[4], ',')[3]) < 0.0);

  // A result against itself: every delta is zero.
  CompareOptions self;
  self.paths = {sum_alg1, sum_alg1};
  std::ostringstream out_self, err_self;
  REQUIRE(cmd_compare(self, out_self, err_self) == 0);
  const auto self_rows = lines_of(out_self.str());
  for (std::size_t r = 4; r < 6; ++r) {
    const auto fields = split(self_rows[r], ',');
    for (std::size_t f = 3; f < fields.size(); f += 2)
      CHECK(std::stod(fields[f]) == 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("compare rejects bad invocations with distinct exit codes") {
  const auto dir = fresh_dir("coopbev-cli-compare-bad");
  const auto cfg_a = write_config(
      dir, "a.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 100\nseeds = 0\n");
  const auto cfg_b = write_config(
      dir, "b.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 200\nseeds = 0\n");
  std::ostringstream sink_out, sink_err;
  REQUIRE(cmd_run(cfg_a.string(), (dir / "a").string(), sink_out, sink_err) ==
          0);
  REQUIRE(cmd_run(cfg_b.string(), (dir / "b").string(), sink_out, sink_err) ==
          0);
  const auto sum_a = (dir / "a" / "summary.json").string();
  const auto sum_b = (dir / "b" / "summary.json").string();

  CompareOptions lone;
  lone.paths = {sum_a};
  std::ostringstream out1, err1;
  CHECK(cmd_compare(lone, out1, err1) == 2);

  CompareOptions mismatched;
  mismatched.paths = {sum_a, sum_b};
  std::ostringstream out2, err2;
  CHECK(cmd_compare(mismatched, out2, err2) == 5);
  CHECK(err2.str().find("scenario hash mismatch") != std::string::npos);

  CompareOptions missing;
  missing.paths = {sum_a, (dir / "nope.json").string()};
  std::ostringstream out3, err3;
  CHECK(cmd_compare(missing, out3, err3) == 4);

  CompareOptions unknown_metric;
  unknown_metric.paths = {sum_a, sum_a};
  unknown_metric.metrics = {"final_regret", "sharpness"};
  std::ostringstream out4, err4;
  CHECK(cmd_compare(unknown_metric, out4, err4) == 2);
  CHECK(err4.str().find("sharpness") != std::string::npos);

  CompareOptions unknown_reference;
  unknown_reference.paths = {sum_a, sum_a};
  unknown_reference.reference = "mass";
  std::ostringstream out5, err5;
  CHECK(cmd_compare(unknown_reference, out5, err5) == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweeping the exploration constant lengthens exploration") {
  const auto dir = fresh_dir("coopbev-cli-sweep");
  const auto cfg = write_config(
      dir, "sweep.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 2000\nseeds = 0,1\n"
      "sweep_workers = 2\n");

  SweepOptions options;
  options.config_path = cfg.string();
  options.axis = "D";
  options.values = {"0.25", "0.5", "1.0"};
  options.output_dir = (dir / "out").string();
  std::ostringstream out, err;
  REQUIRE(cmd_sweep(options, out, err) == 0);
  CHECK(out.str().find("sweep.csv") != std::string::npos);

  for (const char* value : {"0.25", "0.5", "1.0"}) {
    const fs::path sub = dir / "out" / (std::string("D-") + value);
    CHECK(fs::exists(sub / "summary.json"));
    const auto stored = load_result((sub / "summary.json").string());
    CHECK(std::stod(stored.config.at("d")) == std::stod(value));
  }

  const auto rows = lines_of(slurp(dir / "out" / "sweep.csv"));
  REQUIRE(rows.size() >= 5);
  CHECK(rows[0] == "#schema=coopbev-sweep-v1");
  CHECK(rows[1].rfind("axis,value,dir,", 0) == 0);
  std::vector<long> explore;
  for (int r = 2; r < 5; ++r) {
    const auto fields = split(rows[r], ',');
    CHECK(fields[0] == "D");
    explore.push_back(std::stol(fields[4]));
  }
  CHECK(explore[0] <= explore[1]);
  CHECK(explore[1] <= explore[2]);
  CHECK(explore[2] > 0);
  fs::remove_all(dir);
}

TEST_CASE("sweep validates the axis and every value up front") {
  const auto dir = fresh_dir("coopbev-cli-sweep-bad");
  const auto cfg = write_config(
      dir, "sweep.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 100\nseeds = 0\n");

  SweepOptions bad_axis;
  bad_axis.config_path = cfg.string();
  bad_axis.axis = "rho";
  bad_axis.values = {"1"};
  bad_axis.output_dir = (dir / "o1").string();
  std::ostringstream out1, err1;
  CHECK(cmd_sweep(bad_axis, out1, err1) == 2);
  CHECK(err1.str().find("axis") != std::string::npos);

  SweepOptions bad_value;
  bad_value.config_path = cfg.string();
  bad_value.axis = "K";
  bad_value.values = {"2", "0"};
  bad_value.output_dir = (dir / "o2").string();
  std::ostringstream out2, err2;
  CHECK(cmd_sweep(bad_value, out2, err2) == 2);
  CHECK(!fs::exists(dir / "o2" / "sweep.csv"));

  SweepOptions no_values;
  no_values.config_path = cfg.string();
  no_values.axis = "K";
  no_values.output_dir = (dir / "o3").string();
  std::ostringstream out3, err3;
  CHECK(cmd_sweep(no_values, out3, err3) == 2);

  SweepOptions missing_cfg;
  missing_cfg.config_path = (dir / "absent.cfg").string();
  missing_cfg.axis = "K";
  missing_cfg.values = {"1"};
  missing_cfg.output_dir = (dir / "o4").string();
  std::ostringstream out4, err4;
  CHECK(cmd_sweep(missing_cfg, out4, err4) == 4);
  fs::remove_all(dir);
}

TEST_CASE("sweeping the budget covers selection of every CAV at K equals N") {
  const auto dir = fresh_dir("coopbev-cli-sweep-k");
  const auto cfg = write_config(
      dir, "sweep.cfg",
      "mode = synthetic\npolicy = alg1\nhorizon = 800\nseeds = 0\n");

  SweepOptions options;
  options.config_path = cfg.string();
  options.axis = "K";
  options.values = {"2", "8"};
  options.output_dir = (dir / "out").string();
  std::ostringstream out, err;
  REQUIRE(cmd_sweep(options, out, err) == 0);

  // Selecting everybody leaves only stationary noise around zero regret.
  const auto full = load_result(
      (dir / "out" / "K-8" / "summary.json").string());
  CHECK(std::abs(full.means.final_regret) < 100.0);
  fs::remove_all(dir);
}
