#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace coopbev {

// $COOPBEV_OUT when set and non-empty, otherwise "results".
std::string default_output_root();

// Exit codes shared by every command: 0 success, 2 bad config or usage,
// 3 invariant violation during a run, 4 I/O failure, 5 comparison across
// different scenarios.
int cmd_run(const std::string& config_path, const std::string& output_override,
            std::ostream& out, std::ostream& err);

int cmd_validate(const std::string& config_path, std::ostream& out,
                 std::ostream& err);

struct CompareOptions {
  std::vector<std::string> paths;     // summary.json files, two or more
  std::string reference;              // label; defaults to the first result
  std::vector<std::string> metrics;   // defaults to the headline metrics
  std::string output_path;            // also write the table here when set
};

int cmd_compare(const CompareOptions& options, std::ostream& out,
                std::ostream& err);

struct SweepOptions {
  std::string config_path;
  std::string axis;                  // one of D, K, alpha, omega, profile
  std::vector<std::string> values;   // one run per value
  std::string output_dir;            // defaults under default_output_root()
};

int cmd_sweep(const SweepOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace coopbev
