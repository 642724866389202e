#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopbev/channel.hpp"
#include "coopbev/world.hpp"

namespace coopbev {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { kSynthetic, kEndToEnd };

enum class Policy { kAlg1, kEcop, kMass, kRandom, kOptimal };

enum class Pipeline {
  kAdaptive,
  kHarbor,
  kMaxRho,
  kMinRho,
  kEarlyFusion,
  kNoFusion
};

std::string mode_name(Mode mode);
std::string policy_name(Policy policy);
std::string pipeline_name(Pipeline pipeline);

struct RunConfig {
  Mode mode = Mode::kSynthetic;
  Policy policy = Policy::kAlg1;
  Pipeline pipeline = Pipeline::kAdaptive;
  std::int64_t horizon = 0;  // resolved per mode when the key is absent
  std::vector<std::uint32_t> seeds;
  int n_cavs = 8;
  int k = 2;
  double d = 0.5;
  double omega = 1.0;
  double alpha = 0.1;
  double beta = 0.34;
  double gamma = 0.15;
  std::vector<double> rho_set = {1, 2, 4, 8, 16, 32, 64};
  std::string profile = "low";
  double jitter_frac = 0.05;
  bool fixed_deadline = false;
  double fixed_deadline_ms = 500.0;
  double cell_size = 0.5;
  double grid_extent = 100.0;
  double base_detection_prob = 0.95;
  double distance_decay = 0.01;
  std::uint64_t ensemble_seed = 777;
  int m_objects = 30;
  std::string layout = "grid";
  double spacing = 8.0;
  double collaborator_ring = 20.0;
  std::string compute = "high_end";
  MotionModel motion;
  std::string output_dir;
  int sweep_workers = 1;
  std::int64_t record_stride = 1;

  // Canonical flat key/value view of every field; the hashes are FNV-1a 64
  // over its sorted "key=value" lines.
  std::map<std::string, std::string> to_map() const;
  std::uint64_t config_hash() const;
  // Ignores policy/pipeline/output plumbing so runs over the same scenario
  // can be compared.
  std::uint64_t scenario_hash() const;

  ThroughputProfile throughput() const;
  ComputeProfile compute_profile() const;
  Layout world_layout() const;
  PayloadSpec payload() const;
};

// Flat "key = value" lines, '#' comments, one dot level for motion.*;
// duplicate keys rejected.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Builds and validates a RunConfig; unknown keys and out-of-range values
// raise ConfigError.
RunConfig config_from_kv(const std::map<std::string, std::string>& kv);

RunConfig parse_config(const std::string& text);

// Reads the file (IoError when unreadable) and parses it.
RunConfig load_config(const std::string& path);

}  // namespace coopbev
