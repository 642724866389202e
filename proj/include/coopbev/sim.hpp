#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coopbev/bandit.hpp"
#include "coopbev/config.hpp"
#include "coopbev/perception.hpp"
#include "coopbev/world.hpp"

namespace coopbev {

// A selection-bound growth check failed mid-run; carries the report message.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PerCavSlot {
  int id = 0;
  double rate_mbps = 0.0;
  double distance_m = 0.0;
  double rho = 1.0;
  double tx_ms = 0.0;
  bool straggler = false;
  bool late = false;
  bool included = true;   // feature made it into the fused map
  bool observed = false;  // selector received the compensated value
  double realized = 0.0;
  double compensated = 0.0;
};

struct LatencyBreakdown {
  double tx_ms = 0.0;
  double extraction_ms = 0.0;
  double head_ms = 0.0;
  double selection_overhead_ms = 0.0;
  double total_ms = 0.0;  // always the exact sum of the four parts
};

struct SlotRecord {
  std::int64_t slot = 0;  // 1-based
  std::string policy;
  std::string phase;
  std::vector<int> action;
  double deadline_ms = 0.0;
  double v_d = 0.0;
  std::vector<PerCavSlot> cavs;  // selected CAVs only
  double plan_latency_ms = 0.0;
  int staleness_steps = 0;
  double iou_proxy = 0.0;
  double regret_increment = 0.0;
  double cum_regret = 0.0;
  LatencyBreakdown latency;
};

struct SeedSummary {
  std::uint32_t seed = 0;
  double final_regret = 0.0;
  double mean_plan_latency_ms = 0.0;
  double mean_total_latency_ms = 0.0;
  double mean_iou = 0.0;
  double mean_deadline_ms = 0.0;
  double mean_v_d = 0.0;
  std::int64_t straggler_slots = 0;  // straggler flags summed over slots
  std::int64_t late_drops = 0;       // selected features that never fused
  // straggler_hist[c] = slots with exactly c stragglers, c in 0..k
  std::vector<std::int64_t> straggler_hist;
  std::vector<std::pair<std::int64_t, double>> regret_curve;
};

struct AggregateSummary {
  double final_regret = 0.0;
  double mean_plan_latency_ms = 0.0;
  double mean_total_latency_ms = 0.0;
  double mean_iou = 0.0;
  double mean_deadline_ms = 0.0;
  double mean_v_d = 0.0;
  double straggler_slots = 0.0;
  double late_drops = 0.0;
};

struct ExperimentResult {
  RunConfig config;
  std::vector<SeedSummary> per_seed;
  AggregateSummary means;
};

// Called once per slot in emission order.
using RecordSink =
    std::function<void(std::uint32_t seed, const SlotRecord& record)>;

// One seeded run advanced slot by slot. Synthetic mode drives the frozen
// chain ensemble; end-to-end mode runs the full channel, fusion, perception,
// and evaluation loop over a moving world.
class SlotSim {
 public:
  SlotSim(const RunConfig& config, std::uint32_t seed);
  ~SlotSim();
  SlotSim(SlotSim&&) noexcept;
  SlotSim& operator=(SlotSim&&) noexcept;

  SlotRecord step();

  std::int64_t current_slot() const;  // last emitted slot, 0 before any
  // Learner memory; null for the random and optimal policies.
  const SelectorState* selector() const;
  // Chain analysis; null in end-to-end mode.
  const StationaryAnalysis* analysis() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs one seed to the configured horizon; checks the selection bounds at the
// end for the epoch-structured policy and throws InvariantError on violation.
SeedSummary run_seed(const RunConfig& config, std::uint32_t seed,
                     const RecordSink& sink = {});

// All configured seeds plus the seed-mean aggregate.
ExperimentResult run_experiment(const RunConfig& config,
                                const RecordSink& sink = {});

}  // namespace coopbev
