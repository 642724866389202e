#pragma once

#include <map>
#include <utility>
#include <vector>

#include "coopbev/channel.hpp"

namespace coopbev {

inline const std::vector<double> kDefaultRhoSet = {1, 2, 4, 8, 16, 32, 64};

struct DeadlineParams {
  double alpha = 0.1;  // deadline tightening rate per m/s of volatility
  double lf_min_ms = 0.0;
  double lf_max_ms = 0.0;
};

struct FusionPlan {
  double deadline_ms = 0.0;
  std::vector<int> straggler_ids;      // sorted
  std::map<int, double> rho_per_cav;   // every selected CAV
  std::vector<int> late_ids;           // sorted, subset of straggler_ids
};

// Feature transmission time of the worst selected link at the largest and
// smallest compression ratio: (lf_min_ms, lf_max_ms).
std::pair<double, double> deadline_bounds(const std::vector<int>& selected,
                                          const LinkState& links,
                                          const PayloadSpec& payload,
                                          const std::vector<double>& rho_set);

// l_f = lf_min + (lf_max - lf_min) * exp(-alpha * v_d), equal to lf_max at
// zero volatility without rounding.
double fusion_deadline(double v_d, const DeadlineParams& params);

// CAVs whose uncompressed transmission strictly misses the deadline; hitting
// it exactly counts as on time.
std::vector<int> identify_stragglers(const std::vector<int>& selected,
                                     const LinkState& links,
                                     const PayloadSpec& payload,
                                     double deadline_ms);

struct RhoChoice {
  double rho = 1.0;
  bool late = false;  // even the largest ratio misses the deadline
};

// Smallest ratio in rho_set meeting the deadline; falls back to the largest
// with the late flag set.
RhoChoice select_compression(double rate_mbps, const PayloadSpec& payload,
                             double deadline_ms,
                             const std::vector<double>& rho_set);

// Bounds, deadline, stragglers, and per-CAV ratios for one slot. Only
// params.alpha is read; the bounds are derived from the selected links.
FusionPlan build_fusion_plan(const std::vector<int>& selected,
                             const LinkState& links, double v_d,
                             const DeadlineParams& params,
                             const PayloadSpec& payload,
                             const std::vector<double>& rho_set);

// Chosen-ratio transmission time per planned CAV.
std::map<int, double> plan_latencies_ms(const FusionPlan& plan,
                                        const LinkState& links,
                                        const PayloadSpec& payload);

// Slowest on-time CAV's transmission time; zero if every CAV is late.
double plan_latency_ms(const FusionPlan& plan, const LinkState& links,
                       const PayloadSpec& payload);

}  // namespace coopbev
