#include "coopbev/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopbev {
namespace {

void check_rho_set(const std::vector<double>& rho_set) {
  if (rho_set.empty() || rho_set.front() != 1.0) {
    throw std::invalid_argument("compression ratio set must start at 1");
  }
  for (std::size_t i = 1; i < rho_set.size(); ++i) {
    if (rho_set[i] <= rho_set[i - 1]) {
      throw std::invalid_argument("compression ratio set must be ascending");
    }
  }
}

double link_rate(const LinkState& links, int id) {
  const auto it = links.links.find(id);
  if (it == links.links.end()) {
    throw std::invalid_argument("no link for CAV " + std::to_string(id));
  }
  return it->second.rate_mbps;
}

double worst_rate(const std::vector<int>& selected, const LinkState& links) {
  if (selected.empty()) throw std::invalid_argument("no CAVs selected");
  double worst = link_rate(links, selected.front());
  for (std::size_t i = 1; i < selected.size(); ++i) {
    worst = std::min(worst, link_rate(links, selected[i]));
  }
  return worst;
}

}  // namespace

std::pair<double, double> deadline_bounds(const std::vector<int>& selected,
                                          const LinkState& links,
                                          const PayloadSpec& payload,
                                          const std::vector<double>& rho_set) {
  check_rho_set(rho_set);
  const double rate = worst_rate(selected, links);
  return {tx_latency(payload.feature_bits, rho_set.back(), rate),
          tx_latency(payload.feature_bits, 1.0, rate)};
}

double fusion_deadline(double v_d, const DeadlineParams& params) {
  if (v_d < 0.0) throw std::invalid_argument("volatility must be non-negative");
  if (params.alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (params.lf_min_ms > params.lf_max_ms) {
    throw std::invalid_argument("deadline bounds are not ordered");
  }
  // expm1 keeps l_f exactly lf_max at v_d = 0.
  return params.lf_max_ms +
         (params.lf_max_ms - params.lf_min_ms) * std::expm1(-params.alpha * v_d);
}

std::vector<int> identify_stragglers(const std::vector<int>& selected,
                                     const LinkState& links,
                                     const PayloadSpec& payload,
                                     double deadline_ms) {
  std::vector<int> stragglers;
  for (const int id : selected) {
    if (tx_latency(payload.feature_bits, 1.0, link_rate(links, id)) >
        deadline_ms) {
      stragglers.push_back(id);
    }
  }
  std::sort(stragglers.begin(), stragglers.end());
  return stragglers;
}

RhoChoice select_compression(double rate_mbps, const PayloadSpec& payload,
                             double deadline_ms,
                             const std::vector<double>& rho_set) {
  check_rho_set(rho_set);
  for (const double rho : rho_set) {
    if (tx_latency(payload.feature_bits, rho, rate_mbps) <= deadline_ms) {
      return {rho, false};
    }
  }
  return {rho_set.back(), true};
}

FusionPlan build_fusion_plan(const std::vector<int>& selected,
                             const LinkState& links, double v_d,
                             const DeadlineParams& params,
                             const PayloadSpec& payload,
                             const std::vector<double>& rho_set) {
  const auto [lf_min, lf_max] = deadline_bounds(selected, links, payload, rho_set);
  DeadlineParams bounds = params;
  bounds.lf_min_ms = lf_min;
  bounds.lf_max_ms = lf_max;

  FusionPlan plan;
  plan.deadline_ms = fusion_deadline(v_d, bounds);
  plan.straggler_ids =
      identify_stragglers(selected, links, payload, plan.deadline_ms);
  for (const int id : selected) {
    const bool straggler = std::binary_search(plan.straggler_ids.begin(),
                                              plan.straggler_ids.end(), id);
    if (!straggler) {
      plan.rho_per_cav[id] = 1.0;
      continue;
    }
    const RhoChoice choice = select_compression(link_rate(links, id), payload,
                                                plan.deadline_ms, rho_set);
    plan.rho_per_cav[id] = choice.rho;
    if (choice.late) plan.late_ids.push_back(id);
  }
  std::sort(plan.late_ids.begin(), plan.late_ids.end());
  return plan;
}

std::map<int, double> plan_latencies_ms(const FusionPlan& plan,
                                        const LinkState& links,
                                        const PayloadSpec& payload) {
  std::map<int, double> out;
  for (const auto& [id, rho] : plan.rho_per_cav) {
    out[id] = tx_latency(payload.feature_bits, rho, link_rate(links, id));
  }
  return out;
}

double plan_latency_ms(const FusionPlan& plan, const LinkState& links,
                       const PayloadSpec& payload) {
  double worst = 0.0;
  for (const auto& [id, ms] : plan_latencies_ms(plan, links, payload)) {
    if (std::binary_search(plan.late_ids.begin(), plan.late_ids.end(), id)) {
      continue;
    }
    worst = std::max(worst, ms);
  }
  return worst;
}

}  // namespace coopbev
