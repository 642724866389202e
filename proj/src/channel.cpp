#include "coopbev/channel.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace coopbev {

ThroughputProfile low_throughput() { return {15.0, 25.0, 0.05}; }

ThroughputProfile high_throughput() { return {40.0, 50.0, 0.05}; }

ComputeProfile high_end_compute() { return {8.5, 2.03}; }

ComputeProfile embedded_compute() { return {425.7, 3.84}; }

LinkState allocate_rates(const std::map<int, double>& distances,
                         const ThroughputProfile& profile, RngStream& rng) {
  if (profile.band_low <= 0.0 || profile.band_high < profile.band_low) {
    throw std::invalid_argument("throughput band is not ordered");
  }
  LinkState state;
  if (distances.empty()) return state;

  std::vector<std::pair<double, int>> ranked;
  for (const auto& [id, d] : distances) {
    if (d <= 0.0) {
      throw std::invalid_argument("CAV distance must be positive");
    }
    ranked.emplace_back(d, id);
  }
  std::sort(ranked.begin(), ranked.end());

  const double span = profile.band_high - profile.band_low;
  const std::size_t n = ranked.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(rank) / (n - 1);
    double rate = profile.band_high - span * frac;
    if (profile.jitter_frac > 0.0) {
      rate += rate * rng.uniform(-profile.jitter_frac, profile.jitter_frac);
      rate = std::clamp(rate, profile.band_low, profile.band_high);
    }
    state.links[ranked[rank].second] = {rate, ranked[rank].first};
  }
  return state;
}

double tx_latency(double payload_bits, double rho, double rate_mbps) {
  if (payload_bits <= 0.0) throw std::invalid_argument("payload must be positive");
  if (rho < 1.0) throw std::invalid_argument("compression ratio must be at least 1");
  if (rate_mbps <= 0.0) throw std::invalid_argument("rate must be positive");
  return (payload_bits / rho) / (rate_mbps * 1e6) * 1000.0;
}

}  // namespace coopbev
