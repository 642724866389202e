#pragma once

#include <map>

#include "coopbev/rng.hpp"

namespace coopbev {

// V2V band shared by the collaborators; rates are spread over it by distance
// rank. Jitter is uniform within +-jitter_frac of the ranked rate, clipped to
// the band; zero disables it.
struct ThroughputProfile {
  double band_low = 15.0;
  double band_high = 25.0;
  double jitter_frac = 0.05;
};

ThroughputProfile low_throughput();
ThroughputProfile high_throughput();

// Per-frame payload sizes in bits, 1024-based.
struct PayloadSpec {
  double feature_bits = 512.4 * 1024 * 8;
  double image_bits = 2.46 * 1024 * 1024 * 8;
};

struct ComputeProfile {
  double feature_extraction_ms = 8.5;
  double segmentation_head_ms = 2.03;
};

ComputeProfile high_end_compute();
ComputeProfile embedded_compute();

struct Link {
  double rate_mbps = 0.0;
  double distance_m = 0.0;
};

struct LinkState {
  std::map<int, Link> links;
};

// Nearest CAV gets band_high, farthest band_low, the rest linearly by rank;
// distance ties rank by id ascending. One jitter draw per CAV in rank order.
LinkState allocate_rates(const std::map<int, double>& distances,
                         const ThroughputProfile& profile, RngStream& rng);

// Milliseconds to ship payload_bits compressed by rho at rate_mbps.
double tx_latency(double payload_bits, double rho, double rate_mbps);

}  // namespace coopbev
