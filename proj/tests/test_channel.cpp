#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "coopbev/channel.hpp"

using namespace coopbev;

namespace {

ThroughputProfile no_jitter_high() {
  ThroughputProfile p = high_throughput();
  p.jitter_frac = 0.0;
  return p;
}

}  // namespace

TEST_CASE("profile and compute presets") {
  CHECK(low_throughput().band_low == 15.0);
  CHECK(low_throughput().band_high == 25.0);
  CHECK(high_throughput().band_low == 40.0);
  CHECK(high_throughput().band_high == 50.0);
  CHECK(high_end_compute().feature_extraction_ms == 8.5);
  CHECK(high_end_compute().segmentation_head_ms == 2.03);
  CHECK(embedded_compute().feature_extraction_ms == 425.7);
  CHECK(embedded_compute().segmentation_head_ms == 3.84);
}

TEST_CASE("a lone CAV gets the top of the band") {
  RngStream rng(derive_seed(1, 0));
  const LinkState state = allocate_rates({{3, 25.0}}, no_jitter_high(), rng);
  REQUIRE(state.links.size() == 1);
  CHECK(state.links.at(3).rate_mbps == 50.0);
  CHECK(state.links.at(3).distance_m == 25.0);
}

TEST_CASE("rates interpolate linearly by distance rank") {
  RngStream rng(derive_seed(1, 1));
  const LinkState two =
      allocate_rates({{1, 10.0}, {2, 100.0}}, no_jitter_high(), rng);
  CHECK(two.links.at(1).rate_mbps == 50.0);
  CHECK(two.links.at(2).rate_mbps == 40.0);

  const LinkState three =
      allocate_rates({{1, 30.0}, {2, 10.0}, {3, 20.0}}, no_jitter_high(), rng);
  CHECK(three.links.at(2).rate_mbps == 50.0);
  CHECK(three.links.at(3).rate_mbps == 45.0);
  CHECK(three.links.at(1).rate_mbps == 40.0);
}

TEST_CASE("distance ties rank by id") {
  RngStream rng(derive_seed(1, 2));
  const LinkState state =
      allocate_rates({{5, 40.0}, {2, 40.0}}, no_jitter_high(), rng);
  CHECK(state.links.at(2).rate_mbps == 50.0);
  CHECK(state.links.at(5).rate_mbps == 40.0);
}

TEST_CASE("empty set yields an empty link state") {
  RngStream rng(derive_seed(1, 3));
  CHECK(allocate_rates({}, high_throughput(), rng).links.empty());
}

TEST_CASE("non-positive distances and bad bands are rejected") {
  RngStream rng(derive_seed(1, 4));
  CHECK_THROWS_AS(allocate_rates({{1, 0.0}}, high_throughput(), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(allocate_rates({{1, -3.0}}, high_throughput(), rng),
                  std::invalid_argument);
  ThroughputProfile inverted = high_throughput();
  inverted.band_low = 60.0;
  CHECK_THROWS_AS(allocate_rates({{1, 5.0}}, inverted, rng),
                  std::invalid_argument);
}

TEST_CASE("jittered rates stay within the band over many slots") {
  const ThroughputProfile profile = low_throughput();
  bool saw_off_grid = false;
  for (int slot = 0; slot < 10000; ++slot) {
    RngStream rng(derive_seed(slot, 5));
    const LinkState state = allocate_rates(
        {{1, 12.0}, {2, 31.0}, {3, 55.0}, {4, 78.0}}, profile, rng);
    for (const auto& [id, link] : state.links) {
      REQUIRE(link.rate_mbps >= profile.band_low);
      REQUIRE(link.rate_mbps <= profile.band_high);
    }
    // Jitter should move rates off the exact rank grid almost always.
    if (state.links.at(1).rate_mbps != profile.band_high) saw_off_grid = true;
  }
  CHECK(saw_off_grid);
}

TEST_CASE("allocation is reproducible per stream seed") {
  const std::map<int, double> distances = {{1, 12.0}, {2, 31.0}, {3, 55.0}};
  RngStream a(derive_seed(6, 0));
  RngStream b(derive_seed(6, 0));
  RngStream c(derive_seed(6, 1));
  const LinkState first = allocate_rates(distances, high_throughput(), a);
  const LinkState second = allocate_rates(distances, high_throughput(), b);
  const LinkState third = allocate_rates(distances, high_throughput(), c);
  for (const auto& [id, link] : first.links) {
    CHECK(second.links.at(id).rate_mbps == link.rate_mbps);
  }
  // Compare at the middle rank, where the band clip cannot mask the jitter.
  CHECK(third.links.at(2).rate_mbps != first.links.at(2).rate_mbps);
}

TEST_CASE("relabeling CAVs permutes rates with them") {
  // Distinct distances: the rank order ignores labels, so the same physical
  // CAV keeps its rate under any relabeling.
  const std::map<int, double> original = {{1, 12.0}, {2, 31.0}, {3, 55.0}};
  const std::map<int, double> relabeled = {{7, 12.0}, {4, 31.0}, {9, 55.0}};
  RngStream a(derive_seed(7, 0));
  RngStream b(derive_seed(7, 0));
  const LinkState first = allocate_rates(original, high_throughput(), a);
  const LinkState second = allocate_rates(relabeled, high_throughput(), b);
  CHECK(first.links.at(1).rate_mbps == second.links.at(7).rate_mbps);
  CHECK(first.links.at(2).rate_mbps == second.links.at(4).rate_mbps);
  CHECK(first.links.at(3).rate_mbps == second.links.at(9).rate_mbps);
}

TEST_CASE("transmission latency matches the closed form") {
  const PayloadSpec payload;
  CHECK(tx_latency(payload.feature_bits, 1.0, 40.0) ==
        doctest::Approx(104.93952).epsilon(1e-9));
  CHECK(tx_latency(payload.image_bits, 1.0, 15.0) ==
        doctest::Approx(1375.7).epsilon(1e-4));
  CHECK(tx_latency(payload.feature_bits, 2.0, 40.0) ==
        tx_latency(payload.feature_bits, 1.0, 40.0) / 2.0);
}

TEST_CASE("latency falls with compression and rate") {
  const PayloadSpec payload;
  double prev = 1e300;
  for (const double rho : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    const double ms = tx_latency(payload.feature_bits, rho, 25.0);
    CHECK(ms < prev);
    prev = ms;
  }
  CHECK(tx_latency(payload.feature_bits, 1.0, 50.0) <
        tx_latency(payload.feature_bits, 1.0, 15.0));
}

TEST_CASE("transmission latency rejects bad arguments") {
  CHECK_THROWS_AS(tx_latency(0.0, 1.0, 40.0), std::invalid_argument);
  CHECK_THROWS_AS(tx_latency(1000.0, 0.5, 40.0), std::invalid_argument);
  CHECK_THROWS_AS(tx_latency(1000.0, 1.0, 0.0), std::invalid_argument);
}
