#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopbev/rng.hpp"

namespace coopbev {

using Kernel = std::vector<std::vector<double>>;

// Hidden Markov reward process for one collaborator. The state advances by
// active rows when the CAV is selected and by passive rows otherwise, so the
// process keeps evolving while unobserved.
struct RestlessChain {
  std::vector<double> rewards;  // reward value per state, ascending
  Kernel active;
  Kernel passive;
  int state = 0;
};

// Throws std::invalid_argument naming the offending kernel when a kernel is
// not row-stochastic, not irreducible, or periodic, or when reward values are
// not finite and ascending.
void validate_chain(const RestlessChain& chain);

struct StationaryAnalysis {
  std::vector<double> mu;  // long-run mean reward per chain under selection
  std::vector<int> order;  // chain ids (1-based), mu descending, ties by id
  double optimal_per_slot = 0.0;  // sum of the k largest mu
  double gap_sum = 0.0;  // sum of mu gaps between every top-k / rest pair
  double pi_min = 1.0;   // smallest stationary probability across chains
  int k = 0;
};

// Stationary distribution of each active kernel by power iteration to 1e-12
// residual; throws std::runtime_error on non-convergence.
StationaryAnalysis stationary_means(const std::vector<RestlessChain>& chains,
                                    int k);

// One slot of chain evolution. Selected: the pre-transition reward is
// returned and the active kernel applies. Unselected: the passive kernel
// applies and nothing is observed.
std::optional<double> chain_step(RestlessChain& chain, bool selected,
                                 RngStream& rng);

// Exploration threshold: d * log2(t). Callers keep t >= 1 and d > 0.
double theta(std::int64_t t, double d);

enum class Phase { kInit, kExplore, kExploit, kIndex, kRandom };

const char* phase_name(Phase p);

struct Action {
  std::vector<int> ids;  // selected CAV ids, ascending, always k of them
  Phase phase = Phase::kInit;
};

// One scheduled run of identical-structure slots: each group of ids is
// emitted for `reps` consecutive slots, groups in order. Kept compact so
// long exploitation runs cost no memory.
struct PendingEpoch {
  std::vector<std::vector<int>> groups;
  Phase phase = Phase::kInit;
  std::int64_t reps = 1;
  std::int64_t emitted = 0;
  bool advances_o = false;
  bool advances_i = false;

  std::int64_t total() const {
    return reps * static_cast<std::int64_t>(groups.size());
  }
  bool done() const { return emitted >= total(); }
};

// Shared learner memory for every selection policy.
struct SelectorState {
  int n = 0;
  int k = 0;
  double d = 0.5;
  std::int64_t t = 0;  // last emitted slot
  std::vector<double> gbar;
  std::vector<std::int64_t> obs_count;
  std::vector<std::int64_t> theta_count;  // times each CAV was selected
  std::vector<std::int64_t> tau;          // slot each CAV was last selected
  std::int64_t o_epochs = 1;  // exploration epochs, counts from 1
  std::int64_t i_epochs = 1;  // exploitation epochs, counts from 1
  PendingEpoch epoch;
};

// Id-ordered batches of size k covering ids 1..n; a short final batch is
// padded with the lowest ids not already in it.
std::vector<std::vector<int>> init_batches(int n, int k);

SelectorState make_selector_state(int n, int k, double d);

// Folds one observed contribution into the running mean of CAV `id`.
void observe(SelectorState& state, int id, double value);

// Epoch-structured selector: id-ordered initialization, then doubling
// exploration epochs over gbar-ranked groups whenever the threshold permits,
// doubling exploitation of the top-k otherwise. Advances state.t.
Action alg1_select(SelectorState& state, int n, int k);

// Index policy gbar + sqrt(2 ln t / (3 theta)), after a forced one-pull-each
// initialization in id order.
Action ecop_select(SelectorState& state, int n, int k, std::int64_t t);

// Index policy gbar + 0.6 sqrt(t - tau); tau starts at 0 and updates on
// selection.
Action mass_select(SelectorState& state, int n, int k, std::int64_t t);

// Uniform k-subset of 1..n.
std::vector<int> random_select(int n, int k, RngStream& rng);

// Hindsight top-k by the current true per-CAV values, ties by id.
std::vector<int> optimal_select(const std::vector<double>& hidden_g, int k);

// Cumulative gap between the stationary-optimal per-slot value and the
// realized per-slot sums over slots 1..horizon.
double regret(const std::vector<double>& realized_per_slot,
              const StationaryAnalysis& analysis, std::int64_t horizon);

struct BoundReport {
  bool ok = true;
  std::int64_t o_completed = 0;
  std::int64_t i_completed = 0;
  double o_limit = 0.0;
  double i_limit = 0.0;
  std::string message;  // names the violated bound when not ok
};

// Checks the completed epoch counters against their growth bounds at slot t.
// Requires t past the initialization slots.
BoundReport bound_check(const SelectorState& state, std::int64_t t, int n,
                        int k, double d);

// Frozen 4-state ensemble used by the synthetic benchmarks. Arms are ordered
// best-first by id: two concentrated high-reward arms whose idle drift is a
// bounded one-state downshift, then a ladder of mid arms capped below the
// top arms' worst observable average, all starting in a cold low state.
std::vector<RestlessChain> make_default_ensemble(int n, std::uint64_t seed);

}  // namespace coopbev
