#include "coopbev/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace coopbev {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-12;
constexpr int kStationaryMaxIter = 1000000;
constexpr std::uint64_t kEnsembleStreamTag = 0xB4D1;

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void check_kernel(const Kernel& kernel, std::size_t n_states,
                  const std::string& name) {
  if (kernel.size() != n_states) {
    throw std::invalid_argument(name + " kernel has " +
                                std::to_string(kernel.size()) + " rows for " +
                                std::to_string(n_states) + " states");
  }
  for (std::size_t r = 0; r < kernel.size(); ++r) {
    if (kernel[r].size() != n_states) {
      throw std::invalid_argument(name + " kernel row " + std::to_string(r) +
                                  " is not square");
    }
    double sum = 0.0;
    for (double v : kernel[r]) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(name + " kernel row " + std::to_string(r) +
                                    " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw std::invalid_argument(name + " kernel row " + std::to_string(r) +
                                  " does not sum to 1");
    }
  }

  const int n = static_cast<int>(n_states);
  auto reaches_all = [&](bool reversed) {
    std::vector<char> seen(n_states, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        const double p = reversed ? kernel[v][u] : kernel[u][v];
        if (p > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    return count == n;
  };
  if (!reaches_all(false) || !reaches_all(true)) {
    throw std::invalid_argument(name + " kernel is reducible");
  }

  // Period = gcd over edges u->v of level(u) + 1 - level(v) on a BFS tree;
  // any value other than 1 means the chain cycles in lockstep.
  std::vector<int> level(n_states, -1);
  std::queue<int> q;
  q.push(0);
  level[0] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (kernel[u][v] > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  std::int64_t g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (kernel[u][v] > 0.0) {
        g = std::gcd(g, static_cast<std::int64_t>(
                            std::abs(level[u] + 1 - level[v])));
      }
    }
  }
  if (g != 1) {
    throw std::invalid_argument(name + " kernel is periodic");
  }
}

std::vector<double> stationary_distribution(const Kernel& kernel) {
  const std::size_t n = kernel.size();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  for (int iter = 0; iter < kStationaryMaxIter; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        next[j] += x[i] * kernel[i][j];
      }
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      residual = std::max(residual, std::abs(next[j] - x[j]));
    }
    x.swap(next);
    if (residual <= kStationaryTol) return x;
  }
  throw std::runtime_error("stationary distribution did not converge");
}

// Chain ids ordered by current mean descending, ties toward the lower id.
std::vector<int> order_by_gbar(const SelectorState& state) {
  std::vector<int> order(state.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (state.gbar[a] != state.gbar[b]) return state.gbar[a] > state.gbar[b];
    return a < b;
  });
  return order;
}

void mark_selected(SelectorState& state, const std::vector<int>& ids,
                   std::int64_t t) {
  for (int id : ids) {
    state.theta_count[id - 1] += 1;
    state.tau[id - 1] = t;
  }
}

std::vector<int> top_k_by_index(const std::vector<double>& index, int k) {
  std::vector<int> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (index[a] != index[b]) return index[a] > index[b];
    return a < b;
  });
  std::vector<int> ids(order.begin(), order.begin() + k);
  for (int& id : ids) id += 1;
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<double> dirichlet_row(RngStream& rng,
                                  const std::vector<double>& target,
                                  double conc) {
  std::vector<double> row(target.size());
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    row[i] = gamma_sample(rng, conc * std::max(target[i], 1e-9));
    total += row[i];
  }
  for (double& v : row) v /= total;
  return row;
}

}  // namespace

void validate_chain(const RestlessChain& chain) {
  if (chain.rewards.empty()) {
    throw std::invalid_argument("chain has no reward states");
  }
  for (std::size_t i = 0; i < chain.rewards.size(); ++i) {
    if (!std::isfinite(chain.rewards[i])) {
      throw std::invalid_argument("reward values must be finite");
    }
    if (i > 0 && chain.rewards[i] < chain.rewards[i - 1]) {
      throw std::invalid_argument("reward values must be ascending");
    }
  }
  check_kernel(chain.active, chain.rewards.size(), "active");
  check_kernel(chain.passive, chain.rewards.size(), "passive");
  if (chain.state < 0 ||
      chain.state >= static_cast<int>(chain.rewards.size())) {
    throw std::invalid_argument("chain state out of range");
  }
}

StationaryAnalysis stationary_means(const std::vector<RestlessChain>& chains,
                                    int k) {
  const int n = static_cast<int>(chains.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("budget k must satisfy 1 <= k <= n");
  }
  StationaryAnalysis out;
  out.k = k;
  out.mu.resize(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> pi = stationary_distribution(chains[i].active);
    double mu = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) {
      mu += pi[s] * chains[i].rewards[s];
      out.pi_min = std::min(out.pi_min, pi[s]);
    }
    out.mu[i] = mu;
  }
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    if (out.mu[a] != out.mu[b]) return out.mu[a] > out.mu[b];
    return a < b;
  });
  for (int j = 0; j < k; ++j) out.optimal_per_slot += out.mu[out.order[j]];
  for (int j = 0; j < k; ++j) {
    for (int i = k; i < n; ++i) {
      out.gap_sum += out.mu[out.order[j]] - out.mu[out.order[i]];
    }
  }
  for (int& id : out.order) id += 1;
  return out;
}

std::optional<double> chain_step(RestlessChain& chain, bool selected,
                                 RngStream& rng) {
  const double reward = chain.rewards[chain.state];
  const Kernel& kernel = selected ? chain.active : chain.passive;
  const std::vector<double>& row = kernel[chain.state];
  const double u = rng.uniform01();
  double acc = 0.0;
  int next = static_cast<int>(row.size()) - 1;
  for (std::size_t s = 0; s < row.size(); ++s) {
    acc += row[s];
    if (u < acc) {
      next = static_cast<int>(s);
      break;
    }
  }
  chain.state = next;
  if (selected) return reward;
  return std::nullopt;
}

double theta(std::int64_t t, double d) {
  return d * std::log2(static_cast<double>(t));
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kInit:
      return "init";
    case Phase::kExplore:
      return "explore";
    case Phase::kExploit:
      return "exploit";
    case Phase::kIndex:
      return "index";
    case Phase::kRandom:
      return "random";
  }
  return "unknown";
}

std::vector<std::vector<int>> init_batches(int n, int k) {
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += k) {
    std::vector<int> ids;
    for (int i = start; i < std::min(start + k, n); ++i) ids.push_back(i + 1);
    for (int cand = 1; static_cast<int>(ids.size()) < k; ++cand) {
      if (std::find(ids.begin(), ids.end(), cand) == ids.end()) {
        ids.push_back(cand);
      }
    }
    std::sort(ids.begin(), ids.end());
    batches.push_back(std::move(ids));
  }
  return batches;
}

SelectorState make_selector_state(int n, int k, double d) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("budget k must satisfy 1 <= k <= n");
  }
  SelectorState state;
  state.n = n;
  state.k = k;
  state.d = d;
  state.gbar.assign(n, 0.0);
  state.obs_count.assign(n, 0);
  state.theta_count.assign(n, 0);
  state.tau.assign(n, 0);
  state.epoch.groups = init_batches(n, k);
  state.epoch.phase = Phase::kInit;
  state.epoch.reps = 1;
  return state;
}

void observe(SelectorState& state, int id, double value) {
  const int i = id - 1;
  state.obs_count[i] += 1;
  state.gbar[i] +=
      (value - state.gbar[i]) / static_cast<double>(state.obs_count[i]);
}

Action alg1_select(SelectorState& state, int n, int k) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("budget k must satisfy 1 <= k <= n");
  }
  state.t += 1;
  if (state.epoch.done()) {
    const double doubling = static_cast<double>(
        (std::int64_t{2} << state.o_epochs) - 2);
    PendingEpoch next;
    if (doubling / static_cast<double>(k) < theta(state.t, state.d)) {
      const std::vector<int> order = order_by_gbar(state);
      const int n_groups = ceil_div(n, k);
      for (int gi = 0; gi < n_groups; ++gi) {
        std::vector<int> ids;
        for (int j = gi * k; j < std::min((gi + 1) * k, n); ++j) {
          ids.push_back(order[j] + 1);
        }
        for (int cand : order) {
          if (static_cast<int>(ids.size()) >= k) break;
          if (std::find(ids.begin(), ids.end(), cand + 1) == ids.end()) {
            ids.push_back(cand + 1);
          }
        }
        std::sort(ids.begin(), ids.end());
        next.groups.push_back(std::move(ids));
      }
      next.phase = Phase::kExplore;
      next.reps = std::int64_t{1} << (state.o_epochs - 1);
      next.advances_o = true;
    } else {
      const std::vector<int> order = order_by_gbar(state);
      std::vector<int> ids(order.begin(), order.begin() + k);
      for (int& id : ids) id += 1;
      std::sort(ids.begin(), ids.end());
      next.groups.push_back(std::move(ids));
      next.phase = Phase::kExploit;
      next.reps = std::int64_t{1} << (state.i_epochs - 1);
      next.advances_i = true;
    }
    state.epoch = std::move(next);
  }
  PendingEpoch& epoch = state.epoch;
  const std::vector<int>& ids = epoch.groups[epoch.emitted / epoch.reps];
  epoch.emitted += 1;
  mark_selected(state, ids, state.t);
  if (epoch.done()) {
    if (epoch.advances_o) state.o_epochs += 1;
    if (epoch.advances_i) state.i_epochs += 1;
  }
  return {ids, epoch.phase};
}

Action ecop_select(SelectorState& state, int n, int k, std::int64_t t) {
  state.t = t;
  if (!state.epoch.done()) {
    PendingEpoch& epoch = state.epoch;
    const std::vector<int>& ids = epoch.groups[epoch.emitted / epoch.reps];
    epoch.emitted += 1;
    mark_selected(state, ids, t);
    return {ids, Phase::kInit};
  }
  std::vector<double> index(n);
  for (int i = 0; i < n; ++i) {
    index[i] = state.gbar[i] +
               std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                         (3.0 * static_cast<double>(state.theta_count[i])));
  }
  std::vector<int> ids = top_k_by_index(index, k);
  mark_selected(state, ids, t);
  return {std::move(ids), Phase::kIndex};
}

Action mass_select(SelectorState& state, int n, int k, std::int64_t t) {
  state.t = t;
  std::vector<double> index(n);
  for (int i = 0; i < n; ++i) {
    index[i] = state.gbar[i] +
               0.6 * std::sqrt(static_cast<double>(t - state.tau[i]));
  }
  std::vector<int> ids = top_k_by_index(index, k);
  mark_selected(state, ids, t);
  return {std::move(ids), Phase::kIndex};
}

std::vector<int> random_select(int n, int k, RngStream& rng) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 1);
  for (int i = 0; i < k; ++i) {
    const int j = i + rng.uniform_int(n - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> ids(pool.begin(), pool.begin() + k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> optimal_select(const std::vector<double>& hidden_g, int k) {
  return top_k_by_index(hidden_g, k);
}

double regret(const std::vector<double>& realized_per_slot,
              const StationaryAnalysis& analysis, std::int64_t horizon) {
  if (static_cast<std::int64_t>(realized_per_slot.size()) < horizon) {
    throw std::invalid_argument("realized trace shorter than horizon");
  }
  double realized = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t) realized += realized_per_slot[t];
  return static_cast<double>(horizon) * analysis.optimal_per_slot - realized;
}

BoundReport bound_check(const SelectorState& state, std::int64_t t, int n,
                        int k, double d) {
  if (t <= ceil_div(n, k)) {
    throw std::invalid_argument("bound_check requires a slot past initialization");
  }
  BoundReport report;
  report.o_completed = state.o_epochs - 1;
  report.i_completed = state.i_epochs - 1;
  report.o_limit = std::log2(
      (static_cast<double>(k) * d * std::log2(static_cast<double>(t)) + 2.0) /
      2.0);
  report.i_limit = std::log2(static_cast<double>(t) -
                             static_cast<double>(n) / static_cast<double>(k) +
                             1.0);
  if (static_cast<double>(report.o_completed) > report.o_limit) {
    report.ok = false;
    report.message = "exploration-epoch bound violated at slot " +
                     std::to_string(t) + ": completed " +
                     std::to_string(report.o_completed) + " > limit " +
                     std::to_string(report.o_limit);
  } else if (static_cast<double>(report.i_completed) > report.i_limit) {
    report.ok = false;
    report.message = "exploitation-epoch bound violated at slot " +
                     std::to_string(t) + ": completed " +
                     std::to_string(report.i_completed) + " > limit " +
                     std::to_string(report.i_limit);
  }
  return report;
}

std::vector<RestlessChain> make_default_ensemble(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ensemble needs at least one chain");
  const std::vector<double> rewards = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  const double floor = 0.002;
  const double shift = 0.25;
  const double leak = 0.06;
  const double stay_cold = 0.95;
  const double conc = 2000.0;
  const double top_conc = 50000.0;
  const double top_a3[] = {0.995, 0.9935};

  RngStream rng(derive_seed(seed, kEnsembleStreamTag));
  std::vector<RestlessChain> chains;
  chains.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> target_a(4, floor);
    std::vector<double> target_p(4, floor);
    RestlessChain chain;
    chain.rewards = rewards;
    chain.state = 0;
    if (i < 2) {
      // Concentrated top arm; idle drift is a bounded downshift of the
      // dominant state, so its observable rewards never fall below 2/3.
      // The pair's means sit close together: whichever of the two an early
      // tie locks in, the per-slot cost stays negligible.
      const double a3 = top_a3[i];
      target_a[2] = 1.0 - a3 - 2.0 * floor;
      target_a[3] = a3;
      const double p3 = std::max(a3 - shift, floor);
      target_p[2] = 1.0 - p3 - 2.0 * floor;
      target_p[3] = p3;
      const std::vector<double> a_row = dirichlet_row(rng, target_a, top_conc);
      const std::vector<double> p_row = dirichlet_row(rng, target_p, top_conc);
      chain.active.assign(4, a_row);
      chain.passive.assign(4, p_row);
    } else {
      // Mid arm on the two middle states: reward support capped at 2/3,
      // mean laddered downward with id. Idle drift shifts mass down one
      // state and leaks a little into a sticky cold state.
      const double a1 = std::min(0.26 + 0.03 * static_cast<double>(i - 2), 0.90);
      const double a2 = 1.0 - a1 - 2.0 * floor;
      target_a[1] = a1;
      target_a[2] = a2;
      const double p2 = std::max(a2 - shift, floor);
      target_p[1] = a1 + (a2 - p2);
      target_p[2] = p2;
      target_p[0] += leak;
      double sum = 0.0;
      for (double v : target_p) sum += v;
      for (double& v : target_p) v /= sum;
      std::vector<double> target_cold(4);
      const double rest = target_p[1] + target_p[2] + target_p[3];
      target_cold[0] = stay_cold;
      for (int s = 1; s < 4; ++s) {
        target_cold[s] = target_p[s] * (1.0 - stay_cold) / rest;
      }
      const std::vector<double> a_row = dirichlet_row(rng, target_a, conc);
      const std::vector<double> p_row = dirichlet_row(rng, target_p, conc);
      const std::vector<double> cold_row = dirichlet_row(rng, target_cold, conc);
      chain.active.assign(4, a_row);
      chain.passive.assign(4, p_row);
      chain.passive[0] = cold_row;
    }
    validate_chain(chain);
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace coopbev
