#include "coopbev/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "coopbev/channel.hpp"
#include "coopbev/fusion.hpp"
#include "coopbev/rng.hpp"

namespace coopbev {
namespace {

// Sub-stream tags hung off the run seed; every randomness consumer gets its
// own counter stream so replacing one stage never shifts another.
constexpr std::uint64_t kWorldTag = 1;
constexpr std::uint64_t kChainTag = 2;
constexpr std::uint64_t kPolicyTag = 3;
constexpr std::uint64_t kChannelTag = 4;
constexpr std::uint64_t kPerceptionTag = 5;

// Fused maps are consumed no earlier than the next slot boundary, so plans
// faster than one slot still stale the map by one step.
constexpr double kEvalFloorMs = 100.0;
constexpr double kMsPerSlot = kSlotSeconds * 1000.0;

bool contains(const std::vector<int>& sorted_ids, int id) {
  return std::binary_search(sorted_ids.begin(), sorted_ids.end(), id);
}

}  // namespace

struct SlotSim::Impl {
  RunConfig cfg;
  std::uint32_t seed;
  std::int64_t t = 0;  // last emitted slot
  double cum_regret = 0.0;

  bool synthetic = false;
  bool has_selector = false;
  SelectorState sel;
  RngStream policy_rng;

  // synthetic mode
  std::vector<RestlessChain> chains;
  std::vector<RngStream> chain_rng;
  StationaryAnalysis analysis;

  // end-to-end mode
  WorldState world;
  MotionModel motion;
  DetectionModel det;
  ThroughputProfile profile;
  PayloadSpec payload;
  ComputeProfile compute;
  CompensationParams comp;

  Impl(const RunConfig& config, std::uint32_t run_seed)
      : cfg(config),
        seed(run_seed),
        policy_rng(derive_seed(run_seed, kPolicyTag)) {
    synthetic = cfg.mode == Mode::kSynthetic;
    has_selector = cfg.policy == Policy::kAlg1 || cfg.policy == Policy::kEcop ||
                   cfg.policy == Policy::kMass;
    if (has_selector) sel = make_selector_state(cfg.n_cavs, cfg.k, cfg.d);
    if (synthetic) {
      chains = make_default_ensemble(cfg.n_cavs, cfg.ensemble_seed);
      analysis = stationary_means(chains, cfg.k);
      chain_rng.reserve(chains.size());
      for (std::size_t i = 0; i < chains.size(); ++i)
        chain_rng.emplace_back(derive_seed(run_seed, kChainTag, i));
    } else {
      motion = cfg.motion;
      motion.seed = derive_seed(run_seed, kWorldTag);
      WorldInit init;
      init.layout = cfg.world_layout();
      init.n_collaborators = cfg.n_cavs;
      init.m_objects = cfg.m_objects;
      init.spacing = cfg.spacing;
      init.collaborator_ring = cfg.collaborator_ring;
      init.motion = motion;
      world = make_world(init);
      det.base_detection_prob = cfg.base_detection_prob;
      det.distance_decay = cfg.distance_decay;
      profile = cfg.throughput();
      payload = cfg.payload();
      compute = cfg.compute_profile();
      comp = {cfg.beta, cfg.gamma, 1.0};
    }
  }

  Action select_action() {
    switch (cfg.policy) {
      case Policy::kAlg1:
        return alg1_select(sel, cfg.n_cavs, cfg.k);
      case Policy::kEcop:
        return ecop_select(sel, cfg.n_cavs, cfg.k, t);
      case Policy::kMass:
        return mass_select(sel, cfg.n_cavs, cfg.k, t);
      case Policy::kRandom:
        return {random_select(cfg.n_cavs, cfg.k, policy_rng), Phase::kRandom};
      case Policy::kOptimal: {
        std::vector<double> hidden(chains.size());
        for (std::size_t i = 0; i < chains.size(); ++i)
          hidden[i] = chains[i].rewards[chains[i].state];
        return {optimal_select(hidden, cfg.k), Phase::kIndex};
      }
    }
    return {};
  }

  SlotRecord step_synthetic() {
    SlotRecord rec;
    rec.slot = t;
    rec.policy = policy_name(cfg.policy);
    const Action action = select_action();
    rec.phase = phase_name(action.phase);
    rec.action = action.ids;

    double realized = 0.0;
    for (int i = 0; i < cfg.n_cavs; ++i) {
      const bool selected = contains(action.ids, i + 1);
      const auto r = chain_step(chains[i], selected, chain_rng[i]);
      if (!selected) continue;
      realized += *r;
      if (has_selector) observe(sel, i + 1, *r);
      PerCavSlot cav;
      cav.id = i + 1;
      cav.observed = has_selector;
      cav.realized = *r;
      cav.compensated = *r;
      rec.cavs.push_back(cav);
    }
    rec.regret_increment = analysis.optimal_per_slot - realized;
    cum_regret += rec.regret_increment;
    rec.cum_regret = cum_regret;
    return rec;
  }

  // Volatility-driven deadline from the selected links, or the configured
  // fixed one.
  double slot_deadline(const std::vector<int>& ids, const LinkState& links,
                       double v_d, const PayloadSpec& pay) const {
    if (cfg.fixed_deadline) return cfg.fixed_deadline_ms;
    const auto [lf_min, lf_max] = deadline_bounds(ids, links, pay, cfg.rho_set);
    DeadlineParams params;
    params.alpha = cfg.alpha;
    params.lf_min_ms = lf_min;
    params.lf_max_ms = lf_max;
    return fusion_deadline(v_d, params);
  }

  // Plan with one ratio for everybody, or per-straggler selection when
  // compress_stragglers is set. Late means the chosen ratio still misses the
  // deadline.
  FusionPlan uniform_plan(const std::vector<int>& ids, const LinkState& links,
                          double deadline_ms, const PayloadSpec& pay,
                          bool compress_stragglers, double fixed_rho) const {
    FusionPlan plan;
    plan.deadline_ms = deadline_ms;
    plan.straggler_ids = identify_stragglers(ids, links, pay, deadline_ms);
    for (int id : ids) {
      const double rate = links.links.at(id).rate_mbps;
      double rho = fixed_rho;
      if (compress_stragglers) {
        rho = 1.0;
        if (contains(plan.straggler_ids, id))
          rho = select_compression(rate, pay, deadline_ms, cfg.rho_set).rho;
      }
      plan.rho_per_cav[id] = rho;
      if (tx_latency(pay.feature_bits, rho, rate) > deadline_ms)
        plan.late_ids.push_back(id);
    }
    return plan;
  }

  FusionPlan compose_plan(const std::vector<int>& ids, const LinkState& links,
                          double v_d, const PayloadSpec& pay) const {
    FusionPlan plan;
    if (ids.empty()) return plan;
    switch (cfg.pipeline) {
      case Pipeline::kAdaptive: {
        if (!cfg.fixed_deadline) {
          DeadlineParams params;
          params.alpha = cfg.alpha;
          return build_fusion_plan(ids, links, v_d, params, pay, cfg.rho_set);
        }
        return uniform_plan(ids, links, cfg.fixed_deadline_ms, pay, true, 1.0);
      }
      case Pipeline::kHarbor: {
        const double deadline =
            cfg.fixed_deadline ? cfg.fixed_deadline_ms : 500.0;
        return uniform_plan(ids, links, deadline, pay, false, 1.0);
      }
      case Pipeline::kMaxRho:
        return uniform_plan(ids, links, slot_deadline(ids, links, v_d, pay),
                            pay, false, cfg.rho_set.back());
      case Pipeline::kMinRho:
        return uniform_plan(ids, links, slot_deadline(ids, links, v_d, pay),
                            pay, false, 1.0);
      case Pipeline::kEarlyFusion: {
        // The deadline is the worst selected link's uncompressed time, so by
        // construction nothing straggles; the cost shows up as staleness.
        const auto bounds = deadline_bounds(ids, links, pay, cfg.rho_set);
        return uniform_plan(ids, links, bounds.second, pay, false, 1.0);
      }
      case Pipeline::kNoFusion:
        return plan;
    }
    return plan;
  }

  SlotRecord step_e2e() {
    SlotRecord rec;
    rec.slot = t;
    rec.policy = policy_name(cfg.policy);

    Action action;
    if (cfg.pipeline == Pipeline::kNoFusion) {
      rec.phase = "none";
    } else {
      action = select_action();
      rec.phase = phase_name(action.phase);
    }
    rec.action = action.ids;

    // Every collaborator holds a link each slot; selection only decides whose
    // features ride it, so link draws match across policies and pipelines.
    std::map<int, double> distances;
    for (const auto& cav : world.collaborators)
      distances[cav.id] = std::hypot(cav.pose.x - world.ego.pose.x,
                                     cav.pose.y - world.ego.pose.y);
    RngStream channel_rng(derive_seed(seed, kChannelTag, t));
    const LinkState links = allocate_rates(distances, profile, channel_rng);

    const geom::OrientedRect fov{world.ego.pose, cfg.grid_extent,
                                 cfg.grid_extent};
    rec.v_d = driving_volatility(world, fov);

    PayloadSpec tx_payload = payload;
    if (cfg.pipeline == Pipeline::kEarlyFusion)
      tx_payload.feature_bits = payload.image_bits;
    const FusionPlan plan = compose_plan(action.ids, links, rec.v_d, tx_payload);
    rec.deadline_ms = plan.deadline_ms;

    // Features landing after the deadline still fuse if they beat the
    // evaluation instant; the fixed-deadline baseline discards them instead.
    const double eval_instant = std::max(plan.deadline_ms, kEvalFloorMs);
    std::vector<int> included_ids;
    // The plan is done when its window closes or its last admitted feature
    // lands, whichever is later; waiting out an empty window still costs the
    // full window.
    double plan_latency = plan.deadline_ms;
    for (int id : action.ids) {
      const Link& link = links.links.at(id);
      PerCavSlot cav;
      cav.id = id;
      cav.rate_mbps = link.rate_mbps;
      cav.distance_m = link.distance_m;
      cav.rho = plan.rho_per_cav.at(id);
      cav.tx_ms = tx_latency(tx_payload.feature_bits, cav.rho, link.rate_mbps);
      cav.straggler = contains(plan.straggler_ids, id);
      cav.late = contains(plan.late_ids, id);
      cav.included = cfg.pipeline == Pipeline::kHarbor ? !cav.late
                                                       : cav.tx_ms <= eval_instant;
      if (cav.included) {
        included_ids.push_back(id);
        plan_latency = std::max(plan_latency, cav.tx_ms);
      }
      rec.cavs.push_back(cav);
    }
    rec.plan_latency_ms = plan_latency;

    // Local views for the ego and all collaborators come from per-observer
    // streams, so the same maps exist no matter who was selected.
    const BevGrid ground = render_ground_truth(world, fov, cfg.cell_size);
    std::map<int, BevGrid> grids;
    {
      RngStream ego_rng(derive_seed(seed, kPerceptionTag, t, 0));
      grids.emplace(0, render_local_bev(world.ego, ground, det, ego_rng));
    }
    for (const auto& cav : world.collaborators) {
      RngStream obs_rng(derive_seed(seed, kPerceptionTag, t, cav.id));
      grids.emplace(cav.id, render_local_bev(cav, ground, det, obs_rng));
    }
    std::vector<BevGrid> to_fuse;
    to_fuse.push_back(grids.at(0));
    for (int id : included_ids) to_fuse.push_back(grids.at(id));
    const BevGrid fused = fuse_bev(to_fuse);

    for (auto& cav : rec.cavs) {
      if (!cav.included) continue;
      const double m =
          marginal_segmentation_accuracy(included_ids, cav.id, grids);
      if (cfg.pipeline == Pipeline::kEarlyFusion) {
        cav.realized = m;
        cav.compensated = m;
      } else {
        const auto effect = apply_compression_effect(m, cav.rho, comp);
        cav.realized = effect.realized;
        cav.compensated = marginal_bev_contribution(
            effect.realized, compression_degradation(cav.rho, comp),
            cfg.omega);
      }
      if (has_selector) {
        observe(sel, cav.id, cav.compensated);
        cav.observed = true;
      }
    }

    // The map built now describes the world as of this slot but is consumed
    // plan_latency later; score it against the ground truth it will face.
    rec.staleness_steps =
        plan_latency <= 0.0
            ? 0
            : static_cast<int>(std::ceil(plan_latency / kMsPerSlot));
    WorldState future = world;
    for (int s = 0; s < rec.staleness_steps; ++s)
      future = advance_world(future, motion);
    const BevGrid eval_truth = render_ground_truth(future, fov, cfg.cell_size);
    rec.iou_proxy = iou(fused, eval_truth);

    // Hindsight novelty: what each collaborator alone would have added to the
    // ego view, compared against the best k picks.
    std::map<int, double> novelty;
    std::vector<double> all_novelty;
    for (const auto& cav : world.collaborators) {
      const double u =
          1.0 - iou(fuse_bev({grids.at(0), grids.at(cav.id)}), grids.at(0));
      novelty[cav.id] = u;
      all_novelty.push_back(u);
    }
    std::sort(all_novelty.begin(), all_novelty.end(), std::greater<>());
    double best = 0.0;
    for (int i = 0; i < cfg.k && i < static_cast<int>(all_novelty.size()); ++i)
      best += all_novelty[i];
    double attained = 0.0;
    for (int id : included_ids) attained += novelty.at(id);
    rec.regret_increment = best - attained;
    cum_regret += rec.regret_increment;
    rec.cum_regret = cum_regret;

    rec.latency.tx_ms = plan_latency;
    rec.latency.extraction_ms = compute.feature_extraction_ms;
    rec.latency.head_ms = compute.segmentation_head_ms;
    rec.latency.selection_overhead_ms =
        has_selector && cfg.pipeline != Pipeline::kNoFusion
            ? cfg.k * compute.segmentation_head_ms
            : 0.0;
    rec.latency.total_ms = rec.latency.tx_ms + rec.latency.extraction_ms +
                           rec.latency.head_ms +
                           rec.latency.selection_overhead_ms;

    world = advance_world(world, motion);
    return rec;
  }

  SlotRecord step() {
    ++t;
    return synthetic ? step_synthetic() : step_e2e();
  }
};

SlotSim::SlotSim(const RunConfig& config, std::uint32_t seed)
    : impl_(std::make_unique<Impl>(config, seed)) {}

SlotSim::~SlotSim() = default;
SlotSim::SlotSim(SlotSim&&) noexcept = default;
SlotSim& SlotSim::operator=(SlotSim&&) noexcept = default;

SlotRecord SlotSim::step() { return impl_->step(); }

std::int64_t SlotSim::current_slot() const { return impl_->t; }

const SelectorState* SlotSim::selector() const {
  return impl_->has_selector ? &impl_->sel : nullptr;
}

const StationaryAnalysis* SlotSim::analysis() const {
  return impl_->synthetic ? &impl_->analysis : nullptr;
}

SeedSummary run_seed(const RunConfig& config, std::uint32_t seed,
                     const RecordSink& sink) {
  SlotSim sim(config, seed);
  SeedSummary out;
  out.seed = seed;
  out.straggler_hist.assign(config.k + 1, 0);
  const std::int64_t stride = std::max<std::int64_t>(1, config.horizon / 100);

  double plan_sum = 0.0, total_sum = 0.0, iou_sum = 0.0;
  double deadline_sum = 0.0, vd_sum = 0.0;
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    const SlotRecord rec = sim.step();
    if (sink) sink(seed, rec);
    plan_sum += rec.plan_latency_ms;
    total_sum += rec.latency.total_ms;
    iou_sum += rec.iou_proxy;
    deadline_sum += rec.deadline_ms;
    vd_sum += rec.v_d;
    int stragglers = 0;
    for (const auto& cav : rec.cavs) {
      if (cav.straggler) ++stragglers;
      if (!cav.included) ++out.late_drops;
    }
    out.straggler_slots += stragglers;
    ++out.straggler_hist[stragglers];
    if (t % stride == 0 || t == config.horizon)
      out.regret_curve.emplace_back(t, rec.cum_regret);
    out.final_regret = rec.cum_regret;
  }
  const double slots = static_cast<double>(config.horizon);
  out.mean_plan_latency_ms = plan_sum / slots;
  out.mean_total_latency_ms = total_sum / slots;
  out.mean_iou = iou_sum / slots;
  out.mean_deadline_ms = deadline_sum / slots;
  out.mean_v_d = vd_sum / slots;

  const std::int64_t init_slots =
      (config.n_cavs + config.k - 1) / config.k;
  if (config.policy == Policy::kAlg1 && config.horizon > init_slots) {
    const BoundReport report = bound_check(*sim.selector(), config.horizon,
                                           config.n_cavs, config.k, config.d);
    if (!report.ok) throw InvariantError(report.message);
  }
  return out;
}

ExperimentResult run_experiment(const RunConfig& config,
                                const RecordSink& sink) {
  ExperimentResult result;
  result.config = config;
  for (std::uint32_t seed : config.seeds)
    result.per_seed.push_back(run_seed(config, seed, sink));

  const double n = static_cast<double>(result.per_seed.size());
  if (n > 0) {
    AggregateSummary& m = result.means;
    for (const auto& s : result.per_seed) {
      m.final_regret += s.final_regret / n;
      m.mean_plan_latency_ms += s.mean_plan_latency_ms / n;
      m.mean_total_latency_ms += s.mean_total_latency_ms / n;
      m.mean_iou += s.mean_iou / n;
      m.mean_deadline_ms += s.mean_deadline_ms / n;
      m.mean_v_d += s.mean_v_d / n;
      m.straggler_slots += static_cast<double>(s.straggler_slots) / n;
      m.late_drops += static_cast<double>(s.late_drops) / n;
    }
  }
  return result;
}

}  // namespace coopbev
