#include "coopbev/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coopbev/text.hpp"

namespace coopbev {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double_value(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const double v = std::stod(value, &idx);
    if (idx != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + value);
  }
}

std::int64_t parse_int_value(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const long long v = std::stoll(value, &idx);
    if (idx != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an integer: " + value);
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

// Pulls keys out of the map so that leftovers flag typos.
class KvReader {
 public:
  explicit KvReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool take(const std::string& key, std::string& out) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return false;
    out = it->second;
    kv_.erase(it);
    return true;
  }

  void take_double(const std::string& key, double& out) {
    std::string raw;
    if (take(key, raw)) out = parse_double_value(key, raw);
  }

  void take_int(const std::string& key, int& out) {
    std::string raw;
    if (take(key, raw)) out = static_cast<int>(parse_int_value(key, raw));
  }

  void take_int64(const std::string& key, std::int64_t& out) {
    std::string raw;
    if (take(key, raw)) out = parse_int_value(key, raw);
  }

  void finish() const {
    if (!kv_.empty()) {
      throw ConfigError("unknown config key: " + kv_.begin()->first);
    }
  }

 private:
  std::map<std::string, std::string> kv_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

const std::set<double> kAllowedRhos = {1, 2, 4, 8, 16, 32, 64};

const std::set<std::string> kNonScenarioKeys = {
    "policy", "pipeline", "output_dir", "sweep_workers", "record_stride"};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::uint64_t hash_lines(const std::map<std::string, std::string>& kv,
                         bool scenario_only) {
  std::string text;
  for (const auto& [key, value] : kv) {
    if (scenario_only && kNonScenarioKeys.count(key)) continue;
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  return fnv1a64(text);
}

}  // namespace

std::string mode_name(Mode mode) {
  return mode == Mode::kSynthetic ? "synthetic" : "e2e";
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::kAlg1: return "alg1";
    case Policy::kEcop: return "ecop";
    case Policy::kMass: return "mass";
    case Policy::kRandom: return "random";
    case Policy::kOptimal: return "optimal";
  }
  return "alg1";
}

std::string pipeline_name(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::kAdaptive: return "adaptive";
    case Pipeline::kHarbor: return "harbor";
    case Pipeline::kMaxRho: return "max_rho";
    case Pipeline::kMinRho: return "min_rho";
    case Pipeline::kEarlyFusion: return "early_fusion";
    case Pipeline::kNoFusion: return "no_fusion";
  }
  return "adaptive";
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key = value: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " has an empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("duplicate config key: " + key);
    }
  }
  return kv;
}

RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  KvReader reader(kv);
  RunConfig cfg;
  std::string raw;

  if (reader.take("mode", raw)) {
    if (raw == "synthetic") cfg.mode = Mode::kSynthetic;
    else if (raw == "e2e") cfg.mode = Mode::kEndToEnd;
    else throw ConfigError("mode must be synthetic or e2e, got " + raw);
  }
  if (reader.take("policy", raw)) {
    if (raw == "alg1") cfg.policy = Policy::kAlg1;
    else if (raw == "ecop") cfg.policy = Policy::kEcop;
    else if (raw == "mass") cfg.policy = Policy::kMass;
    else if (raw == "random") cfg.policy = Policy::kRandom;
    else if (raw == "optimal") cfg.policy = Policy::kOptimal;
    else throw ConfigError("unknown policy: " + raw);
  }
  if (reader.take("pipeline", raw)) {
    if (raw == "adaptive") cfg.pipeline = Pipeline::kAdaptive;
    else if (raw == "harbor") cfg.pipeline = Pipeline::kHarbor;
    else if (raw == "max_rho") cfg.pipeline = Pipeline::kMaxRho;
    else if (raw == "min_rho") cfg.pipeline = Pipeline::kMinRho;
    else if (raw == "early_fusion") cfg.pipeline = Pipeline::kEarlyFusion;
    else if (raw == "no_fusion") cfg.pipeline = Pipeline::kNoFusion;
    else throw ConfigError("unknown pipeline: " + raw);
  }

  reader.take_int64("horizon", cfg.horizon);
  if (cfg.horizon == 0) {
    cfg.horizon = cfg.mode == Mode::kSynthetic ? 100000 : 10000;
  }

  if (reader.take("seeds", raw)) {
    cfg.seeds.clear();
    for (const std::string& part : split_list(raw)) {
      const std::int64_t seed = parse_int_value("seeds", part);
      require(seed >= 0, "seeds must be non-negative");
      cfg.seeds.push_back(static_cast<std::uint32_t>(seed));
    }
  } else {
    for (std::uint32_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
  }

  reader.take_int("n_cavs", cfg.n_cavs);
  reader.take_int("k", cfg.k);
  reader.take_double("d", cfg.d);
  reader.take_double("omega", cfg.omega);
  reader.take_double("alpha", cfg.alpha);
  reader.take_double("beta", cfg.beta);
  reader.take_double("gamma", cfg.gamma);

  if (reader.take("rho_set", raw)) {
    cfg.rho_set.clear();
    for (const std::string& part : split_list(raw)) {
      cfg.rho_set.push_back(parse_double_value("rho_set", part));
    }
  }

  if (reader.take("profile", raw)) {
    require(raw == "low" || raw == "high", "profile must be low or high");
    cfg.profile = raw;
  }
  reader.take_double("jitter_frac", cfg.jitter_frac);

  if (reader.take("deadline_mode", raw)) {
    if (raw == "volatility") {
      cfg.fixed_deadline = false;
    } else if (raw.rfind("fixed:", 0) == 0) {
      cfg.fixed_deadline = true;
      cfg.fixed_deadline_ms = parse_double_value("deadline_mode", raw.substr(6));
    } else {
      throw ConfigError("deadline_mode must be volatility or fixed:<ms>");
    }
  }

  reader.take_double("cell_size", cfg.cell_size);
  reader.take_double("grid_extent", cfg.grid_extent);
  reader.take_double("base_detection_prob", cfg.base_detection_prob);
  reader.take_double("distance_decay", cfg.distance_decay);
  if (reader.take("ensemble_seed", raw)) {
    cfg.ensemble_seed =
        static_cast<std::uint64_t>(parse_int_value("ensemble_seed", raw));
  }
  reader.take_int("m_objects", cfg.m_objects);
  if (reader.take("layout", raw)) {
    require(raw == "grid" || raw == "ring", "layout must be grid or ring");
    cfg.layout = raw;
  }
  reader.take_double("spacing", cfg.spacing);
  reader.take_double("collaborator_ring", cfg.collaborator_ring);
  if (reader.take("compute", raw)) {
    require(raw == "high_end" || raw == "embedded",
            "compute must be high_end or embedded");
    cfg.compute = raw;
  }
  reader.take_double("motion.mean_speed", cfg.motion.mean_speed);
  reader.take_double("motion.reversion_rate", cfg.motion.reversion_rate);
  reader.take_double("motion.noise_scale", cfg.motion.noise_scale);
  reader.take_double("motion.heading_rate", cfg.motion.heading_rate);
  reader.take("output_dir", cfg.output_dir);
  reader.take_int("sweep_workers", cfg.sweep_workers);
  reader.take_int64("record_stride", cfg.record_stride);
  reader.finish();

  require(cfg.horizon >= 1, "horizon must be at least 1");
  require(!cfg.seeds.empty(), "seeds must not be empty");
  {
    std::set<std::uint32_t> unique(cfg.seeds.begin(), cfg.seeds.end());
    require(unique.size() == cfg.seeds.size(), "seeds must be distinct");
  }
  require(cfg.n_cavs >= 1, "n_cavs must be at least 1");
  require(cfg.k >= 1 && cfg.k <= cfg.n_cavs, "k must be within [1, n_cavs]");
  require(cfg.d > 0.0, "d must be positive");
  require(cfg.omega >= 0.0 && cfg.omega <= 1.0, "omega must be within [0, 1]");
  require(cfg.alpha > 0.0, "alpha must be positive");
  require(cfg.beta >= 0.0, "beta must be non-negative");
  require(cfg.gamma > 0.0, "gamma must be positive");
  require(!cfg.rho_set.empty() && cfg.rho_set.front() == 1.0,
          "rho_set must start at 1");
  for (std::size_t i = 0; i < cfg.rho_set.size(); ++i) {
    require(kAllowedRhos.count(cfg.rho_set[i]) == 1,
            "rho_set entries must come from {1,2,4,8,16,32,64}");
    require(i == 0 || cfg.rho_set[i] > cfg.rho_set[i - 1],
            "rho_set must be ascending");
  }
  require(cfg.jitter_frac >= 0.0 && cfg.jitter_frac <= 0.5,
          "jitter_frac must be within [0, 0.5]");
  require(!cfg.fixed_deadline || cfg.fixed_deadline_ms > 0.0,
          "fixed deadline must be positive");
  require(cfg.cell_size > 0.0, "cell_size must be positive");
  require(cfg.grid_extent > 0.0, "grid_extent must be positive");
  {
    const double cells = cfg.grid_extent / cfg.cell_size;
    require(std::abs(cells - std::llround(cells)) <= 1e-9,
            "grid_extent must be a whole number of cells");
  }
  require(cfg.base_detection_prob >= 0.0 && cfg.base_detection_prob <= 1.0,
          "base_detection_prob must be within [0, 1]");
  require(cfg.distance_decay >= 0.0, "distance_decay must be non-negative");
  require(cfg.m_objects >= 0, "m_objects must be non-negative");
  require(cfg.spacing > 0.0, "spacing must be positive");
  require(cfg.collaborator_ring > 0.0, "collaborator_ring must be positive");
  require(cfg.motion.mean_speed >= 0.0, "motion.mean_speed must be non-negative");
  require(cfg.motion.reversion_rate >= 0.0,
          "motion.reversion_rate must be non-negative");
  require(cfg.motion.noise_scale >= 0.0, "motion.noise_scale must be non-negative");
  require(cfg.motion.heading_rate >= 0.0,
          "motion.heading_rate must be non-negative");
  require(cfg.sweep_workers >= 1, "sweep_workers must be at least 1");
  require(cfg.record_stride >= 1, "record_stride must be at least 1");
  require(cfg.policy != Policy::kOptimal || cfg.mode == Mode::kSynthetic,
          "the optimal policy needs the synthetic chain mode");
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  return config_from_kv(parse_kv_text(text));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> kv;
  kv["mode"] = mode_name(mode);
  kv["policy"] = policy_name(policy);
  kv["pipeline"] = pipeline_name(pipeline);
  kv["horizon"] = std::to_string(horizon);
  {
    std::vector<std::string> parts;
    for (const auto s : seeds) parts.push_back(std::to_string(s));
    kv["seeds"] = join(parts);
  }
  kv["n_cavs"] = std::to_string(n_cavs);
  kv["k"] = std::to_string(k);
  kv["d"] = format_double(d);
  kv["omega"] = format_double(omega);
  kv["alpha"] = format_double(alpha);
  kv["beta"] = format_double(beta);
  kv["gamma"] = format_double(gamma);
  {
    std::vector<std::string> parts;
    for (const auto r : rho_set) parts.push_back(format_double(r));
    kv["rho_set"] = join(parts);
  }
  kv["profile"] = profile;
  kv["jitter_frac"] = format_double(jitter_frac);
  kv["deadline_mode"] =
      fixed_deadline ? "fixed:" + format_double(fixed_deadline_ms) : "volatility";
  kv["cell_size"] = format_double(cell_size);
  kv["grid_extent"] = format_double(grid_extent);
  kv["base_detection_prob"] = format_double(base_detection_prob);
  kv["distance_decay"] = format_double(distance_decay);
  kv["ensemble_seed"] = std::to_string(ensemble_seed);
  kv["m_objects"] = std::to_string(m_objects);
  kv["layout"] = layout;
  kv["spacing"] = format_double(spacing);
  kv["collaborator_ring"] = format_double(collaborator_ring);
  kv["compute"] = compute;
  kv["motion.mean_speed"] = format_double(motion.mean_speed);
  kv["motion.reversion_rate"] = format_double(motion.reversion_rate);
  kv["motion.noise_scale"] = format_double(motion.noise_scale);
  kv["motion.heading_rate"] = format_double(motion.heading_rate);
  kv["output_dir"] = output_dir;
  kv["sweep_workers"] = std::to_string(sweep_workers);
  kv["record_stride"] = std::to_string(record_stride);
  return kv;
}

std::uint64_t RunConfig::config_hash() const { return hash_lines(to_map(), false); }

std::uint64_t RunConfig::scenario_hash() const { return hash_lines(to_map(), true); }

ThroughputProfile RunConfig::throughput() const {
  ThroughputProfile p = profile == "high" ? high_throughput() : low_throughput();
  p.jitter_frac = jitter_frac;
  return p;
}

ComputeProfile RunConfig::compute_profile() const {
  return compute == "embedded" ? embedded_compute() : high_end_compute();
}

Layout RunConfig::world_layout() const {
  return layout == "ring" ? Layout::kRing : Layout::kGrid;
}

PayloadSpec RunConfig::payload() const { return {}; }

}  // namespace coopbev
