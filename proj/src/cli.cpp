#include "coopbev/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "coopbev/config.hpp"
#include "coopbev/records.hpp"
#include "coopbev/sim.hpp"
#include "coopbev/text.hpp"

namespace coopbev {
namespace {

constexpr char kCompareSchemaId[] = "coopbev-compare-v1";
constexpr char kSweepSchemaId[] = "coopbev-sweep-v1";

const std::vector<std::string> kDefaultCompareMetrics = {
    "final_regret", "mean_plan_latency_ms", "mean_iou", "straggler_slots",
    "late_drops"};

std::string run_output_dir(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return default_output_root() + "/run-" + hex64(cfg.config_hash());
}

double metric_value(const AggregateSummary& means, const std::string& name) {
  if (name == "final_regret") return means.final_regret;
  if (name == "mean_plan_latency_ms") return means.mean_plan_latency_ms;
  if (name == "mean_total_latency_ms") return means.mean_total_latency_ms;
  if (name == "mean_iou") return means.mean_iou;
  if (name == "mean_deadline_ms") return means.mean_deadline_ms;
  if (name == "mean_v_d") return means.mean_v_d;
  if (name == "straggler_slots") return means.straggler_slots;
  if (name == "late_drops") return means.late_drops;
  throw ConfigError("unknown comparison metric: " + name);
}

// Results are labeled by what produced them; the pipeline only matters
// end-to-end.
std::string result_label(const StoredResult& result) {
  const auto mode = result.config.find("mode");
  if (mode != result.config.end() && mode->second == "e2e")
    return result.policy + "/" + result.pipeline;
  return result.policy;
}

struct SweepRow {
  std::string value;
  std::string dir;
  std::int64_t init_slots = 0;
  std::int64_t explore_slots = 0;
  std::int64_t exploit_slots = 0;
  AggregateSummary means;
};

}  // namespace

std::string default_output_root() {
  const char* root = std::getenv("COOPBEV_OUT");
  if (root != nullptr && *root != '\0') return root;
  return "results";
}

int cmd_run(const std::string& config_path, const std::string& output_override,
            std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    const std::string dir = run_output_dir(cfg);

    RecordWriter writer(dir, cfg);
    const ExperimentResult result = run_experiment(cfg, writer.sink());
    writer.finish(result);

    out << dir << "/summary.json\n";
    out << policy_name(cfg.policy) << " " << mode_name(cfg.mode)
        << " seeds=" << cfg.seeds.size() << " T=" << cfg.horizon
        << " | final regret " << format_double(result.means.final_regret)
        << " | mean IoU " << format_double(result.means.mean_iou)
        << " | mean plan latency "
        << format_double(result.means.mean_plan_latency_ms) << " ms\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 4;
  }
}

int cmd_validate(const std::string& config_path, std::ostream& out,
                 std::ostream& err) {
  try {
    const RunConfig cfg = load_config(config_path);
    out << "ok: " << config_path << " (config " << hex64(cfg.config_hash())
        << ", scenario " << hex64(cfg.scenario_hash()) << ")\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 4;
  }
}

int cmd_compare(const CompareOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    if (options.paths.size() < 2) {
      err << "compare error: need at least two summary files\n";
      return 2;
    }
    const auto metrics =
        options.metrics.empty() ? kDefaultCompareMetrics : options.metrics;
    AggregateSummary probe;
    for (const auto& name : metrics) metric_value(probe, name);

    std::vector<StoredResult> results;
    for (const auto& path : options.paths)
      results.push_back(load_result(path));

    for (std::size_t i = 1; i < results.size(); ++i) {
      if (results[i].scenario_hash != results[0].scenario_hash) {
        err << "compare error: scenario hash mismatch: " << options.paths[0]
            << " has " << results[0].scenario_hash << " but "
            << options.paths[i] << " has " << results[i].scenario_hash
            << "\n";
        return 5;
      }
    }

    std::size_t reference = 0;
    if (!options.reference.empty()) {
      bool found = false;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (result_label(results[i]) == options.reference) {
          reference = i;
          found = true;
          break;
        }
      }
      if (!found) {
        err << "compare error: no result labeled " << options.reference
            << "\n";
        return 2;
      }
    }

    std::ostringstream csv;
    csv << "#schema=" << kCompareSchemaId << "\n";
    csv << "#scenario=" << results[0].scenario_hash << "\n";
    csv << "#reference=" << result_label(results[reference]) << "\n";
    csv << "label,path";
    for (const auto& name : metrics) csv << ',' << name << ",d_" << name;
    csv << '\n';
    for (std::size_t i = 0; i < results.size(); ++i) {
      csv << result_label(results[i]) << ',' << options.paths[i];
      for (const auto& name : metrics) {
        const double value = metric_value(results[i].means, name);
        const double delta =
            value - metric_value(results[reference].means, name);
        csv << ',' << format_double(value) << ',' << format_double(delta);
      }
      csv << '\n';
    }

    out << csv.str();
    if (!options.output_path.empty()) {
      std::ofstream file(options.output_path);
      if (!file) throw IoError("cannot write " + options.output_path);
      file << csv.str();
      file.close();
      if (file.fail()) throw IoError("failed flushing " + options.output_path);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "compare error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 4;
  }
}

int cmd_sweep(const SweepOptions& options, std::ostream& out,
              std::ostream& err) {
  try {
    static const std::map<std::string, std::string> kAxisKeys = {
        {"D", "d"},
        {"K", "k"},
        {"alpha", "alpha"},
        {"omega", "omega"},
        {"profile", "profile"}};
    const auto axis = kAxisKeys.find(options.axis);
    if (axis == kAxisKeys.end()) {
      err << "config error: sweep axis must be one of D, K, alpha, omega, "
             "profile; got "
          << options.axis << "\n";
      return 2;
    }
    if (options.values.empty()) {
      err << "config error: sweep needs at least one value\n";
      return 2;
    }

    std::ifstream in(options.config_path);
    if (!in) throw IoError("cannot read config file: " + options.config_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto base_kv = parse_kv_text(buffer.str());
    const RunConfig base_cfg = config_from_kv(base_kv);

    // Validate every point before any run starts.
    std::vector<RunConfig> configs;
    for (const auto& value : options.values) {
      auto kv = base_kv;
      kv[axis->second] = value;
      configs.push_back(config_from_kv(kv));
    }

    const std::string root = options.output_dir.empty()
                                 ? default_output_root() + "/sweep-" +
                                       axis->first + "-" +
                                       hex64(base_cfg.config_hash())
                                 : options.output_dir;

    std::vector<SweepRow> rows(configs.size());
    std::vector<std::exception_ptr> failures(configs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
      for (std::size_t i = next.fetch_add(1); i < configs.size();
           i = next.fetch_add(1)) {
        try {
          SweepRow& row = rows[i];
          row.value = options.values[i];
          row.dir = root + "/" + axis->first + "-" + options.values[i];
          RecordWriter writer(row.dir, configs[i]);
          const RecordSink sink = [&](std::uint32_t seed,
                                      const SlotRecord& rec) {
            writer.write(seed, rec);
            if (rec.phase == "init") ++row.init_slots;
            else if (rec.phase == "explore") ++row.explore_slots;
            else if (rec.phase == "exploit") ++row.exploit_slots;
          };
          const ExperimentResult result = run_experiment(configs[i], sink);
          writer.finish(result);
          row.means = result.means;
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    const std::size_t n_workers = std::min<std::size_t>(
        std::max(1, base_cfg.sweep_workers), configs.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);

    std::ostringstream csv;
    csv << "#schema=" << kSweepSchemaId << "\n";
    csv << "axis,value,dir,init_slots,explore_slots,exploit_slots,"
           "final_regret,mean_plan_latency_ms,mean_total_latency_ms,"
           "mean_iou,mean_deadline_ms,mean_v_d,straggler_slots,late_drops\n";
    for (const auto& row : rows) {
      csv << axis->first << ',' << row.value << ',' << row.dir << ','
          << row.init_slots << ',' << row.explore_slots << ','
          << row.exploit_slots << ',' << format_double(row.means.final_regret)
          << ',' << format_double(row.means.mean_plan_latency_ms) << ','
          << format_double(row.means.mean_total_latency_ms) << ','
          << format_double(row.means.mean_iou) << ','
          << format_double(row.means.mean_deadline_ms) << ','
          << format_double(row.means.mean_v_d) << ','
          << format_double(row.means.straggler_slots) << ','
          << format_double(row.means.late_drops) << '\n';
    }

    const std::string table_path = root + "/sweep.csv";
    std::ofstream table(table_path);
    if (!table) throw IoError("cannot write " + table_path);
    table << csv.str();
    table.close();
    if (table.fail()) throw IoError("failed flushing " + table_path);

    out << table_path << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace coopbev
