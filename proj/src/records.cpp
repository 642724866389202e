#include "coopbev/records.hpp"

#include <filesystem>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "coopbev/text.hpp"

namespace coopbev {
namespace {

using nlohmann::json;

json cav_to_json(const PerCavSlot& cav) {
  return json{{"id", cav.id},
              {"rate_mbps", cav.rate_mbps},
              {"distance_m", cav.distance_m},
              {"rho", cav.rho},
              {"tx_ms", cav.tx_ms},
              {"straggler", cav.straggler},
              {"late", cav.late},
              {"included", cav.included},
              {"observed", cav.observed},
              {"realized", cav.realized},
              {"compensated", cav.compensated}};
}

json latency_to_json(const LatencyBreakdown& latency) {
  return json{{"tx_ms", latency.tx_ms},
              {"extraction_ms", latency.extraction_ms},
              {"head_ms", latency.head_ms},
              {"selection_overhead_ms", latency.selection_overhead_ms},
              {"total_ms", latency.total_ms}};
}

json seed_summary_to_json(const SeedSummary& summary) {
  json curve = json::array();
  for (const auto& [slot, cum] : summary.regret_curve)
    curve.push_back(json::array({slot, cum}));
  return json{{"seed", summary.seed},
              {"final_regret", summary.final_regret},
              {"mean_plan_latency_ms", summary.mean_plan_latency_ms},
              {"mean_total_latency_ms", summary.mean_total_latency_ms},
              {"mean_iou", summary.mean_iou},
              {"mean_deadline_ms", summary.mean_deadline_ms},
              {"mean_v_d", summary.mean_v_d},
              {"straggler_slots", summary.straggler_slots},
              {"late_drops", summary.late_drops},
              {"straggler_hist", summary.straggler_hist},
              {"regret_curve", curve}};
}

SeedSummary seed_summary_from_json(const json& doc) {
  SeedSummary out;
  out.seed = doc.at("seed").get<std::uint32_t>();
  out.final_regret = doc.at("final_regret").get<double>();
  out.mean_plan_latency_ms = doc.at("mean_plan_latency_ms").get<double>();
  out.mean_total_latency_ms = doc.at("mean_total_latency_ms").get<double>();
  out.mean_iou = doc.at("mean_iou").get<double>();
  out.mean_deadline_ms = doc.at("mean_deadline_ms").get<double>();
  out.mean_v_d = doc.at("mean_v_d").get<double>();
  out.straggler_slots = doc.at("straggler_slots").get<std::int64_t>();
  out.late_drops = doc.at("late_drops").get<std::int64_t>();
  out.straggler_hist =
      doc.at("straggler_hist").get<std::vector<std::int64_t>>();
  for (const auto& point : doc.at("regret_curve"))
    out.regret_curve.emplace_back(point.at(0).get<std::int64_t>(),
                                  point.at(1).get<double>());
  return out;
}

json means_to_json(const AggregateSummary& means) {
  return json{{"final_regret", means.final_regret},
              {"mean_plan_latency_ms", means.mean_plan_latency_ms},
              {"mean_total_latency_ms", means.mean_total_latency_ms},
              {"mean_iou", means.mean_iou},
              {"mean_deadline_ms", means.mean_deadline_ms},
              {"mean_v_d", means.mean_v_d},
              {"straggler_slots", means.straggler_slots},
              {"late_drops", means.late_drops}};
}

AggregateSummary means_from_json(const json& doc) {
  AggregateSummary out;
  out.final_regret = doc.at("final_regret").get<double>();
  out.mean_plan_latency_ms = doc.at("mean_plan_latency_ms").get<double>();
  out.mean_total_latency_ms = doc.at("mean_total_latency_ms").get<double>();
  out.mean_iou = doc.at("mean_iou").get<double>();
  out.mean_deadline_ms = doc.at("mean_deadline_ms").get<double>();
  out.mean_v_d = doc.at("mean_v_d").get<double>();
  out.straggler_slots = doc.at("straggler_slots").get<double>();
  out.late_drops = doc.at("late_drops").get<double>();
  return out;
}

}  // namespace

std::string record_json_line(std::uint32_t seed, const SlotRecord& rec) {
  json cavs = json::array();
  for (const auto& cav : rec.cavs) cavs.push_back(cav_to_json(cav));
  const json line{{"schema", kRecordsSchemaId},
                  {"seed", seed},
                  {"slot", rec.slot},
                  {"policy", rec.policy},
                  {"phase", rec.phase},
                  {"action", rec.action},
                  {"deadline_ms", rec.deadline_ms},
                  {"v_d", rec.v_d},
                  {"cavs", cavs},
                  {"plan_latency_ms", rec.plan_latency_ms},
                  {"staleness_steps", rec.staleness_steps},
                  {"iou_proxy", rec.iou_proxy},
                  {"regret_increment", rec.regret_increment},
                  {"cum_regret", rec.cum_regret},
                  {"latency", latency_to_json(rec.latency)}};
  return line.dump();
}

std::string metrics_csv_preamble() {
  return std::string("#schema=") + kMetricsSchemaId +
         "\n"
         "seed,slot,policy,phase,action,deadline_ms,v_d,plan_latency_ms,"
         "staleness_steps,iou_proxy,regret_increment,cum_regret,total_ms,"
         "n_stragglers,n_late,n_included\n";
}

std::string metrics_csv_row(std::uint32_t seed, const SlotRecord& rec) {
  int stragglers = 0, late = 0, included = 0;
  for (const auto& cav : rec.cavs) {
    if (cav.straggler) ++stragglers;
    if (cav.late) ++late;
    if (cav.included) ++included;
  }
  std::string action;
  for (std::size_t i = 0; i < rec.action.size(); ++i) {
    if (i) action += ';';
    action += std::to_string(rec.action[i]);
  }
  std::ostringstream row;
  row << seed << ',' << rec.slot << ',' << rec.policy << ',' << rec.phase
      << ',' << action << ',' << format_double(rec.deadline_ms) << ','
      << format_double(rec.v_d) << ',' << format_double(rec.plan_latency_ms)
      << ',' << rec.staleness_steps << ',' << format_double(rec.iou_proxy)
      << ',' << format_double(rec.regret_increment) << ','
      << format_double(rec.cum_regret) << ','
      << format_double(rec.latency.total_ms) << ',' << stragglers << ','
      << late << ',' << included << '\n';
  return row.str();
}

std::string summary_document(const ExperimentResult& result) {
  json per_seed = json::array();
  for (const auto& summary : result.per_seed)
    per_seed.push_back(seed_summary_to_json(summary));
  const json doc{{"schema", kSummarySchemaId},
                 {"config", result.config.to_map()},
                 {"config_hash", hex64(result.config.config_hash())},
                 {"scenario_hash", hex64(result.config.scenario_hash())},
                 {"means", means_to_json(result.means)},
                 {"per_seed", per_seed}};
  return doc.dump(2) + "\n";
}

RecordWriter::RecordWriter(std::string dir, const RunConfig& config)
    : dir_(std::move(dir)),
      stride_(config.record_stride),
      horizon_(config.horizon) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir_ + ": " +
                  ec.message());
  const auto records_path = dir_ + "/records.jsonl";
  records_.open(records_path);
  if (!records_) throw IoError("cannot write " + records_path);
  const auto csv_path = dir_ + "/metrics.csv";
  csv_.open(csv_path);
  if (!csv_) throw IoError("cannot write " + csv_path);
  csv_ << metrics_csv_preamble();
}

void RecordWriter::write(std::uint32_t seed, const SlotRecord& rec) {
  if (rec.slot % stride_ != 0 && rec.slot != horizon_) return;
  records_ << record_json_line(seed, rec) << '\n';
  csv_ << metrics_csv_row(seed, rec);
}

void RecordWriter::finish(const ExperimentResult& result) {
  records_.close();
  csv_.close();
  if (records_.fail() || csv_.fail())
    throw IoError("failed flushing record artifacts under " + dir_);
  const auto summary_path = dir_ + "/summary.json";
  std::ofstream summary(summary_path);
  if (!summary) throw IoError("cannot write " + summary_path);
  summary << summary_document(result);
  summary.close();
  if (summary.fail()) throw IoError("failed flushing " + summary_path);
}

RecordSink RecordWriter::sink() {
  return [this](std::uint32_t seed, const SlotRecord& rec) {
    write(seed, rec);
  };
}

StoredResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read summary file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("malformed summary document " + path + ": " + e.what());
  }
  try {
    StoredResult out;
    out.schema = doc.at("schema").get<std::string>();
    if (out.schema != kSummarySchemaId)
      throw IoError("unsupported summary schema in " + path + ": " +
                    out.schema);
    out.config =
        doc.at("config").get<std::map<std::string, std::string>>();
    out.config_hash = doc.at("config_hash").get<std::string>();
    out.scenario_hash = doc.at("scenario_hash").get<std::string>();
    out.policy = out.config.at("policy");
    out.pipeline = out.config.at("pipeline");
    out.means = means_from_json(doc.at("means"));
    for (const auto& seed_doc : doc.at("per_seed"))
      out.per_seed.push_back(seed_summary_from_json(seed_doc));
    return out;
  } catch (const json::exception& e) {
    throw IoError("summary document " + path +
                  " is missing required fields: " + e.what());
  } catch (const std::out_of_range& e) {
    throw IoError("summary document " + path +
                  " is missing required fields: " + e.what());
  }
}

}  // namespace coopbev
