#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "coopbev/config.hpp"
#include "coopbev/sim.hpp"

namespace coopbev {

inline constexpr char kRecordsSchemaId[] = "coopbev-records-v1";
inline constexpr char kSummarySchemaId[] = "coopbev-summary-v1";
inline constexpr char kMetricsSchemaId[] = "coopbev-metrics-v1";

// One slot as a single self-describing JSON line (no trailing newline).
std::string record_json_line(std::uint32_t seed, const SlotRecord& rec);

// Flat per-slot metrics table. The first line carries the schema id, the
// second the column names.
std::string metrics_csv_preamble();
std::string metrics_csv_row(std::uint32_t seed, const SlotRecord& rec);

// The complete summary document, pretty-printed with a trailing newline.
std::string summary_document(const ExperimentResult& result);

// Streams one experiment's artifacts into a directory: records.jsonl and
// metrics.csv as slots arrive, summary.json on finish(). Slots are thinned
// by config.record_stride, keeping each seed's final slot; the summary always
// integrates every slot regardless. Throws IoError when the directory or a
// file cannot be written.
class RecordWriter {
 public:
  RecordWriter(std::string dir, const RunConfig& config);

  void write(std::uint32_t seed, const SlotRecord& rec);
  void finish(const ExperimentResult& result);
  RecordSink sink();

 private:
  std::string dir_;
  std::int64_t stride_ = 1;
  std::int64_t horizon_ = 0;
  std::ofstream records_;
  std::ofstream csv_;
};

// summary.json parsed back for comparisons.
struct StoredResult {
  std::string schema;
  std::map<std::string, std::string> config;
  std::string config_hash;
  std::string scenario_hash;
  std::string policy;
  std::string pipeline;
  std::vector<SeedSummary> per_seed;
  AggregateSummary means;
};

// Throws IoError on unreadable files, malformed documents, or a schema id
// other than the one this build writes.
StoredResult load_result(const std::string& path);

}  // namespace coopbev
