#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopbev/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "coopbev: seeded collaborative-BEV experiments (run, compare, sweep, "
      "validate)"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  auto* run = app.add_subcommand(
      "run", "Run one experiment; writes records.jsonl, metrics.csv, and "
             "summary.json");
  run->add_option("config", run_config, "config file")->required();
  run->add_option("--out", run_out, "output directory (overrides the config)");

  std::string validate_config;
  auto* validate =
      app.add_subcommand("validate", "Parse and range-check a config file");
  validate->add_option("config", validate_config, "config file")->required();

  coopbev::CompareOptions compare_options;
  auto* compare = app.add_subcommand(
      "compare", "Tabulate summaries of runs over one scenario");
  compare->add_option("summaries", compare_options.paths, "summary.json files")
      ->expected(-1);
  compare->add_option("--reference", compare_options.reference,
                      "label of the baseline row (default: first)");
  compare
      ->add_option("--metrics", compare_options.metrics,
                   "comma-separated metric names")
      ->delimiter(',');
  compare->add_option("--out", compare_options.output_path,
                      "also write the table to this file");

  coopbev::SweepOptions sweep_options;
  auto* sweep = app.add_subcommand(
      "sweep", "One run per value of an axis, plus an aggregate table");
  sweep->add_option("config", sweep_options.config_path, "config file")
      ->required();
  sweep
      ->add_option("--axis", sweep_options.axis,
                   "one of D, K, alpha, omega, profile")
      ->required();
  sweep
      ->add_option("--values", sweep_options.values,
                   "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_options.output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed())
    return coopbev::cmd_run(run_config, run_out, std::cout, std::cerr);
  if (validate->parsed())
    return coopbev::cmd_validate(validate_config, std::cout, std::cerr);
  if (compare->parsed())
    return coopbev::cmd_compare(compare_options, std::cout, std::cerr);
  if (sweep->parsed())
    return coopbev::cmd_sweep(sweep_options, std::cout, std::cerr);
  return 2;
}
