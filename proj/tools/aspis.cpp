// aspis: command-line front end.
//
//   aspis tables        [--config FILE | --K K --r R [--q Q | --q-min A --q-max B]]
//   aspis verify-cmax   [--K MAXK] [--min-K K] [--r R]
//   aspis measure       --K K --r R --q Q [--attack weak|optimal] [--aggregator NAME] [--seed S]
//   aspis train         --config FILE [--out DIR] [--seed S]
//   aspis clique-bench  [--K K] [--r R] [--q Q]... [--attack weak|optimal|both] [--trials N]
//
// Exit codes: 0 success, 1 verification mismatch, 2 usage or config error.
// Log verbosity comes from ASPIS_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "aspis/commands.hpp"

namespace {

struct Common {
  std::string format = "csv";
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
}

// Runs fn with the requested output stream.
template <class Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) return fn(std::cout);
  std::ofstream file(path);
  if (!file) {
    spdlog::error("cannot open output file '{}'", path);
    return aspis::kUsage;
  }
  return fn(file);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("aspis");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("ASPIS_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Redundant-assignment Byzantine SGD simulator"};
  app.require_subcommand(1);

  // tables
  Common tables_io;
  std::string tables_config;
  std::optional<int> tables_K, tables_r, tables_q, tables_qmin, tables_qmax;
  auto* tables = app.add_subcommand("tables", "Distortion fractions from the closed forms");
  add_common(tables, tables_io);
  tables->add_option("--config", tables_config, "JSON file with a \"configs\" list");
  tables->add_option("--K", tables_K, "Cluster size");
  tables->add_option("--r", tables_r, "Redundancy");
  tables->add_option("--q", tables_q, "Single adversary count");
  tables->add_option("--q-min", tables_qmin, "Smallest q");
  tables->add_option("--q-max", tables_qmax, "Largest q");

  // verify-cmax
  Common verify_io;
  aspis::VerifyOptions verify_opt;
  auto* verify = app.add_subcommand("verify-cmax", "Brute-force oracle against the optimal-attack count");
  add_common(verify, verify_io);
  verify->add_option("--K", verify_opt.max_K, "Largest cluster size")->capture_default_str();
  verify->add_option("--min-K", verify_opt.min_K, "Smallest cluster size (default r)");
  verify->add_option("--r", verify_opt.r, "Redundancy")->capture_default_str();
  verify->add_option("--max-work", verify_opt.max_work, "Refuse instances above this many checks")
      ->capture_default_str();

  // measure
  Common measure_io;
  aspis::MeasureOptions measure_opt;
  std::string measure_attack = "optimal", measure_agg = "aspis", graph_out;
  auto* measure = app.add_subcommand("measure", "Corrupted count over one simulated iteration");
  add_common(measure, measure_io);
  measure->add_option("--K", measure_opt.params.K, "Cluster size")->capture_default_str();
  measure->add_option("--r", measure_opt.params.r, "Redundancy")->capture_default_str();
  measure->add_option("--q", measure_opt.params.q, "Adversaries")->capture_default_str();
  measure->add_option("--attack", measure_attack, "weak or optimal")->check(CLI::IsMember({"weak", "optimal"}));
  measure->add_option("--aggregator", measure_agg, "aspis, baseline-median, median-of-means, multi-krum, bulyan, detox-mom");
  measure->add_option("--seed", measure_opt.seed, "Gradient seed")->capture_default_str();
  measure->add_option("--dim", measure_opt.dim, "Gradient dimension")->capture_default_str();
  measure->add_option("--graph-out", graph_out, "Write the agreement graph as JSON");

  // train
  aspis::TrainOptions train_opt;
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Simulated training run from a JSON config");
  train->add_option("--config", train_opt.config_path, "Training config")->required();
  train->add_option("--out", train_opt.out_dir, "Output directory")->capture_default_str();
  train->add_option("--seed", train_seed, "Override the config seed");

  // clique-bench
  Common bench_io;
  aspis::BenchOptions bench_opt;
  std::vector<int> bench_qs;
  std::string bench_attack = "both";
  auto* bench = app.add_subcommand("clique-bench", "Time maximum-clique enumeration");
  add_common(bench, bench_io);
  bench->add_option("--K", bench_opt.base.K, "Cluster size")->capture_default_str();
  bench->add_option("--r", bench_opt.base.r, "Redundancy")->capture_default_str();
  bench->add_option("--q", bench_qs, "Adversary counts (repeatable; default 5 15 25 35 45)");
  bench->add_option("--attack", bench_attack, "weak, optimal or both")
      ->check(CLI::IsMember({"weak", "optimal", "both"}));
  bench->add_option("--trials", bench_opt.trials, "Timed runs per row")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return aspis::kUsage;
  }

  try {
    if (*tables) {
      std::vector<aspis::TableConfig> configs;
      if (!tables_config.empty()) {
        configs = aspis::table_configs_from_json(aspis::read_json_file(tables_config));
      } else if (tables_K || tables_r) {
        if (!tables_K || !tables_r) throw aspis::ConfigError("tables: --K and --r go together");
        aspis::TableConfig c{*tables_K, *tables_r, 2, -1};
        if (tables_q) c.q_min = c.q_max = *tables_q;
        if (tables_qmin) c.q_min = *tables_qmin;
        if (tables_qmax) c.q_max = *tables_qmax;
        configs.push_back(c);
      } else {
        configs = aspis::default_table_configs();
      }
      spdlog::debug("tables: {} configuration(s)", configs.size());
      const auto fmt = aspis::parse_format(tables_io.format);
      return with_output(tables_io.out, [&](std::ostream& os) { return aspis::cmd_tables(configs, fmt, os, std::cerr); });
    }
    if (*verify) {
      const auto fmt = aspis::parse_format(verify_io.format);
      return with_output(verify_io.out,
                         [&](std::ostream& os) { return aspis::cmd_verify_cmax(verify_opt, fmt, os, std::cerr); });
    }
    if (*measure) {
      measure_opt.mode = aspis::parse_attack_mode(measure_attack);
      measure_opt.aggregator = aspis::parse_aggregator(measure_agg);
      if (!graph_out.empty()) measure_opt.graph_out = graph_out;
      const auto fmt = aspis::parse_format(measure_io.format);
      return with_output(measure_io.out,
                         [&](std::ostream& os) { return aspis::cmd_measure(measure_opt, fmt, os, std::cerr); });
    }
    if (*train) {
      train_opt.seed = train_seed;
      spdlog::info("train: config {}, output {}", train_opt.config_path, train_opt.out_dir);
      return aspis::cmd_train(train_opt, std::cout, std::cerr);
    }
    if (*bench) {
      if (!bench_qs.empty()) bench_opt.qs = bench_qs;
      if (bench_attack != "both") bench_opt.modes = {aspis::parse_attack_mode(bench_attack)};
      const auto fmt = aspis::parse_format(bench_io.format);
      return with_output(bench_io.out,
                         [&](std::ostream& os) { return aspis::cmd_clique_bench(bench_opt, fmt, os, std::cerr); });
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return aspis::kUsage;
  }
  return aspis::kUsage;
}
