#pragma once

// Experiment commands behind the `aspis` tool. Each writes its primary output
// to `out`, diagnostics to `err`, and returns the process exit code:
//   0 success, 1 verification mismatch, 2 usage or configuration error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aspis/aggregation.hpp"
#include "aspis/analysis.hpp"
#include "aspis/attacks.hpp"
#include "aspis/detection.hpp"
#include "aspis/training.hpp"

namespace aspis {

enum ExitCode : int { kOk = 0, kMismatch = 1, kUsage = 2 };

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + s + "' (expected csv or json)");
}

/// Usage or configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

// tables ----------------------------------------------------------------------

struct TableConfig {
  int K = 0;
  int r = 0;
  int q_min = 2;
  int q_max = -1;  ///< -1: floor((K - 1) / 2)
};

inline std::vector<TableConfig> default_table_configs() { return {{15, 3, 2, -1}, {21, 3, 2, -1}, {24, 3, 2, -1}}; }

/// Accepts {"configs": [{"K":15, "r":3, "q_min":2, "q_max":7}, ...]}.
inline std::vector<TableConfig> table_configs_from_json(const nlohmann::json& j) {
  std::vector<TableConfig> out;
  for (const auto& c : j.at("configs")) {
    TableConfig t;
    t.K = c.at("K").get<int>();
    t.r = c.at("r").get<int>();
    t.q_min = c.value("q_min", 2);
    t.q_max = c.value("q_max", -1);
    out.push_back(t);
  }
  return out;
}

inline std::vector<EpsilonRecord> table_rows(const std::vector<TableConfig>& configs) {
  std::vector<EpsilonRecord> rows;
  for (const auto& c : configs) {
    const int q_max = c.q_max < 0 ? (c.K - 1) / 2 : c.q_max;
    ClusterParams{c.K, c.r, q_max}.validate();
    if (c.q_min < 0 || c.q_min > q_max)
      throw std::invalid_argument("q range " + std::to_string(c.q_min) + ".." + std::to_string(q_max) +
                                  " is empty for K=" + std::to_string(c.K));
    auto part = epsilon_rows(c.K, c.r, c.q_min, q_max);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

inline void write_records(std::ostream& out, const std::vector<EpsilonRecord>& rows, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    write_epsilon_csv_header(out);
    for (const auto& e : rows) write_epsilon_csv_row(out, e);
    return;
  }
  auto arr = nlohmann::json::array();
  for (const auto& e : rows)
    arr.push_back({{"K", e.K},
                   {"r", e.r},
                   {"q", e.q},
                   {"scheme", to_string(e.scheme)},
                   {"mode", e.mode_name()},
                   {"corrupted", e.corrupted},
                   {"total", e.total},
                   {"epsilon", e.rounded()}});
  out << arr.dump(2) << '\n';
}

inline int cmd_tables(const std::vector<TableConfig>& configs, OutputFormat fmt, std::ostream& out, std::ostream& err) {
  std::vector<EpsilonRecord> rows;
  try {
    rows = table_rows(configs);
  } catch (const std::exception& e) {
    err << "tables: " << e.what() << '\n';
    return kUsage;
  }
  write_records(out, rows, fmt);
  return kOk;
}

// verify-cmax -----------------------------------------------------------------

struct VerifyOptions {
  int min_K = 0;  ///< 0: start at r
  int max_K = 9;
  int r = 3;
  double max_work = 2e9;
};

inline int cmd_verify_cmax(const VerifyOptions& opt, OutputFormat fmt, std::ostream& out, std::ostream& err) {
  if (opt.r < 3 || opt.r % 2 == 0) {
    err << "verify-cmax: r must be odd and at least 3\n";
    return kUsage;
  }
  int status = kOk;
  auto arr = nlohmann::json::array();
  if (fmt == OutputFormat::Csv) out << "K,r,q,oracle,formula,status\n";
  for (int K = std::max(opt.min_K, opt.r); K <= opt.max_K; ++K) {
    for (int q = 1; 2 * q < K; ++q) {
      const std::uint64_t formula = epsilon_aspis_optimal(K, opt.r, q).corrupted;
      std::string oracle_text;
      std::string verdict;
      try {
        const std::uint64_t oracle = brute_force_cmax(K, opt.r, q, opt.max_work);
        oracle_text = std::to_string(oracle);
        verdict = oracle == formula ? "match" : "mismatch";
        if (oracle != formula) status = kMismatch;
      } catch (const InstanceTooLarge& e) {
        err << "verify-cmax: " << e.what() << '\n';
        oracle_text = "";
        verdict = "refused";
        if (status == kOk) status = kUsage;
      }
      if (fmt == OutputFormat::Csv)
        out << K << ',' << opt.r << ',' << q << ',' << oracle_text << ',' << formula << ',' << verdict << '\n';
      else
        arr.push_back({{"K", K}, {"r", opt.r}, {"q", q}, {"oracle", oracle_text}, {"formula", formula}, {"status", verdict}});
    }
  }
  if (fmt == OutputFormat::Json) out << arr.dump(2) << '\n';
  return status;
}

// measure ---------------------------------------------------------------------

struct MeasureOptions {
  ClusterParams params{15, 3, 4};
  Aggregator aggregator = Aggregator::Aspis;
  AttackMode mode = AttackMode::Optimal;
  std::uint64_t seed = 1;
  std::size_t dim = 4;
  std::optional<std::string> graph_out;  ///< agreement graph as JSON (Aspis only)
};

/// Closed-form corrupted count for the default plan of an aggregator.
inline EpsilonRecord expected_epsilon(Aggregator agg, const ClusterParams& p, AttackMode mode) {
  switch (scheme_of(agg)) {
    case Scheme::Aspis:
      return mode == AttackMode::Optimal ? epsilon_aspis_optimal(p.K, p.r, p.q) : epsilon_aspis_weak(p.K, p.r, p.q);
    case Scheme::Detox: return epsilon_detox(p.K, p.r, p.q, mode);
    case Scheme::Baseline: return epsilon_baseline(p.K, p.q);
  }
  throw std::logic_error("unreachable");
}

/// One simulated iteration under the scheme's default plan; exit 1 when the
/// measured count differs from the closed form.
inline int cmd_measure(const MeasureOptions& opt, OutputFormat fmt, std::ostream& out, std::ostream& err) {
  Measurement m;
  EpsilonRecord expected;
  try {
    opt.params.validate();
    const AttackPlan plan = default_plan(opt.aggregator, opt.params, opt.mode);
    m = run_measurement(opt.params, plan, opt.aggregator, opt.seed, opt.dim);
    expected = expected_epsilon(opt.aggregator, opt.params, opt.mode);
  } catch (const std::exception& e) {
    err << "measure: " << e.what() << '\n';
    return kUsage;
  }
  if (opt.graph_out) {
    if (!m.graph) {
      err << "measure: --graph-out needs the aspis aggregator\n";
      return kUsage;
    }
    std::ofstream g(*opt.graph_out);
    if (!g) {
      err << "measure: cannot write '" << *opt.graph_out << "'\n";
      return kUsage;
    }
    nlohmann::json j = *m.graph;
    g << j.dump() << '\n';
  }
  const auto& e = m.record;
  const std::string outcome = m.outcome ? outcome_tag(*m.outcome) : "none";
  const bool match = e.corrupted == expected.corrupted && e.total == expected.total;
  if (fmt == OutputFormat::Csv) {
    out << "K,r,q,aggregator,mode,outcome,corrupted,files,epsilon,expected,status\n";
    out << opt.params.K << ',' << opt.params.r << ',' << opt.params.q << ',' << to_string(opt.aggregator) << ','
        << to_string(opt.mode) << ',' << outcome << ',' << e.corrupted << ',' << e.total << ',' << e.rounded() << ','
        << expected.corrupted << ',' << (match ? "match" : "mismatch") << '\n';
  } else {
    nlohmann::json j{{"K", opt.params.K},         {"r", opt.params.r},
                     {"q", opt.params.q},         {"aggregator", to_string(opt.aggregator)},
                     {"mode", to_string(opt.mode)}, {"outcome", outcome},
                     {"corrupted", e.corrupted},  {"files", e.total},
                     {"epsilon", e.rounded()},    {"expected", expected.corrupted},
                     {"status", match ? "match" : "mismatch"}};
    if (m.outcome)
      if (const auto* amb = std::get_if<Ambiguous>(&*m.outcome)) j["maximum_cliques"] = amb->maximum_cliques;
    out << j.dump(2) << '\n';
  }
  return match ? kOk : kMismatch;
}

// train -----------------------------------------------------------------------

struct TrainOptions {
  std::string config_path;
  std::string out_dir = "train_out";
  std::optional<std::uint64_t> seed;  ///< overrides the config's seed
};

/// Runs the configured training and writes <out>/history.jsonl and
/// <out>/summary.csv; the summary is echoed to `out`.
inline int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  TrainingConfig cfg;
  try {
    cfg = read_json_file(opt.config_path).get<TrainingConfig>();
    if (opt.seed) cfg.seed = *opt.seed;
    cfg.validate();
  } catch (const std::exception& e) {
    err << "train: invalid configuration: " << e.what() << '\n';
    return kUsage;
  }
  TrainingHistory h;
  try {
    h = run_training(cfg);
  } catch (const std::exception& e) {
    err << "train: run aborted: " << e.what() << '\n';
    return kMismatch;
  }
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  std::ofstream hist(std::filesystem::path(opt.out_dir) / "history.jsonl");
  std::ofstream sum(std::filesystem::path(opt.out_dir) / "summary.csv");
  if (!hist || !sum) {
    err << "train: cannot write to '" << opt.out_dir << "'\n";
    return kUsage;
  }
  write_history_jsonl(hist, h);
  write_summary_csv(sum, cfg, h);
  write_summary_csv(out, cfg, h);
  return kOk;
}

// clique-bench ----------------------------------------------------------------

struct BenchOptions {
  ClusterParams base{100, 5, 0};
  std::vector<int> qs{5, 15, 25, 35, 45};
  std::vector<AttackMode> modes{AttackMode::Weak, AttackMode::Optimal};
  int trials = 5;
};

struct BenchRow {
  int K = 0, r = 0, q = 0;
  AttackMode mode = AttackMode::Weak;
  int trials = 0;
  std::size_t cliques = 0;
  std::size_t clique_size = 0;
  double min_ms = 0, median_ms = 0, max_ms = 0;
};

/// Times enumerate_maximum_cliques on the agreement graph the default Aspis
/// plan induces. The graph is derived structurally, so K = 100 needs no
/// per-file reports.
inline BenchRow bench_cliques(const ClusterParams& p, AttackMode mode, int trials) {
  p.validate();
  BenchRow row{p.K, p.r, p.q, mode, trials};
  if (trials <= 0) return row;
  const AttackPlan plan = default_plan(Aggregator::Aspis, p, mode);
  const AgreementGraph g = structural_agreement_graph(p, plan);
  std::vector<double> ms;
  for (int t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const auto cliques = enumerate_maximum_cliques(g, p.q);
    const auto stop = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    row.cliques = cliques.size();
    row.clique_size = cliques.empty() ? 0 : cliques.front().size();
  }
  std::sort(ms.begin(), ms.end());
  row.min_ms = ms.front();
  row.max_ms = ms.back();
  row.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
  return row;
}

inline int cmd_clique_bench(const BenchOptions& opt, OutputFormat fmt, std::ostream& out, std::ostream& err) {
  std::vector<BenchRow> rows;
  if (opt.trials > 0) {
    try {
      for (int q : opt.qs)
        for (AttackMode m : opt.modes) rows.push_back(bench_cliques({opt.base.K, opt.base.r, q}, m, opt.trials));
    } catch (const std::exception& e) {
      err << "clique-bench: " << e.what() << '\n';
      return kUsage;
    }
  } else if (opt.trials < 0) {
    err << "clique-bench: trials must be non-negative\n";
    return kUsage;
  }
  if (fmt == OutputFormat::Csv) {
    out << "K,r,q,attack,trials,cliques,clique_size,min_ms,median_ms,max_ms\n";
    for (const auto& b : rows) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.3f", b.min_ms, b.median_ms, b.max_ms);
      out << b.K << ',' << b.r << ',' << b.q << ',' << to_string(b.mode) << ',' << b.trials << ',' << b.cliques
          << ',' << b.clique_size << ',' << buf << '\n';
    }
  } else {
    auto arr = nlohmann::json::array();
    for (const auto& b : rows)
      arr.push_back({{"K", b.K},
                     {"r", b.r},
                     {"q", b.q},
                     {"attack", to_string(b.mode)},
                     {"trials", b.trials},
                     {"cliques", b.cliques},
                     {"clique_size", b.clique_size},
                     {"min_ms", b.min_ms},
                     {"median_ms", b.median_ms},
                     {"max_ms", b.max_ms}});
    out << arr.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace aspis
