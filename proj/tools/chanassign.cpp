// Command line front end: solve a single instance, run a seeded experiment,
// or evaluate the analytic bound report.
//
// Exit codes: 0 success, 2 assertion failure, 3 config/input error.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chanassign/auction.hpp"
#include "chanassign/bounds.hpp"
#include "chanassign/csma.hpp"
#include "chanassign/experiments.hpp"
#include "chanassign/io.hpp"
#include "chanassign/matrix.hpp"
#include "chanassign/oracles.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 2;
constexpr int kExitConfig = 3;

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw chanassign::ConfigError("cannot open output file " + path);
  out << j.dump(2) << '\n';
}

int run_solve(const std::string& input, const std::string& mode, double eps,
              double alpha, std::uint64_t seed, const std::string& out_path,
              const std::string& trace_csv, const std::string& slot_csv,
              const std::string& backoff_form, double t_max_ms,
              int quantization_q) {
  using namespace chanassign;
  const RewardMatrix original = RewardMatrix::load_csv(input);
  const RewardMatrix r = pad_zero_columns(original);

  AuctionConfig cfg;
  cfg.eps = eps;
  cfg.tie_break_seed = seed;
  if (quantization_q > 0) cfg.quantization_q = quantization_q;

  Assignment assignment;
  AuctionTrace trace;
  nlohmann::json result;
  double used_eps = eps;

  if (mode == "central") {
    auto res = centralized_auction(r, cfg);
    assignment = unpad_assignment(res.assignment, original);
    trace = std::move(res.trace);
    used_eps = res.eps;
  } else if (mode == "distributed") {
    auto res = distributed_auction(r, cfg);
    assignment = unpad_assignment(res.assignment, original);
    trace = std::move(res.trace);
    used_eps = res.eps;
  } else if (mode == "csma") {
    auto res = run_csma_auction(r, cfg, BackoffFunction::parse(backoff_form, t_max_ms));
    assignment = unpad_assignment(res.assignment, original);
    trace = std::move(res.trace);
    used_eps = res.eps;
    if (!slot_csv.empty()) {
      std::ofstream out(slot_csv);
      slots_to_csv(res.slots, out);
    }
  } else if (mode == "truncated") {
    auto res = truncated_auction(r, alpha, cfg);
    assignment = unpad_assignment(res.inner.assignment, original);
    trace = std::move(res.inner.trace);
    used_eps = res.inner.eps;
    result["truncated_value"] = res.truncated_value;
  } else if (mode == "greedy") {
    assignment = randomized_greedy(original, seed);
    used_eps = 0;
  } else {
    throw ConfigError("unknown mode: " + mode);
  }

  nlohmann::json j = solver_result_json(mode, assignment, trace, used_eps);
  for (auto& [k, v] : result.items()) j[k] = v;
  j["seed"] = seed;
  write_json(j, out_path);

  if (!trace_csv.empty()) {
    std::ofstream out(trace_csv);
    trace_to_csv(trace, out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed channel assignment toolkit"};
  app.require_subcommand(1);

  // solve
  std::string input, mode = "distributed", out_path, trace_csv, slot_csv;
  std::string backoff_form = "reciprocal";
  double eps = 0, alpha = 2.0, t_max_ms = 10.0;
  std::uint64_t seed = 1;
  int quantization_q = 0;
  auto* solve = app.add_subcommand("solve", "Solve one instance from a CSV reward matrix");
  solve->add_option("--input", input, "CSV reward matrix, N rows x K columns")->required();
  solve->add_option("--mode", mode, "central|distributed|csma|truncated|greedy");
  solve->add_option("--eps", eps, "bid increment (0 = default 1e-2*max/N)");
  solve->add_option("--alpha", alpha, "truncation exponent (mode=truncated)");
  solve->add_option("--seed", seed, "seed (mode=greedy)");
  solve->add_option("--out", out_path, "result JSON path ('-' = stdout)");
  solve->add_option("--trace-csv", trace_csv, "bid trace CSV path");
  solve->add_option("--slot-csv", slot_csv, "slot trace CSV path (mode=csma)");
  solve->add_option("--backoff-form", backoff_form, "reciprocal|exponential");
  solve->add_option("--tmax-ms", t_max_ms, "maximum backoff in ms");
  solve->add_option("--quantization-q", quantization_q,
                    "entries are multiples of 1/q; warns when eps >= 1/(qN)");

  // experiment
  std::string experiment_id, config_path, out_dir;
  bool force = false;
  auto* exp = app.add_subcommand("experiment", "Run a seeded experiment");
  exp->add_option("id", experiment_id,
                  "optimality_vs_eps|iterations|truncation_outage|"
                  "rank_distribution|mezard_parisi|greedy_vs_bounds")
      ->required();
  exp->add_option("--config", config_path, "experiment config JSON");
  exp->add_option("--out", out_dir, "output directory")->required();
  exp->add_flag("--force", force, "overwrite results from a different config");

  // bounds
  int bn = 10, bk = 0;
  double bsnr_db = 20.0, blambda = 0.0;
  std::string bout;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the analytic bound report");
  bounds->add_option("--n", bn, "number of users")->required();
  bounds->add_option("--k", bk, "number of channels (default N)");
  bounds->add_option("--snr-db", bsnr_db, "mean SNR in dB");
  bounds->add_option("--lambda", blambda, "exponential SNR rate (overrides --snr-db)");
  bounds->add_option("--out", bout, "report JSON path ('-' = stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return run_solve(input, mode, eps, alpha, seed, out_path, trace_csv,
                       slot_csv, backoff_form, t_max_ms, quantization_q);
    }
    if (exp->parsed()) {
      chanassign::ExperimentConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw chanassign::ConfigError("cannot open " + config_path);
        cfg = chanassign::ExperimentConfig::from_json(nlohmann::json::parse(in));
      }
      cfg.experiment = experiment_id;
      chanassign::ExperimentResult res = chanassign::run_experiment(cfg);
      chanassign::write_experiment_dir(cfg, res, out_dir, force);
      if (!res.hard_failures.empty()) {
        for (const std::string& f : res.hard_failures) std::cerr << "FAIL: " << f << '\n';
        return kExitAssertion;
      }
      std::cout << "wrote " << out_dir << " (" << res.rows.size() << " trial rows)\n";
      return kExitOk;
    }
    if (bounds->parsed()) {
      const double lam = blambda > 0 ? blambda : chanassign::snr_db_to_lambda(bsnr_db);
      const int k = bk > 0 ? bk : bn;
      write_json(chanassign::bound_report_json(
                     chanassign::make_bound_report(bn, k, lam)),
                 bout);
      return kExitOk;
    }
  } catch (const chanassign::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const chanassign::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
