// Command-line front end: batched reweighted least-squares simulation, its
// high-dimensional asymptotic prediction, and comparison reports.

#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldnn/commands.hpp"
#include "ldnn/version.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  std::istringstream is(csv);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t pos = 0;
    const double x = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("bad number in list: '" + cell + "'");
    values.push_back(x);
  }
  if (values.empty()) throw std::invalid_argument("empty value list");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batched reweighted least-squares: simulation vs asymptotic prediction"};
  app.set_version_flag("--version", ldnn::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  ldnn::RunOverrides overrides;
  std::optional<int> trials_flag;
  std::optional<std::int64_t> particles_flag;
  std::optional<std::uint64_t> seed_flag;

  const auto add_common = [&](CLI::App* cmd, bool with_trials, bool with_particles) {
    cmd->add_option("-c,--config", config_path, "experiment JSON document")->required();
    cmd->add_option("-o,--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_flag, "override the config seed (LDNN_SEED wins over this)");
    if (with_trials) cmd->add_option("--trials", trials_flag, "override the trial count");
    if (with_particles) cmd->add_option("--particles", particles_flag, "override the particle count");
    cmd->add_option("--threads", overrides.threads, "worker threads (0 = hardware)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run finite-size trials, write trials.csv + aggregate.csv");
  add_common(simulate, true, false);

  CLI::App* predict = app.add_subcommand("predict", "run the asymptotic recursion, write predicted.csv");
  add_common(predict, false, true);

  CLI::App* compare = app.add_subcommand("compare", "join predicted.csv with aggregate.csv, write a JSON report");
  std::string pred_csv, sim_csv, report_path = "report.json", svg_path;
  double rel_tol = 0.10, abs_tol = 2e-3;
  compare->add_option("predicted", pred_csv, "predicted.csv from `predict`")->required();
  compare->add_option("aggregate", sim_csv, "aggregate.csv from `simulate`")->required();
  compare->add_option("-o,--out", report_path, "report path (JSON)");
  compare->add_option("--svg", svg_path, "also write an overlay plot to this path");
  compare->add_option("--rel-tol", rel_tol, "relative tolerance on |median - predicted|");
  compare->add_option("--abs-tol", abs_tol, "absolute tolerance floor");

  CLI::App* tune = app.add_subcommand("tune-lambda", "pick the ridge penalty minimizing the predicted l1 error");
  add_common(tune, false, true);
  std::string lambdas_csv;
  double lambda_min = 0.0, lambda_max = 0.0;
  int lambda_count = 0;
  tune->add_option("--lambdas", lambdas_csv, "explicit comma-separated grid");
  tune->add_option("--lambda-min", lambda_min, "geometric grid start");
  tune->add_option("--lambda-max", lambda_max, "geometric grid end");
  tune->add_option("--lambda-count", lambda_count, "geometric grid size");

  CLI::App* sweep = app.add_subcommand("sweep", "repeat the prediction along one axis, write sweep.csv");
  add_common(sweep, true, true);
  std::string axis, values_csv;
  bool with_sim = false;
  sweep->add_option("--axis", axis, "b, lambda, or kappa")->required();
  sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
  sweep->add_flag("--simulate", with_sim, "also run finite-size trials per value");

  CLI11_PARSE(app, argc, argv);

  try {
    overrides.trials = trials_flag;
    overrides.particles = particles_flag;
    overrides.seed = seed_flag;

    if (simulate->parsed()) return ldnn::cmd_simulate(config_path, out_dir, overrides);
    if (predict->parsed()) return ldnn::cmd_predict(config_path, out_dir, overrides);
    if (compare->parsed()) {
      return ldnn::cmd_compare(pred_csv, sim_csv, report_path, svg_path, rel_tol, abs_tol);
    }
    if (tune->parsed()) {
      std::vector<double> grid;
      if (!lambdas_csv.empty()) {
        grid = parse_double_list(lambdas_csv);
      } else if (lambda_count > 0) {
        grid = ldnn::log_spaced(lambda_min, lambda_max, lambda_count);
      } else {
        std::cerr << "tune-lambda: pass --lambdas or --lambda-min/--lambda-max/--lambda-count\n";
        return 1;
      }
      return ldnn::cmd_tune_lambda(config_path, grid, out_dir, overrides);
    }
    if (sweep->parsed()) {
      return ldnn::cmd_sweep(config_path, axis, parse_double_list(values_csv), with_sim, out_dir,
                             overrides);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
