// Command-line driver for the sparse-portfolio pipeline: single-lambda solves
// and lambda sweeps over real or synthetic price panels.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lpopt/portfolio.hpp"

namespace {

struct CommonOpts {
  std::string prices;
  std::string oos_prices;
  double eta = 0.001;
  double p = 0.5;
  double alpha = 0.998;
  double beta_factor = 1.1;
  double eps0 = 0.001;
  int max_iters = 100000;
  double tol_step = 1e-10;
  double tol_residual = 1e-8;
  unsigned seed = 20130101;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--prices", o.prices, "Wide CSV price panel (date + one column per ticker)");
  cmd->add_option("--oos-prices", o.oos_prices, "Out-of-sample price panel");
  cmd->add_option("--eta", o.eta, "Return-constraint multiplier")->capture_default_str();
  cmd->add_option("--p", o.p, "lp exponent in (0,1]")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Smoothing decay factor")->capture_default_str();
  cmd->add_option("--beta-factor", o.beta_factor, "beta = beta-factor * L_f")->capture_default_str();
  cmd->add_option("--eps0", o.eps0, "Initial smoothing")->capture_default_str();
  cmd->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--tol-step", o.tol_step, "Step-norm stopping tolerance")->capture_default_str();
  cmd->add_option("--tol-residual", o.tol_residual, "Support-residual stopping tolerance")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for the synthetic panel")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

int run(const CommonOpts& o, const std::vector<double>& lambdas) {
  lpopt::PricePanel panel;
  if (o.prices.empty()) {
    std::cerr << "no --prices given; using the built-in synthetic panel (seed " << o.seed << ")\n";
    panel = lpopt::synthetic_panel(50, 251, o.seed);
  } else {
    panel = lpopt::load_prices(o.prices);
    std::cerr << "loaded " << panel.tickers.size() << " tickers, " << panel.dates.size()
              << " dates (" << panel.dropped_tickers << " dropped, " << panel.filled_cells
              << " cells filled)\n";
  }
  std::optional<lpopt::PricePanel> oos;
  if (!o.oos_prices.empty()) oos = lpopt::load_prices(o.oos_prices);

  lpopt::ExperimentConfig config;
  config.eta = o.eta;
  config.p = o.p;
  config.lambda_grid = lambdas;
  config.solver.alpha = o.alpha;
  config.solver.beta_factor = o.beta_factor;
  config.solver.eps0 = o.eps0;
  config.solver.max_iters = o.max_iters;
  config.solver.tol_step = o.tol_step;
  config.solver.tol_residual = o.tol_residual;

  const lpopt::ExperimentResult result = lpopt::run_experiment(panel, oos, config);
  std::filesystem::create_directories(o.out);
  for (const auto& f : lpopt::emit_reports(result, o.out)) std::cerr << "wrote " << f << "\n";
  for (size_t k = 0; k < result.lambda_grid.size(); ++k)
    std::cout << "lambda=" << result.lambda_grid[k] << " nnz=" << result.nnz[k]
              << " sharpe_in_daily=" << result.sharpe_in_daily[k] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lp-regularized sparse portfolio selection"};
  app.require_subcommand(1);

  CommonOpts solve_opts, sweep_opts;
  double lambda = 0.001;
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2};

  CLI::App* solve_cmd = app.add_subcommand("solve", "Single-lambda solve");
  add_common(solve_cmd, solve_opts);
  solve_cmd->add_option("--lambda", lambda, "Regularization weight")->capture_default_str();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Solve over a lambda grid");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--lambda-grid", lambda_grid, "Comma-separated lambda values")
      ->delimiter(',')
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run(solve_opts, {lambda});
    return run(sweep_opts, lambda_grid);
  } catch (const lpopt::PriceParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const lpopt::DescentViolation& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    // I/O problems exit 1, solver/feasibility problems exit 2
    return msg.find("output file") != std::string::npos ? 1 : 2;
  }
}
