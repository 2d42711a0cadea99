#pragma once

// Sparse-portfolio pipeline: wide-CSV price ingestion, moment estimation,
// lp-regularized no-shorting Markowitz solves over a lambda grid, and CSV
// report emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lpopt/optimality.hpp"
#include "lpopt/solver.hpp"
#include "lpopt/types.hpp"

namespace lpopt {

struct PricePanel {
  std::vector<std::string> dates;    // strictly increasing
  std::vector<std::string> tickers;
  Matrix prices;                     // dates x tickers, fully filled
  int dropped_tickers = 0;           // below the completeness threshold
  int filled_cells = 0;              // forward/backfilled
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

struct PriceParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wide CSV: first column header "date", remaining columns ticker symbols,
/// cells are decimal prices or empty for missing. Tickers below 90%
/// completeness are dropped; remaining gaps are forward-filled (the first
/// observation is backfilled).
inline PricePanel load_prices(const std::string& path, double completeness = 0.9) {
  std::ifstream in(path);
  if (!in) throw PriceParseError("cannot open price file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw PriceParseError("empty price file: " + path);
  auto header = detail::split_csv_line(line);
  if (header.empty() || detail::trim(header[0]) != "date")
    throw PriceParseError("first column header must be 'date': " + path);
  const int ncols = static_cast<int>(header.size()) - 1;
  if (ncols < 2) throw PriceParseError("fewer than 2 tickers: " + path);

  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;  // NaN marks missing
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != ncols + 1)
      throw PriceParseError(path + ":" + std::to_string(lineno) + ": wrong cell count");
    const std::string date = detail::trim(cells[0]);
    if (!dates.empty() && date <= dates.back())
      throw PriceParseError(path + ":" + std::to_string(lineno) +
                            ": dates must be strictly increasing (duplicate or out of order)");
    dates.push_back(date);
    std::vector<double> row(ncols);
    for (int j = 0; j < ncols; ++j) {
      const std::string cell = detail::trim(cells[j + 1]);
      if (cell.empty()) {
        row[j] = std::numeric_limits<double>::quiet_NaN();
      } else {
        char* end = nullptr;
        row[j] = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0')
          throw PriceParseError(path + ":" + std::to_string(lineno) + ": unparseable cell '" +
                                cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const int ndates = static_cast<int>(dates.size());
  if (ndates < 2) throw PriceParseError("fewer than 2 dates: " + path);

  PricePanel panel;
  panel.dates = dates;
  std::vector<int> kept;
  for (int j = 0; j < ncols; ++j) {
    int present = 0;
    for (int t = 0; t < ndates; ++t)
      if (!std::isnan(rows[t][j])) ++present;
    if (static_cast<double>(present) >= completeness * ndates)
      kept.push_back(j);
    else
      ++panel.dropped_tickers;
  }
  if (static_cast<int>(kept.size()) < 2)
    throw PriceParseError("fewer than 2 tickers survive the completeness screen: " + path);

  panel.prices.resize(ndates, static_cast<Eigen::Index>(kept.size()));
  for (size_t k = 0; k < kept.size(); ++k) {
    const int j = kept[k];
    panel.tickers.push_back(detail::trim(header[j + 1]));
    // backfill the head, then forward fill
    int first = 0;
    while (first < ndates && std::isnan(rows[first][j])) ++first;
    if (first == ndates) throw PriceParseError("ticker with no observations survived the screen");
    double last = rows[first][j];
    for (int t = 0; t < ndates; ++t) {
      double v = rows[t][j];
      if (std::isnan(v)) {
        v = last;
        ++panel.filled_cells;
      } else {
        last = v;
      }
      panel.prices(t, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return panel;
}

struct MomentEstimates {
  Matrix R;   // sample covariance of daily simple returns, 1/(T-1)
  Vector mu;  // mean daily return
  double Lf = 0.0;  // largest eigenvalue of R
};

/// Simple daily returns r_t = p_t / p_{t-1} - 1, sample mean and covariance.
inline Matrix daily_returns(const PricePanel& panel) {
  const int T = static_cast<int>(panel.prices.rows());
  const int n = static_cast<int>(panel.prices.cols());
  if (T < 2) throw std::invalid_argument("estimate_moments: need at least 2 dates");
  if ((panel.prices.array() <= 0.0).any())
    throw std::invalid_argument("estimate_moments: zero or negative prices");
  Matrix r(T - 1, n);
  for (int t = 1; t < T; ++t)
    r.row(t - 1) = panel.prices.row(t).array() / panel.prices.row(t - 1).array() - 1.0;
  return r;
}

inline MomentEstimates estimate_moments(const PricePanel& panel) {
  const Matrix r = daily_returns(panel);
  const int T = static_cast<int>(r.rows());
  MomentEstimates m;
  m.mu = r.colwise().mean();
  Matrix centered = r.rowwise() - m.mu.transpose();
  m.R = (centered.transpose() * centered) / static_cast<double>(T - 1);
  m.R = 0.5 * (m.R + m.R.transpose());  // enforce exact symmetry
  m.Lf = estimate_lipschitz(m.R).value;
  return m;
}

/// Fixed-seed factor-model panel (r = B f + noise) for desk-scale runs when
/// no real price data is supplied.
inline PricePanel synthetic_panel(int n_assets = 50, int n_days = 251, unsigned seed = 20130101,
                                  int n_factors = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix B(n_assets, n_factors);
  for (int i = 0; i < n_assets; ++i)
    for (int f = 0; f < n_factors; ++f) B(i, f) = 0.01 * gauss(rng);
  PricePanel panel;
  panel.prices.resize(n_days, n_assets);
  Vector level = Vector::Constant(n_assets, 100.0);
  char buf[16];
  for (int i = 0; i < n_assets; ++i) {
    std::snprintf(buf, sizeof(buf), "A%03d", i);
    panel.tickers.push_back(buf);
  }
  for (int t = 0; t < n_days; ++t) {
    std::snprintf(buf, sizeof(buf), "d%04d", t);
    panel.dates.push_back(buf);
    if (t > 0) {
      Vector f(n_factors);
      for (int k = 0; k < n_factors; ++k) f[k] = gauss(rng);
      for (int i = 0; i < n_assets; ++i) {
        const double r = (B.row(i) * f)(0) + 0.005 * gauss(rng) + 2e-4;
        level[i] *= (1.0 + r);
      }
    }
    panel.prices.row(t) = level.transpose();
  }
  return panel;
}

struct ExperimentConfig {
  double eta = 0.001;
  double p = 0.5;
  std::vector<double> lambda_grid{0.001};
  SolverParams solver;
};

struct ExperimentResult {
  std::vector<double> lambda_grid;
  std::vector<std::string> tickers;
  std::vector<Vector> weights;      // per lambda
  std::vector<int> nnz;             // per lambda, exact zeros
  std::vector<double> residual_trace;  // alpha(x^k, nu^k) for the first lambda
  std::vector<double> sharpe_in_daily, sharpe_out_daily;
  std::vector<SolveReport> reports;
};

inline double daily_sharpe(const Matrix& returns, const Vector& weights) {
  const Vector port = returns * weights;
  const double mean = port.mean();
  const double var = (port.array() - mean).square().sum() / static_cast<double>(port.size() - 1);
  const double sd = std::sqrt(var);
  return sd > 0.0 ? mean / sd : 0.0;
}

/// For each lambda, solves min 1/2 x'Rx - eta mu'x + lambda ||x||_p^p over
/// the unit simplex and records sparsity, the alpha residual trajectory (for
/// the first lambda), and in/out-of-sample Sharpe ratios.
inline ExperimentResult run_experiment(const PricePanel& panel_in,
                                       const std::optional<PricePanel>& panel_out,
                                       const ExperimentConfig& config) {
  const MomentEstimates m = estimate_moments(panel_in);
  const int n = static_cast<int>(m.R.rows());
  const Vector c = config.eta * m.mu;
  const SmoothOracle oracle = SmoothOracle::quadratic(m.R, c, m.Lf);
  const FeasibleSet gamma = FeasibleSet::simplex(1.0);
  const Vector x0 = Vector::Constant(n, 1.0 / n);
  const Matrix returns_in = daily_returns(panel_in);
  std::optional<Matrix> returns_out;
  if (panel_out) returns_out = daily_returns(*panel_out);

  ExperimentResult result;
  result.lambda_grid = config.lambda_grid;
  result.tickers = panel_in.tickers;
  for (size_t li = 0; li < config.lambda_grid.size(); ++li) {
    const double lambda = config.lambda_grid[li];
    LpRegularizer reg = LpRegularizer::penalized(config.p, lambda);
    SolveReport report = solve(oracle, reg, gamma, x0, config.solver);
    const Vector& x = report.solution();
    result.nnz.push_back(static_cast<int>((x.array() != 0.0).count()));
    result.sharpe_in_daily.push_back(daily_sharpe(returns_in, x));
    result.sharpe_out_daily.push_back(returns_out ? daily_sharpe(*returns_out, x) : 0.0);
    if (li == 0) {
      for (size_t k = 0; k < report.duals.size(); ++k) {
        const double nu = report.duals[k].equality_dual.value_or(0.0);
        result.residual_trace.push_back(alpha_residual(report.iterates[k + 1], nu, m.R, c, reg));
      }
    }
    result.weights.push_back(x);
    result.reports.push_back(std::move(report));
  }
  return result;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline std::string fmt_lambda(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace detail

/// Writes residual_trajectory.csv, sparsity_vs_lambda.csv, weights_<lambda>.csv
/// and sharpe.csv into outdir. Deterministic row order, 17-significant-digit
/// decimals.
inline std::vector<std::string> emit_reports(const ExperimentResult& result,
                                             const std::string& outdir) {
  std::vector<std::string> written;
  {
    const std::string path = outdir + "/residual_trajectory.csv";
    auto out = detail::open_out(path);
    out << "iter,alpha_residual\n";
    for (size_t k = 0; k < result.residual_trace.size(); ++k)
      out << k << "," << detail::fmt17(result.residual_trace[k]) << "\n";
    written.push_back(path);
  }
  {
    const std::string path = outdir + "/sparsity_vs_lambda.csv";
    auto out = detail::open_out(path);
    out << "lambda,nnz\n";
    for (size_t k = 0; k < result.lambda_grid.size(); ++k)
      out << detail::fmt17(result.lambda_grid[k]) << "," << result.nnz[k] << "\n";
    written.push_back(path);
  }
  for (size_t k = 0; k < result.lambda_grid.size(); ++k) {
    const std::string path =
        outdir + "/weights_" + detail::fmt_lambda(result.lambda_grid[k]) + ".csv";
    auto out = detail::open_out(path);
    out << "ticker,weight\n";
    for (size_t i = 0; i < result.tickers.size(); ++i)
      out << result.tickers[i] << "," << detail::fmt17(result.weights[k][static_cast<Eigen::Index>(i)])
          << "\n";
    written.push_back(path);
  }
  {
    const std::string path = outdir + "/sharpe.csv";
    auto out = detail::open_out(path);
    out << "lambda,nnz,sharpe_in_daily,sharpe_in_annualized,sharpe_out_daily,sharpe_out_"
           "annualized\n";
    const double ann = std::sqrt(252.0);
    for (size_t k = 0; k < result.lambda_grid.size(); ++k) {
      out << detail::fmt17(result.lambda_grid[k]) << "," << result.nnz[k] << ","
          << detail::fmt17(result.sharpe_in_daily[k]) << ","
          << detail::fmt17(result.sharpe_in_daily[k] * ann) << ","
          << detail::fmt17(result.sharpe_out_daily[k]) << ","
          << detail::fmt17(result.sharpe_out_daily[k] * ann) << "\n";
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace lpopt
