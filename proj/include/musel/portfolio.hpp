#pragma once

// Portfolio replication on open/close price panels: build the normalized
// absolute-returns design, synthesize an equal-weight portfolio with noise,
// zero out one asset's column, and recover holdings with the selector.

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "musel/csv.hpp"
#include "musel/linalg.hpp"
#include "musel/rng.hpp"
#include "musel/selectors.hpp"

namespace musel {

struct PricePanel {
  std::vector<std::string> tickers;  // sorted, only assets with a full grid
  std::vector<std::string> dates;    // sorted trading days
  DenseMatrix open;                  // dates x tickers
  DenseMatrix close;
  std::vector<std::string> dropped;  // tickers removed for missing days
};

// CSV with header date,ticker,open,close. Assets missing any trading day
// present elsewhere in the file are dropped (collected in `dropped`).
inline PricePanel load_prices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_prices: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_prices: empty file " + path);

  std::map<std::string, std::map<std::string, std::pair<double, double>>> by_ticker;
  std::map<std::string, bool> date_seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 4) {
      throw std::runtime_error("load_prices: line " + std::to_string(lineno) +
                               ": expected date,ticker,open,close");
    }
    const std::string where = path + ":" + std::to_string(lineno);
    const double o = parse_double(fields[2], where);
    const double c = parse_double(fields[3], where);
    auto& per_date = by_ticker[fields[1]];
    if (!per_date.emplace(fields[0], std::make_pair(o, c)).second) {
      throw std::runtime_error("load_prices: line " + std::to_string(lineno) +
                               ": duplicate (date, ticker) row");
    }
    date_seen[fields[0]] = true;
  }
  if (by_ticker.empty()) throw std::runtime_error("load_prices: no data rows in " + path);

  PricePanel panel;
  for (const auto& [date, _] : date_seen) panel.dates.push_back(date);

  for (const auto& [ticker, per_date] : by_ticker) {
    if (per_date.size() == panel.dates.size()) {
      panel.tickers.push_back(ticker);
    } else {
      panel.dropped.push_back(ticker);
    }
  }
  if (panel.tickers.empty()) {
    throw std::runtime_error("load_prices: no asset covers every trading day");
  }

  const std::size_t n = panel.dates.size();
  const std::size_t p = panel.tickers.size();
  panel.open = DenseMatrix(n, p);
  panel.close = DenseMatrix(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& per_date = by_ticker[panel.tickers[j]];
    for (std::size_t i = 0; i < n; ++i) {
      const auto& oc = per_date.at(panel.dates[i]);
      panel.open(i, j) = oc.first;
      panel.close(i, j) = oc.second;
    }
  }
  return panel;
}

// Daily close-minus-open differences, centered and scaled to a unit Gram
// diagonal like every other design here.
inline DesignMatrix returns_design(const PricePanel& panel) {
  DenseMatrix diff(panel.open.rows(), panel.open.cols());
  for (std::size_t k = 0; k < diff.data().size(); ++k) {
    diff.data()[k] = panel.close.data()[k] - panel.open.data()[k];
  }
  return normalize_design(diff);
}

inline std::size_t ticker_index(const PricePanel& panel, const std::string& ticker) {
  const auto it = std::find(panel.tickers.begin(), panel.tickers.end(), ticker);
  if (it == panel.tickers.end()) {
    throw std::invalid_argument("unknown ticker: " + ticker);
  }
  return static_cast<std::size_t>(it - panel.tickers.begin());
}

struct PortfolioTruth {
  Vector theta_star;
  Vector y;
};

// Equal 1/s weights on the chosen assets and y = X theta + noise.
inline PortfolioTruth build_portfolio(const PricePanel& panel,
                                      const std::vector<std::string>& chosen,
                                      double sigma_noise, Rng& rng) {
  if (chosen.empty()) throw std::invalid_argument("build_portfolio: no assets chosen");
  const DesignMatrix X = returns_design(panel);
  PortfolioTruth out;
  out.theta_star.assign(panel.tickers.size(), 0.0);
  const double w = 1.0 / static_cast<double>(chosen.size());
  for (const std::string& t : chosen) out.theta_star[ticker_index(panel, t)] = w;
  out.y = matvec(X.matrix, out.theta_star);
  if (sigma_noise > 0.0) {
    for (double& v : out.y) v += sigma_noise * rng.normal();
  }
  return out;
}

// The matrix-uncertainty scenario: the named asset leaves the tradable
// universe, so its column of X is zeroed.
inline DenseMatrix suppress_asset(const DesignMatrix& X, std::size_t column) {
  if (column >= X.matrix.cols()) throw std::invalid_argument("suppress_asset: bad column");
  DenseMatrix Z = X.matrix;
  for (std::size_t i = 0; i < Z.rows(); ++i) Z(i, column) = 0.0;
  return Z;
}

struct ReplicationResult {
  std::vector<std::string> retrieved;  // tickers in the recovered support
  std::vector<double> weights;         // matching coefficients
  double delta = 0.0;
  double epsilon = 0.0;
  Estimate estimate;
};

inline ReplicationResult replicate(const DenseMatrix& Z, const Vector& y, double delta,
                                   double epsilon, const FeasibleSet& theta_set,
                                   const std::vector<std::string>& tickers) {
  if (tickers.size() != Z.cols()) {
    throw std::invalid_argument("replicate: ticker list does not match design width");
  }
  SelectorConfig cfg;
  cfg.variant = Variant::MU2;
  cfg.delta = delta;
  cfg.epsilon = epsilon;
  cfg.theta_set = theta_set;

  ReplicationResult out;
  out.delta = delta;
  out.epsilon = epsilon;
  out.estimate = mu_selector_2(Z, y, cfg);
  if (out.estimate.status == EstimateStatus::ok) {
    for (std::size_t j : out.estimate.support) {
      out.retrieved.push_back(tickers[j]);
      out.weights.push_back(out.estimate.theta_hat[j]);
    }
  }
  return out;
}

// Stand-in for the unavailable historical data: a factor-model panel whose
// assets fall into equally sized groups with strong within-group correlation
// of daily differences. Tickers are zero-padded so sorted order is stable.
inline PricePanel synthetic_panel(std::size_t n_days, std::size_t p, std::size_t groups,
                                  Rng& rng, double group_weight = 0.6) {
  if (p == 0 || n_days < 2 || groups == 0 || groups > p) {
    throw std::invalid_argument("synthetic_panel: bad shape");
  }
  PricePanel panel;
  for (std::size_t j = 0; j < p; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "A%03zu", j);
    panel.tickers.emplace_back(buf);
  }
  for (std::size_t i = 0; i < n_days; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "2026-%02zu-%02zu", 1 + i / 28, 1 + i % 28);
    panel.dates.emplace_back(buf);
  }
  const std::size_t per_group = (p + groups - 1) / groups;
  panel.open = DenseMatrix(n_days, p);
  panel.close = DenseMatrix(n_days, p);
  Vector level(p);
  for (std::size_t j = 0; j < p; ++j) level[j] = 50.0 + static_cast<double>(j);
  for (std::size_t i = 0; i < n_days; ++i) {
    Vector factor(groups);
    for (double& f : factor) f = rng.normal();
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = 0.5 * (group_weight * factor[j / per_group] +
                                 (1.0 - group_weight) * rng.normal());
      panel.open(i, j) = level[j];
      panel.close(i, j) = level[j] + diff;
      level[j] += diff;
    }
  }
  return panel;
}

inline void write_panel_csv(const PricePanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_panel_csv: cannot open " + path);
  out << "date,ticker,open,close\n";
  for (std::size_t i = 0; i < panel.dates.size(); ++i) {
    for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
      out << panel.dates[i] << ',' << panel.tickers[j] << ','
          << format_double(panel.open(i, j)) << ','
          << format_double(panel.close(i, j)) << '\n';
    }
  }
}

}  // namespace musel
