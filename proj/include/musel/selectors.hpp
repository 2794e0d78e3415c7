#pragma once

// Estimator front ends. Each selector builds its LP, solves it, and wraps the
// result as an Estimate; thresholding rules and the epsilon rule live here
// too. All contracts are stated on objective value, feasibility and sign
// patterns: the minimizers themselves need not be unique.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "musel/linalg.hpp"
#include "musel/lp.hpp"
#include "musel/selector_config.hpp"

namespace musel {

constexpr double kSupportTol = 1e-8;

inline std::vector<std::size_t> support(const Vector& theta, double tol = kSupportTol) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (std::fabs(theta[j]) > tol) idx.push_back(j);
  }
  return idx;
}

enum class EstimateStatus { ok, infeasible };

struct Estimate {
  EstimateStatus status = EstimateStatus::infeasible;
  Variant variant = Variant::MU2;
  double delta = 0.0;
  double epsilon = 0.0;
  double lambda = 0.0;
  Vector theta_hat;
  std::vector<std::size_t> support;
  double l1_norm = 0.0;
  // LP objective minus |theta_hat|_1. Positive gap means the solver padded
  // u and v on both sides, which only happens on degenerate optima.
  double objective_gap = 0.0;
};

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::MU1: return "MU1";
    case Variant::MU2: return "MU2";
    case Variant::Dantzig: return "Dantzig";
    case Variant::Lasso: return "Lasso";
  }
  return "?";
}

namespace detail {

inline Estimate run_lp_selector(const DenseMatrix& Z, const Vector& y,
                                const SelectorConfig& cfg) {
  Estimate est;
  est.variant = cfg.variant;
  est.delta = cfg.delta;
  est.epsilon = cfg.epsilon;
  est.lambda = (cfg.variant == Variant::MU1 || cfg.variant == Variant::Dantzig)
                   ? 0.0
                   : cfg.lambda();

  const LpProblem lp = build_l1_lp(Z, y, cfg);
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible) {
    est.status = EstimateStatus::infeasible;
    return est;
  }
  if (sol.status == LpStatus::unbounded) {
    // Minimizing a nonnegative objective cannot diverge.
    throw std::logic_error("selector LP reported unbounded");
  }

  const std::size_t p = Z.cols();
  est.theta_hat.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) est.theta_hat[j] = sol.x[j] - sol.x[p + j];
  est.l1_norm = norm_l1(est.theta_hat);
  est.objective_gap = sol.objective_value - est.l1_norm;
  est.support = musel::support(est.theta_hat);
  est.status = EstimateStatus::ok;
  return est;
}

}  // namespace detail

// min{ |theta|_1 : theta in Theta, |y - Z theta|_inf <= delta |theta|_1 }
inline Estimate mu_selector_1(const DenseMatrix& Z, const Vector& y, double delta,
                              const FeasibleSet& theta_set = FeasibleSet::all()) {
  if (delta < 0.0) throw std::invalid_argument("mu_selector_1: delta must be >= 0");
  SelectorConfig cfg;
  cfg.variant = Variant::MU1;
  cfg.delta = delta;
  cfg.theta_set = theta_set;
  return detail::run_lp_selector(Z, y, cfg);
}

// min{ |theta|_1 : theta in Theta, |(1/n) Z'(y - Z theta)|_inf <=
//                                   lambda |theta|_1 + epsilon }
inline Estimate mu_selector_2(const DenseMatrix& Z, const Vector& y,
                              const SelectorConfig& cfg) {
  if (cfg.variant != Variant::MU2) {
    throw std::invalid_argument("mu_selector_2: cfg.variant must be MU2");
  }
  if (cfg.epsilon < 0.0 || cfg.lambda() < 0.0) {
    throw std::invalid_argument("mu_selector_2: epsilon and lambda must be >= 0");
  }
  return detail::run_lp_selector(Z, y, cfg);
}

// MU-selector II with delta = 0 and lambda = 0.
inline Estimate dantzig(const DenseMatrix& Z, const Vector& y, double epsilon,
                        const FeasibleSet& theta_set = FeasibleSet::all()) {
  if (epsilon < 0.0) throw std::invalid_argument("dantzig: epsilon must be >= 0");
  SelectorConfig cfg;
  cfg.variant = Variant::Dantzig;
  cfg.epsilon = epsilon;
  cfg.theta_set = theta_set;
  return detail::run_lp_selector(Z, y, cfg);
}

// Entries with |theta_j| <= tau are zeroed exactly; the rest are copied.
inline Estimate threshold(const Estimate& est, double tau) {
  if (tau < 0.0) throw std::invalid_argument("threshold: tau must be >= 0");
  Estimate out = est;
  for (double& v : out.theta_hat) {
    if (std::fabs(v) <= tau) v = 0.0;
  }
  out.l1_norm = out.theta_hat.empty() ? 0.0 : norm_l1(out.theta_hat);
  out.support = support(out.theta_hat);
  return out;
}

// tau = C*(alpha) delta |theta_hat|_1  with  C*(alpha) = 2(1 + 2/(3 sqrt(alpha(alpha-1)))).
inline double tau_star(double delta, double l1_of_estimate, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("tau_star: alpha must be > 1");
  const double cstar = 2.0 * (1.0 + 2.0 / (3.0 * std::sqrt(alpha * (alpha - 1.0))));
  return cstar * delta * l1_of_estimate;
}

enum class Tau1Kind { B1, B2 };

// B1 needs the prior l1 bound a; B2 is fully data-driven through |theta_hat|_1.
inline double tau1(Tau1Kind kind, double epsilon, double delta, double alpha,
                   double l1_of_estimate, double a = 0.0) {
  if (!(alpha > 1.0)) throw std::invalid_argument("tau1: alpha must be > 1");
  const double front = (3.0 * alpha + 1.0) / (3.0 * (alpha - 1.0));
  if (kind == Tau1Kind::B1) {
    if (!(a > 0.0)) throw std::invalid_argument("tau1: B1 requires a > 0");
    return front * (2.0 * epsilon + 2.0 * (2.0 + delta) * delta * a);
  }
  return 2.0 * front * (2.0 * epsilon + 2.0 * (1.0 + delta) * delta * l1_of_estimate);
}

// epsilon = A sigma sqrt(log p / n); the default factor is A = (1+delta) sqrt(2).
inline double epsilon_rule(double delta, double sigma, std::size_t n, std::size_t p,
                           double A = -1.0) {
  if (p < 2) throw std::invalid_argument("epsilon_rule: p must be >= 2");
  if (n < 1) throw std::invalid_argument("epsilon_rule: n must be >= 1");
  if (sigma < 0.0) throw std::invalid_argument("epsilon_rule: sigma must be >= 0");
  if (A < 0.0) A = (1.0 + delta) * std::sqrt(2.0);
  return A * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

}  // namespace musel
