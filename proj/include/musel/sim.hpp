#pragma once

// Synthetic-data generators, error metrics, and the Monte Carlo driver for
// the censored and missing-data experiments, plus the delta elbow scan.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "musel/analysis.hpp"
#include "musel/instance.hpp"
#include "musel/lasso.hpp"
#include "musel/linalg.hpp"
#include "musel/rng.hpp"
#include "musel/selectors.hpp"

namespace musel {

// Stream tags so each replicate's randomness is reconstructible in isolation.
namespace seed_role {
inline constexpr std::uint64_t design = 1;
inline constexpr std::uint64_t theta = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t mask = 4;
}  // namespace seed_role

enum class ModelKind { censored, missing };

struct ModelSpec {
  ModelKind kind = ModelKind::censored;
  double t = 0.9;          // censoring level
  double pi = 0.1;         // masking probability
  bool rescaled = false;   // divide the masked matrix by 1 - pi
};

enum class ThresholdKind { none, fixed, b1, b2, star };

struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::none;
  double value = 0.0;  // fixed threshold
  double a = 0.0;      // l1 radius, only for b1
  double alpha = 2.0;  // for b1 / b2 / star
};

struct EstimatorSpec {
  std::string label;
  SelectorConfig config;
  bool epsilon_auto = false;  // resolve epsilon from (delta, sigma, n, p)
  ThresholdRule threshold;
};

struct ExperimentSpec {
  ModelSpec model;
  std::size_t n = 100;
  std::size_t p = 500;
  std::size_t s = 1;
  double theta_value = 0.5;
  double sigma = 0.05 / 1.96;
  std::vector<EstimatorSpec> estimators;
  std::size_t reps = 100;
  std::uint64_t base_seed = 1;
};

struct MetricsRow {
  double err1 = 0.0;  // |theta_hat - theta*|_2^2
  double err2 = 0.0;  // |X(theta_hat - theta*)|_2^2
  double nb1 = 0.0;   // retrieved support size
  double nb2 = 0.0;   // retrieved support inside the true pattern
  int exact = 0;      // supports identical
  int sign_ok = 0;    // sign patterns identical
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
};

struct EstimatorSummary {
  std::string label;
  std::size_t reps_used = 0;
  std::size_t infeasible = 0;
  MetricSummary err1, err2, nb1, nb2;
  std::size_t exact = 0;
  std::size_t sign_ok = 0;
  std::vector<MetricsRow> samples;  // one row per feasible replicate
};

struct TableReport {
  std::size_t reps = 0;
  std::vector<EstimatorSummary> rows;
};

inline DesignMatrix gen_design(std::size_t n, std::size_t p, Rng& rng) {
  DenseMatrix raw(n, p);
  for (double& v : raw.data()) v = rng.normal();
  return normalize_design(raw);
}

// Uniform-without-replacement support of size s, all entries set to value.
inline Vector gen_theta(std::size_t p, std::size_t s, double value, Rng& rng) {
  if (s > p) throw std::invalid_argument("gen_theta: s > p");
  std::vector<std::size_t> idx(p);
  for (std::size_t j = 0; j < p; ++j) idx[j] = j;
  Vector theta(p, 0.0);
  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t pick = k + rng.index(p - k);
    std::swap(idx[k], idx[pick]);
    theta[idx[k]] = value;
  }
  return theta;
}

inline Vector gen_noise(std::size_t n, double sigma, Rng& rng) {
  Vector xi(n, 0.0);
  if (sigma == 0.0) return xi;
  for (double& v : xi) v = sigma * rng.normal();
  return xi;
}

// Entrywise clamp to [-t, t].
inline DenseMatrix censor(const DenseMatrix& X, double t) {
  if (t <= 0.0) throw std::invalid_argument("censor: t must be positive");
  DenseMatrix Z = X;
  for (double& v : Z.data()) {
    if (v > t) v = t;
    if (v < -t) v = -t;
  }
  return Z;
}

struct MaskResult {
  DenseMatrix Z;
  DenseMatrix Xi;
};

// Z_ij = X_ij * Bernoulli(1 - pi); the rescaled variant divides by 1 - pi so
// E(Z) = X. Xi is returned as Z - X either way.
inline MaskResult mask_missing(const DenseMatrix& X, double pi, Rng& rng,
                               bool rescaled = false) {
  if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("mask_missing: pi in [0,1]");
  if (rescaled && pi >= 1.0) {
    throw std::invalid_argument("mask_missing: rescaling needs pi < 1");
  }
  const double scale = rescaled ? 1.0 / (1.0 - pi) : 1.0;
  MaskResult out{X, DenseMatrix(X.rows(), X.cols())};
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) {
      const double z = rng.bernoulli(pi) ? 0.0 : X(i, j) * scale;
      out.Z(i, j) = z;
      out.Xi(i, j) = z - X(i, j);
    }
  }
  return out;
}

namespace detail {

inline void check_truth_identity(const Instance& inst) {
  for (std::size_t i = 0; i < inst.Z.rows(); ++i) {
    double yi = inst.xi[i];
    for (std::size_t j = 0; j < inst.Z.cols(); ++j) {
      if (std::fabs(inst.Z(i, j) - inst.X(i, j) - inst.Xi(i, j)) > 1e-12) {
        throw std::logic_error("instance: Z != X + Xi");
      }
      yi += inst.X(i, j) * inst.theta_star[j];
    }
    if (std::fabs(inst.y[i] - yi) > 1e-12) {
      throw std::logic_error("instance: y != X theta* + xi");
    }
  }
}

}  // namespace detail

// One synthetic replicate: X, theta*, xi from their own seed streams, Z from
// the observation model. effective_delta records |Xi|_inf, the smallest
// delta under which condition (2) actually holds for this draw.
inline Instance gen_instance(const ExperimentSpec& spec, std::uint64_t rep) {
  Rng rd(spec.base_seed, rep, seed_role::design);
  Rng rt(spec.base_seed, rep, seed_role::theta);
  Rng rn(spec.base_seed, rep, seed_role::noise);

  Instance inst;
  DesignMatrix X = gen_design(spec.n, spec.p, rd);
  inst.X = X.matrix;
  inst.theta_star = gen_theta(spec.p, spec.s, spec.theta_value, rt);
  inst.xi = gen_noise(spec.n, spec.sigma, rn);
  inst.y = matvec(inst.X, inst.theta_star);
  for (std::size_t i = 0; i < spec.n; ++i) inst.y[i] += inst.xi[i];

  if (spec.model.kind == ModelKind::censored) {
    inst.Z = censor(inst.X, spec.model.t);
    inst.Xi = DenseMatrix(spec.n, spec.p);
    for (std::size_t k = 0; k < inst.Z.data().size(); ++k) {
      inst.Xi.data()[k] = inst.Z.data()[k] - inst.X.data()[k];
    }
    inst.model = "censored";
  } else {
    Rng rm(spec.base_seed, rep, seed_role::mask);
    MaskResult m = mask_missing(inst.X, spec.model.pi, rm, spec.model.rescaled);
    inst.Z = std::move(m.Z);
    inst.Xi = std::move(m.Xi);
    inst.model = "missing";
  }
  inst.has_truth = true;
  inst.s = spec.s;
  inst.sigma = spec.sigma;
  inst.seed = spec.base_seed;
  detail::check_truth_identity(inst);
  return inst;
}

inline double effective_delta(const Instance& inst) {
  double m = 0.0;
  for (double v : inst.Xi.data()) m = std::max(m, std::fabs(v));
  return m;
}

inline MetricsRow metrics(const Estimate& est, const Vector& theta_star,
                          const DenseMatrix& X) {
  MetricsRow row;
  Vector d(theta_star.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = est.theta_hat[j] - theta_star[j];
  row.err1 = dot(d, d);
  Vector xd = matvec(X, d);
  row.err2 = dot(xd, xd);

  const std::vector<std::size_t> true_supp = support(theta_star);
  row.nb1 = static_cast<double>(est.support.size());
  std::size_t hits = 0;
  for (std::size_t j : est.support) {
    if (std::fabs(theta_star[j]) > kSupportTol) ++hits;
  }
  row.nb2 = static_cast<double>(hits);
  row.exact = (est.support == true_supp) ? 1 : 0;
  row.sign_ok = compare_signs(est.theta_hat, theta_star).match ? 1 : 0;
  return row;
}

namespace detail {

// Base estimate before thresholding; cache key so T-rows reuse the solve.
inline std::string estimator_key(const SelectorConfig& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d|%.17g|%.17g|%d|%.17g|%d|%.17g|%d",
                static_cast<int>(cfg.variant), cfg.delta, cfg.epsilon,
                cfg.lambda_is_explicit ? 1 : 0, cfg.lambda_explicit,
                static_cast<int>(cfg.theta_set.kind), cfg.theta_set.a,
                cfg.theta_set.simplex_nonneg ? 1 : 0);
  return buf;
}

inline Estimate base_estimate(const SelectorConfig& cfg, const Instance& inst,
                              double sigma) {
  switch (cfg.variant) {
    case Variant::MU1:
      return mu_selector_1(inst.Z, inst.y, cfg.delta, cfg.theta_set);
    case Variant::MU2:
      return mu_selector_2(inst.Z, inst.y, cfg);
    case Variant::Dantzig:
      return dantzig(inst.Z, inst.y, cfg.epsilon, cfg.theta_set);
    case Variant::Lasso: {
      LassoPath path = lasso_path(inst.Z, inst.y);
      return lasso_cp(path, sigma, inst.Z.rows());
    }
  }
  throw std::logic_error("base_estimate: unknown variant");
}

inline Estimate apply_threshold(const Estimate& est, const ThresholdRule& rule) {
  switch (rule.kind) {
    case ThresholdKind::none:
      return est;
    case ThresholdKind::fixed:
      return threshold(est, rule.value);
    case ThresholdKind::b1:
      return threshold(
          est, tau1(Tau1Kind::B1, est.epsilon, est.delta, rule.alpha, est.l1_norm, rule.a));
    case ThresholdKind::b2:
      return threshold(
          est, tau1(Tau1Kind::B2, est.epsilon, est.delta, rule.alpha, est.l1_norm));
    case ThresholdKind::star:
      return threshold(est, tau_star(est.delta, est.l1_norm, rule.alpha));
  }
  throw std::logic_error("apply_threshold: unknown rule");
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

inline double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = compensated_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
  m.sd = std::sqrt(compensated_sum(sq) / static_cast<double>(v.size() - 1));
  return m;
}

}  // namespace detail

// Resolve the auto-epsilon estimators against the experiment's (sigma, n, p).
inline SelectorConfig resolved_config(const EstimatorSpec& es, const ExperimentSpec& spec) {
  SelectorConfig cfg = es.config;
  if (es.epsilon_auto) {
    cfg.epsilon = epsilon_rule(cfg.delta, spec.sigma, spec.n, spec.p);
  }
  return cfg;
}

inline TableReport run_monte_carlo(const ExperimentSpec& spec) {
  if (spec.reps < 1) throw std::invalid_argument("run_monte_carlo: reps >= 1");
  if (spec.s > spec.p) throw std::invalid_argument("run_monte_carlo: s > p");
  if (spec.estimators.empty()) {
    throw std::invalid_argument("run_monte_carlo: no estimators configured");
  }

  std::vector<SelectorConfig> configs;
  configs.reserve(spec.estimators.size());
  for (const EstimatorSpec& es : spec.estimators) configs.push_back(resolved_config(es, spec));

  TableReport report;
  report.reps = spec.reps;
  report.rows.resize(spec.estimators.size());
  for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
    report.rows[e].label = spec.estimators[e].label;
  }

  for (std::uint64_t rep = 0; rep < spec.reps; ++rep) {
    const Instance inst = gen_instance(spec, rep);
    std::map<std::string, Estimate> cache;
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      const std::string key = detail::estimator_key(configs[e]);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, detail::base_estimate(configs[e], inst, spec.sigma)).first;
      }
      const Estimate& base = it->second;
      if (base.status != EstimateStatus::ok) {
        ++report.rows[e].infeasible;
        continue;
      }
      const Estimate final = detail::apply_threshold(base, spec.estimators[e].threshold);
      report.rows[e].samples.push_back(metrics(final, inst.theta_star, inst.X));
    }
  }

  for (EstimatorSummary& row : report.rows) {
    row.reps_used = row.samples.size();
    std::vector<double> e1, e2, n1, n2;
    e1.reserve(row.samples.size());
    e2.reserve(row.samples.size());
    n1.reserve(row.samples.size());
    n2.reserve(row.samples.size());
    for (const MetricsRow& r : row.samples) {
      e1.push_back(r.err1);
      e2.push_back(r.err2);
      n1.push_back(r.nb1);
      n2.push_back(r.nb2);
      row.exact += static_cast<std::size_t>(r.exact);
      row.sign_ok += static_cast<std::size_t>(r.sign_ok);
    }
    const detail::Moments m1 = detail::moments(e1);
    const detail::Moments m2 = detail::moments(e2);
    const detail::Moments mn1 = detail::moments(n1);
    const detail::Moments mn2 = detail::moments(n2);
    row.err1 = {m1.mean, m1.sd};
    row.err2 = {m2.mean, m2.sd};
    row.nb1 = {mn1.mean, mn1.sd};
    row.nb2 = {mn2.mean, mn2.sd};
  }
  return report;
}

// Mean retrieved-support size of the first estimator as a function of delta.
// Auto-epsilon entries track the scanned delta through the epsilon rule.
inline std::vector<std::pair<double, double>> elbow_scan(ExperimentSpec spec,
                                                         const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("elbow_scan: empty delta grid");
  if (spec.estimators.empty()) {
    throw std::invalid_argument("elbow_scan: no estimator configured");
  }
  spec.estimators.resize(1);
  spec.estimators[0].threshold = ThresholdRule{};
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid.size());
  for (double delta : grid) {
    spec.estimators[0].config.delta = delta;
    const TableReport rep = run_monte_carlo(spec);
    curve.emplace_back(delta, rep.rows[0].nb1.mean);
  }
  return curve;
}

// Markdown table in the layout of the published experiment tables: one row
// of means per estimator with the standard deviations bracketed beneath,
// and the Exact column as an integer count.
inline std::string table_markdown(const TableReport& report) {
  std::string out;
  out += "| Estimator | Err1 | Err2 | Nb1 | Nb2 | Exact |\n";
  out += "|---|---|---|---|---|---|\n";
  char buf[256];
  for (const EstimatorSummary& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "| %s | %.4f | %.4f | %.2f | %.2f | %zu |\n",
                  row.label.c_str(), row.err1.mean, row.err2.mean, row.nb1.mean,
                  row.nb2.mean, row.exact);
    out += buf;
    std::snprintf(buf, sizeof(buf), "| | (%.4f) | (%.4f) | (%.2f) | (%.2f) | |\n",
                  row.err1.sd, row.err2.sd, row.nb1.sd, row.nb2.sd);
    out += buf;
    if (row.infeasible > 0) {
      std::snprintf(buf, sizeof(buf), "| | infeasible reps: %zu | | | | |\n",
                    row.infeasible);
      out += buf;
    }
  }
  return out;
}

inline std::string elbow_csv(const std::vector<std::pair<double, double>>& curve) {
  std::string out = "delta,mean_nb1\n";
  char buf[80];
  for (const auto& [delta, nb1] : curve) {
    std::snprintf(buf, sizeof(buf), "%g,%g\n", delta, nb1);
    out += buf;
  }
  return out;
}

}  // namespace musel
