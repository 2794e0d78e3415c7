#pragma once

// Homotopy (LARS-with-drops) path for
//
//     min_theta (1/n) |y - Z theta|_2^2 + lambda |theta|_1
//
// from lambda_max = 2 |Z'y/n|_inf down to 0 or until n variables are active,
// plus the Mallows Cp knot choice. The piecewise-linear path solves, on each
// segment, theta_A(lambda) = G_AA^{-1} (b_A - (lambda/2) s_A) with
// G = Z'Z/n, b = Z'y/n and s_A the active sign vector; knots are where a
// correlation catches up (join) or a coefficient hits zero (drop).

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "musel/linalg.hpp"
#include "musel/selectors.hpp"

namespace musel {

struct LassoKnot {
  double lambda = 0.0;
  Vector theta;
  std::size_t df = 0;  // nonzero coefficients at this knot
  double rss = 0.0;    // |y - Z theta|_2^2, kept so Cp needs no data access
};

struct LassoPath {
  std::vector<LassoKnot> knots;
  bool truncated = false;  // stopped early on a singular active set
};

namespace detail {

inline double rss_of(const DenseMatrix& Z, const Vector& y, const Vector& theta) {
  Vector r = matvec(Z, theta);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - r[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

inline LassoPath lasso_path(const DenseMatrix& Z, const Vector& y) {
  const std::size_t n = Z.rows();
  const std::size_t p = Z.cols();
  if (y.size() != n) throw std::invalid_argument("lasso_path: y length mismatch");

  const DenseMatrix G = gram(Z);
  Vector b = tmatvec(Z, y);
  for (double& v : b) v /= static_cast<double>(n);

  // Warn once per process: feeding an unnormalized (e.g. censored) design is
  // a legitimate use, but lambda is then not comparable across columns.
  static bool warned = false;
  for (std::size_t j = 0; j < p && !warned; ++j) {
    if (std::fabs(G(j, j) - 1.0) > 1e-6) {
      warned = true;
      std::fprintf(stderr,
                   "lasso_path: design is not normalized (diag of Z'Z/n != 1); "
                   "the path is still exact but lambda is not comparable across columns\n");
    }
  }

  LassoPath path;
  double lambda = 0.0;
  std::size_t first = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (2.0 * std::fabs(b[j]) > lambda) {
      lambda = 2.0 * std::fabs(b[j]);
      first = j;
    }
  }
  path.knots.push_back({lambda, Vector(p, 0.0), 0, dot(y, y)});
  if (lambda <= 1e-14) return path;  // y is orthogonal to every column

  std::vector<std::size_t> active{first};
  Vector sign{b[first] > 0.0 ? 1.0 : -1.0};
  std::vector<bool> banned(p, false);

  auto record = [&](double lam, const Vector& theta_full) {
    std::size_t df = 0;
    for (double v : theta_full) {
      if (std::fabs(v) > 1e-12) ++df;
    }
    path.knots.push_back({lam, theta_full, df, detail::rss_of(Z, y, theta_full)});
  };

  while (true) {
    const std::size_t k = active.size();

    // Segment geometry: theta_A(lam) = t0 - (lam/2) d.
    DenseMatrix Gaa(k, k);
    Vector ba(k), sa(k);
    for (std::size_t i = 0; i < k; ++i) {
      ba[i] = b[active[i]];
      sa[i] = sign[i];
      for (std::size_t j2 = 0; j2 < k; ++j2) Gaa(i, j2) = G(active[i], active[j2]);
    }
    Vector t0, d;
    if (!cholesky_solve(Gaa, ba, t0) || !cholesky_solve(Gaa, sa, d)) {
      if (k >= 2) {
        // Degenerate active set: retire the newest member and try again.
        banned[active.back()] = true;
        active.pop_back();
        sign.pop_back();
        continue;
      }
      path.truncated = true;
      return path;
    }

    // Correlations off the active set are affine too: c_j(lam) = e_j + lam f_j.
    const double lam_eps = 1e-10 * std::max(1.0, lambda);
    double next = 0.0;
    int event = 0;  // 0 = reach lambda=0, 1 = join, 2 = drop
    std::size_t who = 0;
    double who_sign = 0.0;

    for (std::size_t j = 0; j < p; ++j) {
      if (banned[j]) continue;
      bool is_active = false;
      for (std::size_t a : active) {
        if (a == j) {
          is_active = true;
          break;
        }
      }
      if (is_active) continue;
      double gt0 = 0.0, gd = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        gt0 += G(j, active[i]) * t0[i];
        gd += G(j, active[i]) * d[i];
      }
      const double e = 2.0 * (b[j] - gt0);
      const double f = gd;
      for (double s : {1.0, -1.0}) {
        const double denom = s - f;
        if (std::fabs(denom) < 1e-14) continue;
        const double cand = e / denom;
        if (cand > next && cand < lambda - lam_eps) {
          next = cand;
          event = 1;
          who = j;
          who_sign = s;
        }
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (std::fabs(d[i]) < 1e-14) continue;
      const double cand = 2.0 * t0[i] / d[i];
      if (cand > next && cand < lambda - lam_eps) {
        next = cand;
        event = 2;
        who = i;
      }
    }

    Vector theta_full(p, 0.0);
    for (std::size_t i = 0; i < k; ++i) theta_full[active[i]] = t0[i] - 0.5 * next * d[i];
    record(next, theta_full);
    lambda = next;

    if (event == 0) return path;
    if (event == 1) {
      active.push_back(who);
      sign.push_back(who_sign);
      if (active.size() >= n) return path;  // saturated design
    } else {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(who));
      sign.erase(sign.begin() + static_cast<std::ptrdiff_t>(who));
      if (active.empty()) return path;
    }
  }
}

// Cp = RSS/sigma^2 - n + 2 df, minimized over knots; ties go to the sparser
// model (and to the larger lambda among equal df).
inline Estimate lasso_cp(const LassoPath& path, double sigma, std::size_t n) {
  if (path.knots.empty()) throw std::invalid_argument("lasso_cp: empty path");
  if (!(sigma > 0.0)) throw std::invalid_argument("lasso_cp: sigma must be > 0");
  const double s2 = sigma * sigma;
  std::size_t best = 0;
  double best_cp = 0.0;
  for (std::size_t i = 0; i < path.knots.size(); ++i) {
    const LassoKnot& kn = path.knots[i];
    const double cp = kn.rss / s2 - static_cast<double>(n) + 2.0 * static_cast<double>(kn.df);
    const bool better =
        i == 0 || cp < best_cp - 1e-9 ||
        (cp <= best_cp + 1e-9 && kn.df < path.knots[best].df);
    if (better) {
      best = i;
      best_cp = cp;
    }
  }
  const LassoKnot& kn = path.knots[best];
  Estimate est;
  est.status = EstimateStatus::ok;
  est.variant = Variant::Lasso;
  est.lambda = kn.lambda;
  est.theta_hat = kn.theta;
  est.l1_norm = norm_l1(kn.theta);
  est.support = support(kn.theta);
  est.objective_gap = 0.0;
  return est;
}

// Plug-in noise estimate for real data: least squares on the selected support,
// sigma^2 = RSS / (n - df). Falls back to RSS / n when the fit is saturated.
inline double sigma_plugin(const DenseMatrix& Z, const Vector& y,
                           const std::vector<std::size_t>& supp) {
  const std::size_t n = Z.rows();
  const std::size_t k = supp.size();
  Vector theta(Z.cols(), 0.0);
  if (k > 0) {
    DenseMatrix Gaa(k, k);
    Vector ba(k);
    const DenseMatrix G = gram(Z);
    Vector b = tmatvec(Z, y);
    for (double& v : b) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < k; ++i) {
      ba[i] = b[supp[i]];
      for (std::size_t j = 0; j < k; ++j) Gaa(i, j) = G(supp[i], supp[j]);
    }
    Vector beta;
    if (cholesky_solve(Gaa, ba, beta)) {
      for (std::size_t i = 0; i < k; ++i) theta[supp[i]] = beta[i];
    }
  }
  const double rss = detail::rss_of(Z, y, theta);
  const double dof = (n > k) ? static_cast<double>(n - k) : static_cast<double>(n);
  return std::sqrt(rss / dof);
}

}  // namespace musel
