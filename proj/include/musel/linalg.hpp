#pragma once

// Dense vector/matrix kernel. Everything downstream (estimators, verifiers,
// the Monte Carlo driver) reads its numbers through this header. Scale is
// n ~ 100, p ~ 500, so plain row-major storage and naive loops are enough.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace musel {

using Vector = std::vector<double>;

inline void require_finite(const Vector& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t n, std::size_t p, double fill = 0.0)
      : n_(n), p_(p), data_(n * p, fill) {
    if (n == 0 || p == 0) {
      throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
  }

  DenseMatrix(std::size_t n, std::size_t p, Vector entries)
      : n_(n), p_(p), data_(std::move(entries)) {
    if (n == 0 || p == 0) {
      throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
    if (data_.size() != n * p) {
      throw std::invalid_argument("DenseMatrix: entry count does not match shape");
    }
    require_finite(data_, "DenseMatrix");
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * p_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * p_ + j]; }

  const double* row(std::size_t i) const { return data_.data() + i * p_; }
  double* row(std::size_t i) { return data_.data() + i * p_; }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  Vector data_;
};

// Design matrix with normalization metadata: gram_diag_unit means every
// diagonal entry of X'X/n is 1 within 1e-9.
struct DesignMatrix {
  DenseMatrix matrix;
  bool centered = false;
  bool gram_diag_unit = false;
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

enum class NormKind { l1, l2, linf, lq };

// q is read only for NormKind::lq and must lie in (1, 2].
inline double norm(const Vector& v, NormKind kind, double q = 2.0) {
  if (v.empty()) throw std::invalid_argument("norm: empty vector");
  require_finite(v, "norm");
  double s = 0.0;
  switch (kind) {
    case NormKind::l1:
      for (double x : v) s += std::fabs(x);
      return s;
    case NormKind::l2:
      for (double x : v) s += x * x;
      return std::sqrt(s);
    case NormKind::linf:
      for (double x : v) s = std::max(s, std::fabs(x));
      return s;
    case NormKind::lq:
      if (!(q > 1.0) || !(q <= 2.0)) {
        throw std::invalid_argument("norm: q must lie in (1, 2]");
      }
      for (double x : v) s += std::pow(std::fabs(x), q);
      return std::pow(s, 1.0 / q);
  }
  throw std::logic_error("norm: unreachable");
}

inline double norm_l1(const Vector& v) { return norm(v, NormKind::l1); }
inline double norm_l2(const Vector& v) { return norm(v, NormKind::l2); }
inline double norm_linf(const Vector& v) { return norm(v, NormKind::linf); }

// A x for A n-by-p, x length p.
inline Vector matvec(const DenseMatrix& A, const Vector& x) {
  if (x.size() != A.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector out(A.rows(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* r = A.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return out;
}

// A' x for A n-by-p, x length n.
inline Vector tmatvec(const DenseMatrix& A, const Vector& x) {
  if (x.size() != A.rows()) throw std::invalid_argument("tmatvec: dimension mismatch");
  Vector out(A.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* r = A.row(i);
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < A.cols(); ++j) out[j] += r[j] * xi;
  }
  return out;
}

// X'X/n, accumulated row by row over the upper triangle then mirrored.
inline DenseMatrix gram(const DenseMatrix& X) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  DenseMatrix G(p, p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = X.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double rj = r[j];
      if (rj == 0.0) continue;
      double* g = G.row(j);
      for (std::size_t k = j; k < p; ++k) g[k] += rj * r[k];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j; k < p; ++k) {
      const double v = G(j, k) * inv_n;
      G(j, k) = v;
      G(k, j) = v;
    }
  }
  return G;
}

inline DenseMatrix gram(const DesignMatrix& X) { return gram(X.matrix); }

// |(1/n) Z'(y - Z theta)|_inf, the residual correlation the selector
// constraints and the feasibility checks are built from.
inline double residual_corr(const DenseMatrix& Z, const Vector& y, const Vector& theta) {
  if (y.size() != Z.rows() || theta.size() != Z.cols()) {
    throw std::invalid_argument("residual_corr: dimension mismatch");
  }
  Vector r = matvec(Z, theta);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  Vector c = tmatvec(Z, r);
  double m = 0.0;
  for (double v : c) m = std::max(m, std::fabs(v));
  return m / static_cast<double>(Z.rows());
}

// Center each column, then scale it so its squared l2 norm equals n,
// i.e. diag(X'X/n) = 1. Constant columns cannot be normalized.
inline DesignMatrix normalize_design(const DenseMatrix& raw) {
  const std::size_t n = raw.rows();
  const std::size_t p = raw.cols();
  if (n < 2) throw std::invalid_argument("normalize_design: need at least 2 rows");
  DenseMatrix out = raw;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += out(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = out(i, j) - mean;
      out(i, j) = c;
      ss += c * c;
    }
    if (ss <= 0.0) {
      throw std::invalid_argument("normalize_design: column " + std::to_string(j) +
                                  " is constant (zero variance)");
    }
    const double scale = std::sqrt(static_cast<double>(n) / ss);
    for (std::size_t i = 0; i < n; ++i) out(i, j) *= scale;
  }
  return DesignMatrix{std::move(out), true, true};
}

// Solve A x = b for symmetric positive definite A via Cholesky.
// Returns false (and leaves x untouched) if a pivot falls below tol.
inline bool cholesky_solve(const DenseMatrix& A, const Vector& b, Vector& x,
                           double tol = 1e-12) {
  const std::size_t m = A.rows();
  if (A.cols() != m || b.size() != m) {
    throw std::invalid_argument("cholesky_solve: dimension mismatch");
  }
  DenseMatrix L(m, m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s < tol) return false;
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  Vector z(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * z[k];
    z[i] = s / L(i, i);
  }
  x.assign(m, 0.0);
  for (std::size_t ii = m; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < m; ++k) s -= L(k, ii) * x[k];
    x[ii] = s / L(ii, ii);
  }
  return true;
}

}  // namespace musel
