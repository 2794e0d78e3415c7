#pragma once

// Dense linear programming. solve_lp is a two-phase primal simplex on a full
// tableau; build_l1_lp translates each l1 estimator into an LP through the
// split theta = u - v with u, v >= 0, so that |theta|_1 <= sum(u + v) with
// equality whenever the solver has no incentive to pad both sides.
//
// The solver is deliberately boring: Dantzig pricing (most negative reduced
// cost, lowest index on ties) for speed, with a permanent switch to Bland's
// rule after a long degenerate stall so termination is guaranteed. Problems
// here top out around 1500 rows by 3000 columns, well inside dense-tableau
// territory.

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "musel/linalg.hpp"
#include "musel/selector_config.hpp"

namespace musel {

enum class Relation { le, eq, ge };

struct LpConstraint {
  Vector a;
  Relation rel = Relation::le;
  double rhs = 0.0;
};

struct LpProblem {
  Vector c;                        // minimize c'x
  std::vector<LpConstraint> rows;
  Vector lower;                    // per variable: 0 or -inf
  Vector upper;                    // per variable: +inf or a finite bound

  LpProblem() = default;
  explicit LpProblem(std::size_t nvars)
      : c(nvars, 0.0),
        lower(nvars, 0.0),
        upper(nvars, std::numeric_limits<double>::infinity()) {}

  std::size_t nvars() const { return c.size(); }

  void add_row(Vector a, Relation rel, double rhs) {
    if (a.size() != nvars()) throw std::invalid_argument("LpProblem: row length mismatch");
    if (!std::isfinite(rhs)) throw std::invalid_argument("LpProblem: rhs must be finite");
    rows.push_back(LpConstraint{std::move(a), rel, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

struct LpOptions {
  std::size_t max_pivots = 1000000;
  double pivot_tol = 1e-10;
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
};

// Largest violation of any constraint or variable bound at x.
inline double max_violation(const LpProblem& p, const Vector& x) {
  double worst = 0.0;
  for (const LpConstraint& r : p.rows) {
    const double s = dot(r.a, x);
    double v = 0.0;
    switch (r.rel) {
      case Relation::le: v = s - r.rhs; break;
      case Relation::eq: v = std::fabs(s - r.rhs); break;
      case Relation::ge: v = r.rhs - s; break;
    }
    worst = std::max(worst, v);
  }
  for (std::size_t j = 0; j < p.nvars(); ++j) {
    worst = std::max(worst, p.lower[j] - x[j]);
    if (std::isfinite(p.upper[j])) worst = std::max(worst, x[j] - p.upper[j]);
  }
  return worst;
}

namespace detail {

class SimplexTableau {
 public:
  SimplexTableau(const LpProblem& p, const LpOptions& opt) : opt_(opt) {
    const std::size_t nv = p.nvars();
    const double inf = std::numeric_limits<double>::infinity();

    pos_col_.resize(nv);
    neg_col_.assign(nv, npos);
    for (std::size_t j = 0; j < nv; ++j) {
      if (p.lower[j] != 0.0 && p.lower[j] != -inf) {
        throw std::invalid_argument("solve_lp: lower bounds must be 0 or -inf");
      }
      pos_col_[j] = j;
    }
    ns_ = nv;
    for (std::size_t j = 0; j < nv; ++j) {
      if (p.lower[j] == -inf) neg_col_[j] = ns_++;
    }

    // Upper bounds become plain rows; they are rare in this codebase.
    std::vector<LpConstraint> rows = p.rows;
    for (std::size_t j = 0; j < nv; ++j) {
      if (std::isfinite(p.upper[j])) {
        Vector a(nv, 0.0);
        a[j] = 1.0;
        rows.push_back(LpConstraint{std::move(a), Relation::le, p.upper[j]});
      }
    }

    m_ = rows.size();
    std::size_t n_slack = 0;
    for (const LpConstraint& r : rows) {
      if (r.rel != Relation::eq) ++n_slack;
    }

    // Orient every equality-form row to a nonnegative rhs, then decide which
    // rows get a ready-made basic column (slack with +1 after orientation)
    // and which need an artificial.
    struct RowPlan {
      double sign;
      std::size_t slack = npos;
      bool slack_basic = false;
    };
    std::vector<RowPlan> plan(m_);
    std::size_t next_slack = ns_;
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const LpConstraint& r = rows[i];
      double slack_coef = 0.0;
      if (r.rel == Relation::le) slack_coef = 1.0;
      if (r.rel == Relation::ge) slack_coef = -1.0;
      const double sign =
          (r.rhs < 0.0 || (r.rhs == 0.0 && r.rel == Relation::ge)) ? -1.0 : 1.0;
      plan[i].sign = sign;
      if (r.rel != Relation::eq) {
        plan[i].slack = next_slack++;
        plan[i].slack_basic = (sign * slack_coef > 0.0);
      }
      if (r.rel == Relation::eq || !plan[i].slack_basic) ++n_art;
    }

    art_begin_ = ns_ + n_slack;
    ncols_ = art_begin_ + n_art;
    width_ = ncols_ + 1;  // rhs lives in the last column
    tab_.assign(m_ * width_, 0.0);
    basis_.assign(m_, npos);

    std::size_t next_art = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      const LpConstraint& r = rows[i];
      double* row = tab_.data() + i * width_;
      const double sign = plan[i].sign;
      for (std::size_t j = 0; j < nv; ++j) {
        const double a = sign * r.a[j];
        if (a == 0.0) continue;
        row[pos_col_[j]] += a;
        if (neg_col_[j] != npos) row[neg_col_[j]] -= a;
      }
      if (plan[i].slack != npos) {
        row[plan[i].slack] = sign * ((r.rel == Relation::le) ? 1.0 : -1.0);
      }
      row[ncols_] = sign * r.rhs;
      if (plan[i].slack_basic) {
        basis_[i] = plan[i].slack;
      } else {
        const std::size_t a_col = next_art++;
        row[a_col] = 1.0;
        basis_[i] = a_col;
      }
    }

    // Split objective over the structural columns.
    cost_.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < nv; ++j) {
      cost_[pos_col_[j]] = p.c[j];
      if (neg_col_[j] != npos) cost_[neg_col_[j]] = -p.c[j];
    }
  }

  LpSolution run(const LpProblem& p) {
    LpSolution sol;

    // Phase 1: minimize the sum of artificials.
    if (art_begin_ < ncols_) {
      Vector d(width_, 0.0);
      for (std::size_t j = art_begin_; j < ncols_; ++j) d[j] = 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (basis_[i] >= art_begin_) {
          const double* row = tab_.data() + i * width_;
          for (std::size_t j = 0; j < width_; ++j) d[j] -= row[j];
        }
      }
      const bool ok = pivot_until_optimal(d, sol.iterations);
      if (!ok) throw std::runtime_error("solve_lp: phase 1 cannot be unbounded");
      const double infeas = -d[ncols_];
      const double scale = std::max(1.0, rhs_scale());
      if (infeas > 1e-7 * scale) {
        sol.status = LpStatus::infeasible;
        return sol;
      }
      drive_out_artificials();
    }

    // Phase 2: reduced costs of the real objective under the current basis.
    Vector d(width_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) d[j] = cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = tab_.data() + i * width_;
      for (std::size_t j = 0; j < width_; ++j) d[j] -= cb * row[j];
    }
    const bool bounded = pivot_until_optimal(d, sol.iterations);
    if (!bounded) {
      sol.status = LpStatus::unbounded;
      return sol;
    }

    sol.status = LpStatus::optimal;
    sol.x.assign(p.nvars(), 0.0);
    Vector structural(ns_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < ns_) structural[basis_[i]] = tab_[i * width_ + ncols_];
    }
    for (std::size_t j = 0; j < p.nvars(); ++j) {
      sol.x[j] = structural[pos_col_[j]];
      if (neg_col_[j] != npos) sol.x[j] -= structural[neg_col_[j]];
    }
    sol.objective_value = dot(p.c, sol.x);
    return sol;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double rhs_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s = std::max(s, std::fabs(tab_[i * width_ + ncols_]));
    return s;
  }

  // Core loop. d is the reduced-cost row (d[ncols_] = -objective). Returns
  // false when the entering column proves the problem unbounded. Artificial
  // columns never enter: they start basic in phase 1 and only leave.
  bool pivot_until_optimal(Vector& d, std::size_t& iterations) {
    const std::size_t limit_col = art_begin_;
    bool bland = false;
    std::size_t stall = 0;
    double last_obj = -d[ncols_];

    for (;;) {
      // Entering column.
      std::size_t s = npos;
      if (bland) {
        for (std::size_t j = 0; j < limit_col; ++j) {
          if (d[j] < -opt_.opt_tol) {
            s = j;
            break;
          }
        }
      } else {
        double best = -opt_.opt_tol;
        for (std::size_t j = 0; j < limit_col; ++j) {
          if (d[j] < best) {
            best = d[j];
            s = j;
          }
        }
      }
      if (s == npos) return true;  // optimal for this phase

      // Ratio test over rows with a usable positive pivot.
      std::size_t r = npos;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double piv = tab_[i * width_ + s];
        if (piv <= opt_.pivot_tol) continue;
        const double rhs = std::max(tab_[i * width_ + ncols_], 0.0);
        const double ratio = rhs / piv;
        bool take = false;
        if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12) {
          // Tie: Bland wants the lowest basic index; otherwise prefer the
          // numerically strongest pivot.
          if (bland) {
            take = (r == npos) || basis_[i] < basis_[r];
          } else {
            take = piv > best_pivot;
          }
        }
        if (take) {
          r = i;
          best_ratio = ratio;
          best_pivot = piv;
        }
      }
      if (r == npos) return false;  // unbounded in direction s

      pivot(r, s, d);
      if (++iterations > opt_.max_pivots) {
        throw std::runtime_error("solve_lp: pivot cap exceeded (" +
                                 std::to_string(opt_.max_pivots) + ")");
      }

      const double obj = -d[ncols_];
      if (obj < last_obj - 1e-13) {
        last_obj = obj;
        stall = 0;
      } else if (!bland && ++stall > 300) {
        bland = true;  // degenerate stall: fall back to Bland for termination
      }
    }
  }

  void pivot(std::size_t r, std::size_t s, Vector& d) {
    double* prow = tab_.data() + r * width_;
    const double inv = 1.0 / prow[s];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[s] = 1.0;

    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = tab_.data() + i * width_;
      const double f = row[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[s] = 0.0;
    }
    const double fd = d[s];
    if (fd != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) d[j] -= fd * prow[j];
      d[s] = 0.0;
    }
    basis_[r] = s;
  }

  // After phase 1, pivot any artificial still sitting in the basis out on a
  // real column; rows that offer none are redundant and dropped.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < art_begin_) {
        ++i;
        continue;
      }
      double* row = tab_.data() + i * width_;
      std::size_t s = npos;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::fabs(row[j]) > opt_.pivot_tol) {
          s = j;
          break;
        }
      }
      if (s != npos) {
        Vector dummy(width_, 0.0);
        pivot(i, s, dummy);
        ++i;
      } else {
        // Redundant row: swap with the last row and shrink.
        const std::size_t last = m_ - 1;
        if (i != last) {
          for (std::size_t j = 0; j < width_; ++j) std::swap(row[j], tab_[last * width_ + j]);
          basis_[i] = basis_[last];
        }
        --m_;
        tab_.resize(m_ * width_);
        basis_.resize(m_);
      }
    }
  }

  LpOptions opt_;
  std::size_t m_ = 0;       // active rows
  std::size_t ns_ = 0;      // structural columns (after free-variable split)
  std::size_t art_begin_ = 0;
  std::size_t ncols_ = 0;
  std::size_t width_ = 0;   // ncols_ + 1, rhs in the last slot
  std::vector<double> tab_;
  std::vector<std::size_t> basis_;
  Vector cost_;
  std::vector<std::size_t> pos_col_, neg_col_;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p, const LpOptions& opt = {}) {
  if (p.nvars() == 0) throw std::invalid_argument("solve_lp: no variables");
  for (const LpConstraint& r : p.rows) {
    if (r.a.size() != p.nvars()) throw std::invalid_argument("solve_lp: row length mismatch");
  }
  detail::SimplexTableau tableau(p, opt);
  return tableau.run(p);
}

// LP encoding of min{|theta|_1 : theta in Theta, constraint(theta)} where the
// constraint is |y - Z theta|_inf <= delta |theta|_1 for MU1 and
// |(1/n) Z'(y - Z theta)|_inf <= lambda |theta|_1 + epsilon for MU2/Dantzig.
// Variables are u then v (theta = u - v); |theta|_1 is represented by
// sum(u + v) both in the objective and inside the constraint rows.
inline LpProblem build_l1_lp(const DenseMatrix& Z, const Vector& y, const SelectorConfig& cfg) {
  if (y.size() != Z.rows()) throw std::invalid_argument("build_l1_lp: y length mismatch");
  const std::size_t n = Z.rows();
  const std::size_t p = Z.cols();

  LpProblem lp(2 * p);
  for (std::size_t j = 0; j < 2 * p; ++j) lp.c[j] = 1.0;

  if (cfg.variant == Variant::MU1) {
    const double delta = cfg.delta;
    // |y_i - (Z theta)_i| <= delta sum(u+v), two rows per observation.
    for (std::size_t i = 0; i < n; ++i) {
      const double* zr = Z.row(i);
      Vector hi(2 * p), lo(2 * p);
      for (std::size_t j = 0; j < p; ++j) {
        hi[j] = zr[j] - delta;
        hi[p + j] = -zr[j] - delta;
        lo[j] = -zr[j] - delta;
        lo[p + j] = zr[j] - delta;
      }
      lp.add_row(std::move(hi), Relation::le, y[i]);
      lp.add_row(std::move(lo), Relation::le, -y[i]);
    }
  } else if (cfg.variant == Variant::MU2 || cfg.variant == Variant::Dantzig) {
    const double lambda = (cfg.variant == Variant::Dantzig) ? 0.0 : cfg.lambda();
    const double eps = cfg.epsilon;
    const DenseMatrix G = gram(Z);
    Vector b = tmatvec(Z, y);
    for (double& v : b) v /= static_cast<double>(n);
    // |b_j - (G theta)_j| <= lambda sum(u+v) + epsilon, two rows per column.
    for (std::size_t j = 0; j < p; ++j) {
      const double* gr = G.row(j);
      Vector hi(2 * p), lo(2 * p);
      for (std::size_t k = 0; k < p; ++k) {
        hi[k] = gr[k] - lambda;
        hi[p + k] = -gr[k] - lambda;
        lo[k] = -gr[k] - lambda;
        lo[p + k] = gr[k] - lambda;
      }
      lp.add_row(std::move(hi), Relation::le, eps + b[j]);
      lp.add_row(std::move(lo), Relation::le, eps - b[j]);
    }
  } else {
    throw std::invalid_argument("build_l1_lp: variant must be MU1, MU2 or Dantzig");
  }

  // Feasible set Theta, one block each.
  switch (cfg.theta_set.kind) {
    case FeasibleSet::Kind::all:
      break;
    case FeasibleSet::Kind::nonneg: {
      for (std::size_t j = 0; j < p; ++j) {
        Vector a(2 * p, 0.0);
        a[j] = 1.0;
        a[p + j] = -1.0;
        lp.add_row(std::move(a), Relation::ge, 0.0);
      }
      break;
    }
    case FeasibleSet::Kind::l1ball: {
      Vector a(2 * p, 1.0);
      lp.add_row(std::move(a), Relation::le, cfg.theta_set.a);
      break;
    }
    case FeasibleSet::Kind::simplex: {
      Vector a(2 * p, 1.0);
      for (std::size_t j = 0; j < p; ++j) a[p + j] = -1.0;
      lp.add_row(std::move(a), Relation::eq, 1.0);
      if (cfg.theta_set.simplex_nonneg) {
        for (std::size_t j = 0; j < p; ++j) {
          Vector r(2 * p, 0.0);
          r[j] = 1.0;
          r[p + j] = -1.0;
          lp.add_row(std::move(r), Relation::ge, 0.0);
        }
      }
      break;
    }
  }
  return lp;
}

// Plain-text dump for external cross-checking: objective line, then one
// constraint per line, then any nontrivial variable bounds.
inline std::string dump_lp(const LpProblem& p) {
  std::ostringstream out;
  out.precision(17);
  out << "min";
  for (double c : p.c) out << ' ' << c;
  out << '\n';
  for (const LpConstraint& r : p.rows) {
    for (std::size_t j = 0; j < r.a.size(); ++j) {
      if (j) out << ' ';
      out << r.a[j];
    }
    const char* rel = r.rel == Relation::le ? "<=" : (r.rel == Relation::eq ? "=" : ">=");
    out << ' ' << rel << ' ' << r.rhs << '\n';
  }
  for (std::size_t j = 0; j < p.nvars(); ++j) {
    if (p.lower[j] != 0.0) out << "free x" << j << '\n';
    if (std::isfinite(p.upper[j])) out << "x" << j << " <= " << p.upper[j] << '\n';
  }
  return out.str();
}

}  // namespace musel
