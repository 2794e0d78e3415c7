#pragma once

// Configuration types shared by the LP builders and the selector front ends:
// which estimator variant, the uncertainty levels (delta, epsilon), how the
// MU-selector II factor lambda is chosen, and the feasible set Theta.

#include <stdexcept>

namespace musel {

struct FeasibleSet {
  enum class Kind { all, nonneg, l1ball, simplex };

  Kind kind = Kind::all;
  double a = 0.0;              // l1 ball radius, only for Kind::l1ball
  bool simplex_nonneg = false; // simplex with or without theta >= 0

  static FeasibleSet all() { return {}; }

  static FeasibleSet nonneg() {
    FeasibleSet s;
    s.kind = Kind::nonneg;
    return s;
  }

  static FeasibleSet l1ball(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("FeasibleSet: l1 ball radius must be > 0");
    FeasibleSet s;
    s.kind = Kind::l1ball;
    s.a = a;
    return s;
  }

  static FeasibleSet simplex(bool nonneg = false) {
    FeasibleSet s;
    s.kind = Kind::simplex;
    s.simplex_nonneg = nonneg;
    return s;
  }
};

enum class Variant { MU1, MU2, Dantzig, Lasso };

struct SelectorConfig {
  Variant variant = Variant::MU2;
  double delta = 0.0;
  double epsilon = 0.0;
  bool lambda_is_explicit = false; // default rule: lambda = (1+delta)*delta
  double lambda_explicit = 0.0;
  FeasibleSet theta_set;

  double lambda() const {
    if (lambda_is_explicit) return lambda_explicit;
    return (1.0 + delta) * delta;
  }
};

}  // namespace musel
