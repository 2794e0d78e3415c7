#pragma once

// Observed data (y, Z) plus optional ground truth carried along by the
// simulation generators so verifiers and metrics can see X, theta*, xi, Xi.

#include <cstdint>
#include <string>

#include "musel/linalg.hpp"

namespace musel {

struct Instance {
  Vector y;
  DenseMatrix Z;

  bool has_truth = false;
  DenseMatrix X;      // uncorrupted design
  Vector theta_star;  // true coefficient vector
  Vector xi;          // additive noise in y
  DenseMatrix Xi;     // design perturbation, Z = X + Xi

  // bookkeeping for reports; n and p live in Z itself
  std::size_t s = 0;
  double sigma = 0.0;
  std::string model;
  std::uint64_t seed = 0;
};

}  // namespace musel
