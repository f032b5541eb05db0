#pragma once

#include <functional>

#include "ambres/lattice.hpp"

namespace ambres {

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-7;
  double relative_step = 1e-5;  // central-difference step, relative to |x_i|
  double value_tolerance = 1e-12;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Quasi-Newton minimization with finite-difference gradients and Armijo
// backtracking. The objective may return +inf to mark infeasible points.
BfgsResult bfgs_minimize(const std::function<double(const Vector&)>& f, const Vector& x0,
                         const BfgsOptions& opt = {});

}  // namespace ambres
