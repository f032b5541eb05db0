#include "ambres/optimize.hpp"

#include <cmath>
#include <limits>

namespace ambres {

namespace {

Vector gradient(const std::function<double(const Vector&)>& f, const Vector& x, double rel, int& evals) {
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel * std::max(1.0, std::abs(x(i)));
    y(i) = x(i) + h;
    double fp = f(y);
    y(i) = x(i) - h;
    double fm = f(y);
    y(i) = x(i);
    evals += 2;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      // One-sided difference next to the feasibility boundary.
      const double f0 = f(x);
      ++evals;
      if (std::isfinite(fp)) {
        g(i) = (fp - f0) / h;
      } else if (std::isfinite(fm)) {
        g(i) = (f0 - fm) / h;
      } else {
        g(i) = 0.0;
      }
      continue;
    }
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

BfgsResult bfgs_minimize(const std::function<double(const Vector&)>& f, const Vector& x0, const BfgsOptions& opt) {
  BfgsResult r;
  r.x = x0;
  r.value = f(x0);
  r.evaluations = 1;
  if (!std::isfinite(r.value)) throw Error(ErrorCode::InvalidInput, "starting point is infeasible");
  const Eigen::Index n = x0.size();
  Matrix h = Matrix::Identity(n, n);
  Vector g = gradient(f, r.x, opt.relative_step, r.evaluations);

  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
      r.converged = true;
      break;
    }
    Vector d = -h * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Vector xn;
    double fn = std::numeric_limits<double>::infinity();
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      xn = r.x + step * d;
      fn = f(xn);
      ++r.evaluations;
      if (std::isfinite(fn) && fn <= r.value + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      if (h.isIdentity()) {
        r.converged = true;  // no descent available at this resolution
        break;
      }
      h.setIdentity();
      continue;
    }
    const Vector gn = gradient(f, xn, opt.relative_step, r.evaluations);
    const Vector s = xn - r.x;
    const Vector y = gn - g;
    const double sy = s.dot(y);
    const double drop = r.value - fn;
    r.x = xn;
    g = gn;
    r.value = fn;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix i_n = Matrix::Identity(n, n);
      h = (i_n - rho * s * y.transpose()) * h * (i_n - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (drop <= opt.value_tolerance * std::max(1.0, std::abs(fn))) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

}  // namespace ambres
