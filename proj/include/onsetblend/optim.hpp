#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace onsetblend {
namespace optim {

struct BfgsOptions {
  double grad_tol = 1e-8;  // max-norm of the gradient
  int max_iterations = 500;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_max_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> f_history;  // objective after each accepted step
};

namespace detail {

// Strong-Wolfe line search (bracket + zoom). `eval1d` returns the objective
// and writes the directional derivative.
template <class Eval>
double wolfe_line_search(Eval&& eval1d, double f0, double g0, double c1, double c2) {
  double alpha_prev = 0.0;
  double f_prev = f0;
  double alpha = 1.0;
  double alpha_max = 1e4;

  double lo = 0.0, hi = 0.0, f_lo = f0;
  bool bracketed = false;

  for (int i = 0; i < 30 && !bracketed; ++i) {
    double g = 0.0;
    const double f = eval1d(alpha, g);
    if (f > f0 + c1 * alpha * g0 || (i > 0 && f >= f_prev)) {
      lo = alpha_prev; f_lo = f_prev;
      hi = alpha;
      bracketed = true;
      break;
    }
    if (std::abs(g) <= -c2 * g0) return alpha;
    if (g >= 0.0) {
      lo = alpha; f_lo = f;
      hi = alpha_prev;
      bracketed = true;
      break;
    }
    alpha_prev = alpha; f_prev = f;
    alpha = std::min(2.0 * alpha, alpha_max);
    if (alpha >= alpha_max) return alpha_max;
  }
  if (!bracketed) return alpha;

  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || std::abs(hi - lo) < 1e-16 * (1.0 + std::abs(lo))) break;
    double g = 0.0;
    const double f = eval1d(mid, g);
    if (f > f0 + c1 * mid * g0 || f >= f_lo) {
      hi = mid;
    } else {
      if (std::abs(g) <= -c2 * g0) return mid;
      if (g * (hi - lo) >= 0.0) hi = lo;
      lo = mid; f_lo = f;
    }
  }
  return lo > 0.0 ? lo : 0.0;
}

}  // namespace detail

// Minimizes a smooth function by BFGS with an inverse-Hessian approximation.
// `fg` has signature double(const VectorXd& x, VectorXd& grad).
template <class FG>
BfgsResult minimize_bfgs(FG&& fg, Eigen::VectorXd x0, const BfgsOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);

  Eigen::VectorXd grad(n), grad_new(n), direction(n), x_new(n), s(n), y(n);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  double f = fg(res.x, grad);
  res.f_history.push_back(f);
  bool reset_used = false;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    res.grad_max_norm = grad.template lpNorm<Eigen::Infinity>();
    if (res.grad_max_norm < opts.grad_tol) {
      res.converged = true;
      break;
    }

    direction = -(hinv * grad);
    double dir_deriv = grad.dot(direction);
    if (!(dir_deriv < 0.0)) {
      // Lost descent direction; restart from steepest descent.
      hinv.setIdentity();
      direction = -grad;
      dir_deriv = grad.dot(direction);
    }

    auto eval1d = [&](double alpha, double& dderiv) {
      x_new = res.x + alpha * direction;
      const double fv = fg(x_new, grad_new);
      dderiv = grad_new.dot(direction);
      return fv;
    };
    const double alpha = detail::wolfe_line_search(eval1d, f, dir_deriv, opts.c1, opts.c2);
    double f_new = 0.0;
    bool accepted = false;
    if (alpha > 0.0) {
      double dd = 0.0;
      f_new = eval1d(alpha, dd);
      accepted = f_new <= f;
    }
    if (!accepted) {
      // Objective differences are below float resolution. The full
      // quasi-Newton step still contracts the gradient near the optimum;
      // accept it when it does and the objective does not visibly grow.
      double dd = 0.0;
      f_new = eval1d(1.0, dd);
      accepted = grad_new.template lpNorm<Eigen::Infinity>() < res.grad_max_norm &&
                 f_new <= f + 1e-12 * (1.0 + std::abs(f));
    }
    if (!accepted) {
      if (!reset_used) {
        reset_used = true;
        hinv.setIdentity();
        continue;
      }
      break;  // no further progress possible
    }

    s = x_new - res.x;
    y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (iter == 0) hinv *= sy / y.squaredNorm();  // initial scaling
      const double rho = 1.0 / sy;
      // hinv <- (I - rho s y^T) hinv (I - rho y s^T) + rho s s^T
      const Eigen::VectorXd hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
      hinv.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
    }

    res.x = x_new;
    grad = grad_new;
    f = f_new;
    res.f_history.push_back(f);
    reset_used = false;
  }

  res.f = f;
  res.grad_max_norm = grad.template lpNorm<Eigen::Infinity>();
  if (res.grad_max_norm < opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace optim
}  // namespace onsetblend
