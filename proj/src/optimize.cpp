#include "hetcal/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace hetcal {

namespace {

VectorXd clamp_box(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Inf-norm of the projected gradient x - clamp(x - g): zero exactly at a
// box-constrained stationary point.
double projected_grad_norm(const VectorXd& x, const VectorXd& g,
                           const VectorXd& lo, const VectorXd& hi) {
  return (x - clamp_box(x - g, lo, hi)).cwiseAbs().maxCoeff();
}

}  // namespace

OptimResult minimize_box(const ObjectiveFn& fn, const VectorXd& x0,
                         const VectorXd& lo, const VectorXd& hi,
                         const OptimOptions& opts) {
  const int dim = static_cast<int>(x0.size());
  if (lo.size() != dim || hi.size() != dim)
    throw ConfigError("minimize_box: bound sizes do not match x0");
  for (int i = 0; i < dim; ++i)
    if (!(lo[i] <= hi[i]))
      throw ConfigError("minimize_box: lo > hi in coordinate " +
                        std::to_string(i + 1));

  OptimResult res;
  res.x = clamp_box(x0, lo, hi);
  res.grad.resize(dim);
  res.value = fn(res.x, &res.grad);
  res.evals = 1;
  if (!std::isfinite(res.value)) {
    res.status = "bad_start";
    return res;
  }

  std::deque<std::pair<VectorXd, VectorXd>> mem;  // (s, y) pairs
  double gamma = 1.0;  // initial Hessian scale s'y / y'y
  int flat_count = 0;

  for (res.iters = 0; res.iters < opts.max_iter; ++res.iters) {
    res.pg_norm = projected_grad_norm(res.x, res.grad, lo, hi);
    if (res.pg_norm < opts.gtol) {
      res.converged = true;
      res.status = "gtol";
      return res;
    }

    // Free-set mask: bound-active coordinates whose gradient pushes outward
    // take no part in the quasi-Newton direction this iteration.
    VectorXd gm = res.grad;
    for (int i = 0; i < dim; ++i) {
      const bool at_lo = res.x[i] <= lo[i] && res.grad[i] > 0.0;
      const bool at_hi = res.x[i] >= hi[i] && res.grad[i] < 0.0;
      if (at_lo || at_hi) gm[i] = 0.0;
    }

    // Two-loop recursion on the masked gradient.
    VectorXd d = -gm;
    std::vector<double> rho(mem.size()), a(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      rho[k] = 1.0 / mem[k].first.dot(mem[k].second);
      a[k] = rho[k] * mem[k].first.dot(d);
      d -= a[k] * mem[k].second;
    }
    d *= gamma;
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double b = rho[k] * mem[k].second.dot(d);
      d += (a[k] - b) * mem[k].first;
    }
    for (int i = 0; i < dim; ++i)
      if (gm[i] == 0.0) d[i] = 0.0;
    if (d.dot(gm) >= 0.0) d = -gm;  // not a descent direction: reset
    if (d.cwiseAbs().maxCoeff() == 0.0) {
      res.converged = true;
      res.status = "step_tol";
      return res;
    }

    // Backtracking Armijo search along the projected path.  The projection
    // bends the path, so the slope term uses the realized move x_t - x.
    double t = 1.0;
    const double d_norm = d.cwiseAbs().maxCoeff();
    if (opts.max_step > 0.0 && d_norm > opts.max_step)
      t = opts.max_step / d_norm;
    double f_new = std::numeric_limits<double>::infinity();
    VectorXd x_new;
    bool accepted = false;
    for (int trial = 0; trial < opts.max_line_trials; ++trial, t *= 0.5) {
      x_new = clamp_box(res.x + t * d, lo, hi);
      const VectorXd move = x_new - res.x;
      const double move_norm = move.cwiseAbs().maxCoeff();
      if (move_norm < opts.step_tol) break;
      const double slope = res.grad.dot(move);
      if (slope >= 0.0) continue;  // projection turned the move uphill
      f_new = fn(x_new, nullptr);
      ++res.evals;
      if (std::isfinite(f_new) && f_new <= res.value + opts.c1 * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // A failed search from a steepest-descent direction means the local
      // model is exhausted; from a quasi-Newton direction, drop the memory
      // and retry once with plain gradient descent.
      if (!mem.empty()) {
        mem.clear();
        gamma = 1.0;
        continue;
      }
      res.converged = res.pg_norm < 1e3 * opts.gtol;
      res.status = res.converged ? "step_tol" : "line_search";
      return res;
    }

    VectorXd g_new(dim);
    const double f_check = fn(x_new, &g_new);
    ++res.evals;
    // Use the gradient-bearing evaluation's value; it matches f_new up to
    // round-off but keeps value/gradient consistent for the update below.
    const VectorXd s = x_new - res.x;
    const VectorXd y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      mem.emplace_back(s, y);
      if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
      gamma = sy / y.dot(y);
    }

    const double decrease = res.value - f_check;
    res.x = x_new;
    res.value = f_check;
    res.grad = g_new;

    if (decrease <= opts.ftol * (1.0 + std::abs(res.value))) {
      if (++flat_count >= 2) {
        res.pg_norm = projected_grad_norm(res.x, res.grad, lo, hi);
        res.converged = true;
        res.status = "ftol";
        return res;
      }
    } else {
      flat_count = 0;
    }
  }

  res.pg_norm = projected_grad_norm(res.x, res.grad, lo, hi);
  res.status = "max_iter";
  res.converged = res.pg_norm < 1e3 * opts.gtol;
  return res;
}

}  // namespace hetcal
