#pragma once

#include <functional>
#include <string>

#include "hetcal/common.hpp"

namespace hetcal {

// Objective for minimization.  `grad` is null during line-search trials, so
// implementations should skip gradient work when it is not requested.
// Degenerate points are signalled by returning +inf (never NaN).
using ObjectiveFn = std::function<double(const VectorXd& x, VectorXd* grad)>;

struct OptimOptions {
  int max_iter = 500;
  int history = 10;            // L-BFGS memory
  double gtol = 1e-5;          // inf-norm of the projected gradient
  double ftol = 1e-12;         // relative objective decrease, twice in a row
  double step_tol = 1e-12;     // projected step inf-norm
  double c1 = 1e-4;            // Armijo slope fraction
  int max_line_trials = 40;    // halvings before giving up
  // Inf-norm cap on a single trial step (<= 0 disables).  Healthy
  // quasi-Newton steps are well under this; the cap only curbs the huge
  // leaps a badly scaled direction can take across saddles into far-away
  // basins, which a local method should not do.
  double max_step = 5.0;
};

struct OptimResult {
  VectorXd x;
  double value = 0.0;
  VectorXd grad;          // gradient at x (not projected)
  double pg_norm = 0.0;   // final projected-gradient inf-norm
  int iters = 0;
  int evals = 0;          // objective evaluations, line search included
  bool converged = false;
  std::string status;     // gtol | ftol | step_tol | line_search | max_iter
};

// Box-constrained limited-memory quasi-Newton descent: two-loop L-BFGS
// directions restricted to the free set, backtracking line search along the
// projected path x(t) = clamp(x + t d, lo, hi).
OptimResult minimize_box(const ObjectiveFn& fn, const VectorXd& x0,
                         const VectorXd& lo, const VectorXd& hi,
                         const OptimOptions& opts = {});

}  // namespace hetcal
