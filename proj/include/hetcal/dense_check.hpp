#pragma once

#include "hetcal/likelihood.hpp"

namespace hetcal {

// Independent dense-N reference path: expands replicates, assembles the full
// N x N covariance pointwise (its own orthogonalization code, no Woodbury,
// no shared Gram assembly), and evaluates the profile log marginal.  Slow by
// design; used to cross-check the grouped likelihood and predictions.
struct DenseCheck {
  double value = 0.0;      // profile log likelihood (mean field)
  double nu_hat = 0.0;     // z' C^{-1} z / N
  MatrixXd C;              // K_N + Lambda_N (unit process scale)
  VectorXd z;              // expanded residuals y - f(x, theta)
};

DenseCheck dense_log_likelihood(const CalibProblem& prob,
                                const HetCalibParams& p);

// Dense predictive moments at Xnew (unit-scale kernel path, same expansion):
//   mean[i] = f(x_i, theta) + c_i' C^{-1} z
//   var[i]  = nu_hat (k(x_i, x_i) - c_i' C^{-1} c_i)         (bias part)
// Noise variance is not added here; callers compare the latent surface.
void dense_predict(const CalibProblem& prob, const HetCalibParams& p,
                   const MatrixXd& Xnew, VectorXd* mean, VectorXd* var);

}  // namespace hetcal
