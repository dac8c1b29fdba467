#pragma once

#include <string>
#include <vector>

#include "hetcal/fit.hpp"

namespace hetcal {

// Pointwise predictive distribution of the physical process at one input.
struct PredictiveDistribution {
  VectorXd x;
  double mean = 0.0;             // mu(x)
  double total_variance = 0.0;   // bias variance + noise variance
  double noise_variance = 0.0;   // r(x) = nu_hat * lambda(x)
  double model_value = 0.0;      // f(x, theta_hat)
  double discrepancy_mean = 0.0;      // mu(x) - f(x, theta_hat)
  double discrepancy_variance = 0.0;  // total - noise (bias surface)
};

std::vector<PredictiveDistribution> predict(const FitResult& fit,
                                            const MatrixXd& Xnew);

// Lower-level entry point used by tests: predicts from an explicit problem /
// parameter pair instead of a finished fit.
std::vector<PredictiveDistribution> predict_at(const CalibProblem& prob,
                                               const HetCalibParams& p,
                                               const MatrixXd& Xnew);

// CSV with header x1..xd, mean, sd_total, sd_noise, model, discrepancy,
// lo95, hi95 (normal 95% interval, mean +- 1.96 sd_total).
void write_predictions_csv(const std::vector<PredictiveDistribution>& preds,
                           const std::string& path);

// Root mean squared error of the predictive means against the truth.
double rmse(const std::vector<PredictiveDistribution>& preds,
            const VectorXd& truth);

// Mean predictive score (higher is better) against the true process mean
// zeta and true noise variance r on the same grid:
//   s(x) = -(zeta - mu)^2 / sigma^2 - r / sigma^2 - log sigma^2
// with sigma^2 the total predictive variance.
double predictive_score(const std::vector<PredictiveDistribution>& preds,
                        const VectorXd& zeta, const VectorXd& r);

}  // namespace hetcal
