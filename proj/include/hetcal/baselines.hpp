#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hetcal/design.hpp"
#include "hetcal/model.hpp"
#include "hetcal/optimize.hpp"

namespace hetcal {

using ScalarField = std::function<double(const VectorXd& x)>;

// Composite Gauss-Legendre rule over a box: tensor-product nodes / weights.
struct QuadratureGrid {
  MatrixXd X;  // nodes x d
  VectorXd w;  // matching weights (sum = box volume)
};
QuadratureGrid quadrature_grid(const MatrixXd& bounds, int nodes_per_dim);

enum class WlsWeights { SampleVariance, KnownR, Unit };
const char* wls_weights_name(WlsWeights w);

struct WlsResult {
  VectorXd theta;
  double objective = 0.0;  // weighted squared-residual sum at theta
  WlsWeights weights = WlsWeights::SampleVariance;
  VectorXd weight_values;  // the r used per location
  int best_start = -1;
  std::vector<OptimResult> starts;
};

// Weighted least squares over the replicate means:
//   minimize sum_i (ybar_i - f(xbar_i, theta))^2 / r_i
// with r_i the unbiased sample variances, supplied known values, or ones.
// Multistart over the model's parameter box (heuristic center + LHS).
WlsResult fit_wls(const ReplicatedDesign& design, const ComputerModel& model,
                  WlsWeights weights = WlsWeights::SampleVariance,
                  const VectorXd& known_r = VectorXd(), int starts = 5,
                  std::uint64_t seed = 2024, const OptimOptions& opts = {});

// theta' of the WLS limit: argmin over theta of the quadrature approximation
// of integral (zeta(x) - f(x,theta))^2 / r(x) dx over the box (uniform X).
// Coarse theta-grid scan followed by gradient polish.
VectorXd wls_limit_oracle(const ComputerModel& model, const ScalarField& zeta,
                          const ScalarField& r, const MatrixXd& bounds,
                          int nodes_per_dim = 200);

// theta* of the L2 projection: same criterion with r constant.
VectorXd l2_truth_oracle(const ComputerModel& model, const ScalarField& zeta,
                         const MatrixXd& bounds, int nodes_per_dim = 200);

}  // namespace hetcal
