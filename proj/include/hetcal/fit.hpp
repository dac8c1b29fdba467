#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetcal/likelihood.hpp"
#include "hetcal/optimize.hpp"

namespace hetcal {

struct FitConfig {
  EstimatorKind estimator = EstimatorKind::HetOgp;
  KernelFamily mean_family = KernelFamily::Matern52;
  KernelFamily noise_family = KernelFamily::Matern52;
  int starts = 5;               // multistart count (start 1 is heuristic)
  std::uint64_t seed = 2024;    // LHS stream for the remaining starts
  OrthoConfig ortho;            // basis size / seed for orthogonal variants
  double jitter = 1e-8;         // Gamma_n rescue cap (relative)
  bool scale_inputs = true;     // kernels on min-max scaled coordinates
  OptimOptions optim;

  // Optional overrides; empty selects the heuristics (lengthscale boxes
  // [0.05, 5] x input range, start at half the range).
  MatrixXd phi_bounds, phi_g_bounds;  // p x 2, kernel coordinates
  VectorXd theta0, phi0, phi_g0;      // heuristic-start overrides
  double g0 = 0.1;
};

struct StartReport {
  VectorXd x0;           // packed start point
  double value = 0.0;    // final log likelihood (-inf when degenerate)
  int iters = 0, evals = 0;
  bool converged = false;
  bool ok = false;       // finite optimum that passed the admissibility filters
  std::string status;    // optimizer status, or "collapsed" (nu_g_hat ~ 0) /
                         // "hom_dominated" (mean field below the
                         // homoscedastic optimum) / "homoscedastic_limit"
                         // (the reported delta = 0 fallback)
};

// Self-contained fit: owns copies of the design and model so downstream
// prediction and inference need only this object.
struct FitResult {
  EstimatorKind estimator = EstimatorKind::HetOgp;
  VariantToggles variant;
  KernelFamily mean_family = KernelFamily::Matern52;
  KernelFamily noise_family = KernelFamily::Matern52;
  ReplicatedDesign design;
  ComputerModel model;
  InputScaler scaler;
  OrthoConfig ortho;
  std::shared_ptr<const OrthoBasis> basis;  // orthogonal variants
  double jitter = 1e-8;

  HetCalibParams params;  // optimum; nu / nu_g hold the plug-in values
  ParamBounds bounds;     // search box actually used
  double loglik = 0.0, mean_field = 0.0, variance_field = 0.0;
  // Latent variants only: the heteroscedastic optimum failed to improve on
  // the homoscedastic counterpart, so this fit is the delta = 0 limit (noise
  // field pinned flat, nu_g = 0, variance_field = NaN, loglik = mean_field).
  bool degenerate_noise = false;
  int best_start = -1;
  std::vector<StartReport> starts;
  std::vector<std::string> warnings;

  // Rebuilds the evaluation problem over this object's own members (pointers
  // into *this: keep the FitResult alive while using it).
  CalibProblem problem() const;
};

// Heuristic search box for the given design/model/config.
ParamBounds default_bounds(const ReplicatedDesign& design,
                           const ComputerModel& model, const FitConfig& cfg);

// Maximizes the joint profile likelihood from `starts` initial points and
// keeps the best finite optimum.  Throws NumericError when every start is
// degenerate.
FitResult fit_variant(const ReplicatedDesign& design,
                      const ComputerModel& model, const FitConfig& cfg);

}  // namespace hetcal
