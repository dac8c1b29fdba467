#pragma once

#include <memory>

#include "hetcal/design.hpp"
#include "hetcal/kernels.hpp"
#include "hetcal/model.hpp"
#include "hetcal/noise.hpp"
#include "hetcal/ortho.hpp"
#include "hetcal/params.hpp"

namespace hetcal {

// Optional min-max input scaling applied to kernel coordinates only (the
// model always sees raw inputs; anisotropic lengthscales make the two
// parameterizations equivalent, scaling just recenters the search boxes).
struct InputScaler {
  bool active = false;
  VectorXd offset;  // per-dim lower bound
  VectorXd scale;   // per-dim 1 / range

  MatrixXd apply(const MatrixXd& X) const {
    if (!active) return X;
    MatrixXd out = X;
    out.rowwise() -= offset.transpose();
    out.array().rowwise() *= scale.transpose().array();
    return out;
  }
};

InputScaler make_scaler(const MatrixXd& bounds, bool active);

// A fully specified calibration problem.  Distance stacks and the Monte
// Carlo basis are computed once here and reused across optimizer iterations.
struct CalibProblem {
  const ReplicatedDesign* design = nullptr;
  const ComputerModel* model = nullptr;
  VariantToggles variant;
  KernelFamily mean_family = KernelFamily::Matern52;
  KernelFamily noise_family = KernelFamily::Matern52;
  double jitter = 1e-8;  // rescue jitter cap on Gamma_n (relative)
  OrthoConfig ortho;
  std::shared_ptr<const OrthoBasis> basis;  // set when variant.orthogonal
  InputScaler scaler;

  MatrixXd Xk;          // kernel-coordinate training locations
  PairwiseSq d2_train;  // train vs train
  PairwiseSq d2_cross;  // basis vs train (orthogonal variants)

  ParamLayout layout() const;
};

// `basis_theta`: gradient evaluation point for the initial basis build;
// pass the box center (any interior point works, F is refreshed per eval).
// A non-null `reuse` skips the build and shares an existing basis, so
// refits and predictions see the exact Monte Carlo draw of the original fit.
CalibProblem make_problem(const ReplicatedDesign& design,
                          const ComputerModel& model, VariantToggles variant,
                          KernelFamily mean_family, KernelFamily noise_family,
                          double jitter, const OrthoConfig& ortho,
                          const InputScaler& scaler,
                          const VectorXd& basis_theta,
                          const VectorXd& basis_phi,
                          std::shared_ptr<const OrthoBasis> reuse = nullptr);

// Everything evaluated at one parameter point.  `ok == false` marks a
// degenerate point (non-positive plug-in scales, overflowing smoothed
// variances); its value is -inf so line searches back away from it.
struct CalibState {
  bool ok = true;
  KernelSpec k0, kg;
  KernelEvalCache cache_train, cache_xi, cache_cross, cache_g;
  OrthoEval oe;    // orthogonal variants
  NoiseField nf;   // latent variants
  VectorXd lam;    // smoothed variance ratios (ones for hom variants)
  MatrixXd Kn;     // bias-kernel Gram (projection applied for ortho)
  Chol gamma_n;    // K_n + A^{-1} Lambda_n
  VectorXd fbar, zbar, alpha_n;
  double nu_hat = 0.0, nu_g_hat = 0.0;
  double mean_field = 0.0, variance_field = 0.0, value = 0.0;
};

CalibState calib_state(const CalibProblem& prob, const HetCalibParams& p);

struct LikelihoodResult {
  double value = 0.0, mean_field = 0.0, variance_field = 0.0;
  double nu_hat = 0.0, nu_g_hat = 0.0;
  bool ok = true;
  VectorXd grad;  // transformed coordinates; empty unless requested
};

LikelihoodResult log_likelihood(const CalibProblem& prob,
                                const HetCalibParams& p);
LikelihoodResult log_likelihood_grad(const CalibProblem& prob,
                                     const HetCalibParams& p);

// Gradient of the mean-field component with respect to the smoothed variance
// ratios lambda (the d logL / d Lambda_n vector); exposed for tests and for
// the information matrix.
VectorXd mean_field_dlambda(const CalibProblem& prob, const CalibState& st);

}  // namespace hetcal
