#pragma once

#include <cstdint>

#include "hetcal/common.hpp"
#include "hetcal/kernels.hpp"
#include "hetcal/model.hpp"

namespace hetcal {

// Monte Carlo orthogonalization of a base kernel k0 against the model's
// parameter-gradient directions:
//   K = K0 - w' F (F' W F)^{-1} F' w
// with xi_1..xi_m uniform on the input box, W = k0(xi, xi), F the m x q
// matrix of df/dtheta at xi, and w the k0 cross-covariances against the
// points of interest.  The 1/m weights of the Monte Carlo integrals cancel.
struct OrthoConfig {
  int m = 1000;
  std::uint64_t seed = 1;
  double jitter_start = 1e-10;  // relative, on F'WF
  double jitter_max = 1e-6;
  int min_m_per_q = 10;     // below this, flag a conditioning warning
  bool degenerate_ok = false;  // true: singular F'WF falls back to K0
};

struct OrthoBasis {
  MatrixXd xi;      // m x d (raw coordinates)
  std::uint64_t seed = 0;
  MatrixXd F;       // m x q gradients at the construction theta
  MatrixXd W;       // m x m base-kernel Gram at the construction lengthscales
  PairwiseSq d2_xi;  // kernel-coordinate squared differences, xi vs xi
  bool conditioning_warning = false;
};

// Draws the basis points and fills F, W at the given (theta, k0).  The basis
// (xi) is fixed for a whole fit; F and W are refreshed as parameters move.
OrthoBasis build_basis(const ComputerModel& model, const VectorXd& theta,
                       const KernelSpec& k0, const MatrixXd& bounds,
                       const OrthoConfig& cfg);

// Projection state at a fixed (theta, lengthscales) against a fixed training
// set.  cache_xi must hold k0 over (xi, xi) and cache_cross over (xi, X).
struct OrthoEval {
  MatrixXd F;     // m x q
  MatrixXd WF;    // m x q
  MatrixXd G;     // q x q  F'WF (no jitter)
  Chol g_chol;    // factorization of G (+jitter)
  MatrixXd w;     // m x n
  MatrixXd B;     // q x n  F'w
  MatrixXd P;     // q x n  G^{-1}B
  MatrixXd corr;  // n x n  B'P, the subtracted projection term
  bool projection_disabled = false;  // degenerate G with degenerate_ok
};

OrthoEval ortho_eval(const OrthoBasis& basis, const ComputerModel& model,
                     const VectorXd& theta, const KernelEvalCache& cache_xi,
                     const KernelEvalCache& cache_cross, const OrthoConfig& cfg);

// d corr / d phi_j given the slabs dW = dW/dphi_j and dw = dw/dphi_j.
MatrixXd ortho_corr_dphi(const OrthoEval& e, const MatrixXd& dW,
                         const MatrixXd& dw);
// d corr / d theta_j given dF = d(grad f)/dtheta_j at the basis points.
MatrixXd ortho_corr_dtheta(const OrthoEval& e, const MatrixXd& dF);

// Projection corrections against new points: B_star = F'w_star.
// cross:  k0(X, X*) - B' G^{-1} B_star      (n x n*)
// diag:   w*' F G^{-1} F' w*                (length n*)
MatrixXd ortho_cross_correction(const OrthoEval& e, const MatrixXd& B_star);
VectorXd ortho_diag_correction(const OrthoEval& e, const MatrixXd& B_star);

// Monte Carlo orthogonality residual (1/m) F' k_ortho(xi, x*) for probe
// points; analytically zero up to the jitter on G.  Returns q x n*.
MatrixXd ortho_orthogonality_residual(const OrthoEval& e,
                                      const MatrixXd& B_star);

// Convenience one-shot API: the orthogonalized kernel matrix over X.
MatrixXd ortho_kernel_matrix(const OrthoBasis& basis, const ComputerModel& model,
                             const VectorXd& theta, const KernelSpec& k0,
                             const MatrixXd& X, const OrthoConfig& cfg);

}  // namespace hetcal
