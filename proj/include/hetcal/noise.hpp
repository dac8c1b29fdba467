#pragma once

#include "hetcal/common.hpp"
#include "hetcal/design.hpp"
#include "hetcal/kernels.hpp"

namespace hetcal {

// Latent log-variance field: smoothed log-ratios
//   log Lambda = K_g (K_g + g A^{-1})^{-1} Delta
// with per-location latents Delta and replicate counts A = diag(a_i).
struct NoiseField {
  MatrixXd Kg;        // n x n noise-kernel Gram
  Chol gamma;         // factorization of Gamma_g = K_g + g A^{-1}
  VectorXd alpha;     // Gamma_g^{-1} Delta
  VectorXd loglam;    // K_g alpha
  VectorXd lam;       // exp(loglam)
  double nu_g_hat = 0.0;  // Delta' alpha / n  (plug-in latent scale)
  double logdet = 0.0;    // log|Gamma_g|
};

// cache_g must hold the noise kernel over the training locations.
NoiseField noise_field(const KernelEvalCache& cache_g, const VectorXi& a,
                       double g, const VectorXd& delta);

// Smoothed log-variance prediction at new points: k_g(X*, X)' alpha.
VectorXd predict_log_lambda(const KernelSpec& kg_spec, const MatrixXd& Xtrain,
                            const MatrixXd& Xnew, const VectorXd& alpha);

// Empirical initialization of the latents: log(max(s2_i, 1e-8) / nu0) at
// replicated locations, 0 where a_i = 1; nu0 is the pooled variance
// estimate sum_i a_i s2_i / N (floored to keep the log finite).
VectorXd delta_init(const ReplicatedDesign& design, double* nu0_out = nullptr);

}  // namespace hetcal
