#include "hetcal/noise.hpp"

#include <cmath>

namespace hetcal {

NoiseField noise_field(const KernelEvalCache& cache_g, const VectorXi& a,
                       double g, const VectorXd& delta) {
  const Eigen::Index n = delta.size();
  if (cache_g.value.rows() != n || a.size() != n)
    throw ConfigError("noise_field: dimension mismatch");
  if (!(g > 0.0)) throw ConfigError("noise_field: g must be positive");

  NoiseField f;
  f.Kg = cache_g.value;
  MatrixXd gamma = f.Kg;
  for (Eigen::Index i = 0; i < n; ++i)
    gamma(i, i) += g / static_cast<double>(a[i]);
  // The g A^{-1} ridge keeps Gamma_g positive definite; jitter only as rescue.
  f.gamma = chol_with_jitter(gamma, 0.0, 1e-6, "noise-field Gamma_g");
  f.alpha = f.gamma.llt.solve(delta);
  f.loglam.noalias() = f.Kg * f.alpha;
  f.lam = f.loglam.array().exp();
  f.nu_g_hat = delta.dot(f.alpha) / static_cast<double>(n);
  f.logdet = f.gamma.log_det();
  return f;
}

VectorXd predict_log_lambda(const KernelSpec& kg_spec, const MatrixXd& Xtrain,
                            const MatrixXd& Xnew, const VectorXd& alpha) {
  if (Xtrain.rows() != alpha.size())
    throw ConfigError("predict_log_lambda: dimension mismatch");
  const MatrixXd kx = kernel_cross(kg_spec, Xnew, Xtrain);  // n* x n
  return kx * alpha;
}

VectorXd delta_init(const ReplicatedDesign& design, double* nu0_out) {
  const int n = design.n();
  double nu0 = 0.0;
  for (int i = 0; i < n; ++i)
    nu0 += static_cast<double>(design.a[i]) * design.s2[i];
  nu0 /= static_cast<double>(design.N());
  if (!(nu0 > 1e-12)) {
    // No replication information (all a_i = 1, or exact ties): fall back to
    // the spread of the group means so the scale stays meaningful.
    const double m = design.ybar.mean();
    nu0 = (design.ybar.array() - m).square().sum() /
          std::max(1, n - 1);
    if (!(nu0 > 1e-12)) nu0 = 1.0;
  }
  if (nu0_out) *nu0_out = nu0;

  VectorXd delta = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (design.a[i] >= 2)
      delta[i] = std::log(std::max(design.s2[i], 1e-8) / nu0);
  return delta;
}

}  // namespace hetcal
