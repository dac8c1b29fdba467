#include "hetcal/ortho.hpp"

#include "hetcal/rng.hpp"

namespace hetcal {

OrthoBasis build_basis(const ComputerModel& model, const VectorXd& theta,
                       const KernelSpec& k0, const MatrixXd& bounds,
                       const OrthoConfig& cfg) {
  const int d = model.d();
  const int q = model.q();
  if (bounds.rows() != d || bounds.cols() != 2)
    throw ConfigError("build_basis: bounds must be d x 2");
  for (int k = 0; k < d; ++k)
    if (!(bounds(k, 0) < bounds(k, 1)))
      throw ConfigError("build_basis: bounds row " + std::to_string(k + 1) +
                        " must satisfy lo < hi");
  if (cfg.m < q)
    throw ConfigError("build_basis: m = " + std::to_string(cfg.m) +
                      " is below the number of parameters q = " +
                      std::to_string(q));
  k0.validate(d);

  OrthoBasis b;
  b.seed = cfg.seed;
  b.conditioning_warning = cfg.m < cfg.min_m_per_q * q;
  b.xi.resize(cfg.m, d);
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.m; ++i)
    for (int k = 0; k < d; ++k)
      b.xi(i, k) = rng.uniform(bounds(k, 0), bounds(k, 1));

  b.d2_xi = pairwise_sq(b.xi);
  b.F = model.grad_batch(b.xi, theta);
  b.W = kernel_eval_cache(k0.family, b.d2_xi, k0.lengthscales).value;
  return b;
}

OrthoEval ortho_eval(const OrthoBasis& basis, const ComputerModel& model,
                     const VectorXd& theta, const KernelEvalCache& cache_xi,
                     const KernelEvalCache& cache_cross,
                     const OrthoConfig& cfg) {
  OrthoEval e;
  e.F = model.grad_batch(basis.xi, theta);
  e.WF.noalias() = cache_xi.value * e.F;
  e.G.noalias() = e.F.transpose() * e.WF;
  e.w = cache_cross.value;
  e.B.noalias() = e.F.transpose() * e.w;
  try {
    e.g_chol = chol_with_jitter(e.G, cfg.jitter_start, cfg.jitter_max,
                                "orthogonal projection Gram F'WF");
  } catch (const NumericError&) {
    if (!cfg.degenerate_ok)
      throw NumericError(
          "orthogonal kernel: F'WF is singular — the model's parameter "
          "gradient directions are linearly dependent on the input box "
          "(constant-in-theta model?); refit with a plain kernel or enable "
          "the degenerate fallback");
    e.projection_disabled = true;
    e.P = MatrixXd::Zero(e.B.rows(), e.B.cols());
    e.corr = MatrixXd::Zero(e.w.cols(), e.w.cols());
    return e;
  }
  e.P = e.g_chol.llt.solve(e.B);
  e.corr.noalias() = e.B.transpose() * e.P;
  return e;
}

MatrixXd ortho_corr_dphi(const OrthoEval& e, const MatrixXd& dW,
                         const MatrixXd& dw) {
  if (e.projection_disabled)
    return MatrixXd::Zero(e.corr.rows(), e.corr.cols());
  // d(B' G^{-1} B) = dB'P + P'dB - P' dG P,  dB = F'dw,  dG = F'dW F
  MatrixXd dB = e.F.transpose() * dw;               // q x n
  MatrixXd dG = e.F.transpose() * (dW * e.F);       // q x q
  MatrixXd out = dB.transpose() * e.P;
  out += out.transpose().eval();
  out.noalias() -= e.P.transpose() * (dG * e.P);
  return out;
}

MatrixXd ortho_corr_dtheta(const OrthoEval& e, const MatrixXd& dF) {
  if (e.projection_disabled)
    return MatrixXd::Zero(e.corr.rows(), e.corr.cols());
  // dB = dF'w, dG = dF'WF + F'W dF = dF'(WF) + (WF)'dF
  MatrixXd dB = dF.transpose() * e.w;               // q x n
  MatrixXd dG = dF.transpose() * e.WF;              // q x q
  dG += dG.transpose().eval();
  MatrixXd out = dB.transpose() * e.P;
  out += out.transpose().eval();
  out.noalias() -= e.P.transpose() * (dG * e.P);
  return out;
}

MatrixXd ortho_cross_correction(const OrthoEval& e, const MatrixXd& B_star) {
  if (e.projection_disabled)
    return MatrixXd::Zero(e.B.cols(), B_star.cols());
  return e.P.transpose() * B_star;  // (G^{-1}B)' B* = B' G^{-1} B*
}

VectorXd ortho_diag_correction(const OrthoEval& e, const MatrixXd& B_star) {
  if (e.projection_disabled) return VectorXd::Zero(B_star.cols());
  const MatrixXd sol = e.g_chol.llt.solve(B_star);
  return (B_star.array() * sol.array()).colwise().sum().transpose();
}

MatrixXd ortho_orthogonality_residual(const OrthoEval& e,
                                      const MatrixXd& B_star) {
  if (e.projection_disabled) return B_star / static_cast<double>(e.F.rows());
  const MatrixXd sol = e.g_chol.llt.solve(B_star);
  return (B_star - e.G * sol) / static_cast<double>(e.F.rows());
}

MatrixXd ortho_kernel_matrix(const OrthoBasis& basis, const ComputerModel& model,
                             const VectorXd& theta, const KernelSpec& k0,
                             const MatrixXd& X, const OrthoConfig& cfg) {
  k0.validate(static_cast<int>(X.cols()));
  const KernelEvalCache cache_xi =
      kernel_eval_cache(k0.family, basis.d2_xi, k0.lengthscales);
  const KernelEvalCache cache_cross = kernel_eval_cache(
      k0.family, pairwise_sq(basis.xi, X), k0.lengthscales);
  const OrthoEval e =
      ortho_eval(basis, model, theta, cache_xi, cache_cross, cfg);
  MatrixXd k = kernel_matrix(k0, X);
  k -= e.corr;
  return k;
}

}  // namespace hetcal
