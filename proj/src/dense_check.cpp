#include "hetcal/dense_check.hpp"

#include <cmath>

namespace hetcal {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Deliberately naive smoother: dense LU solve for Gamma_g^{-1} Delta.
VectorXd dense_lambda(const CalibProblem& prob, const HetCalibParams& p) {
  const ReplicatedDesign& dz = *prob.design;
  const int n = dz.n();
  if (!prob.variant.latent_noise) return VectorXd::Ones(n);
  KernelSpec kg{prob.noise_family, p.phi_g};
  const MatrixXd Kg = kernel_matrix(kg, prob.Xk);
  MatrixXd gamma_g = Kg;
  for (int i = 0; i < n; ++i)
    gamma_g(i, i) += p.g / static_cast<double>(dz.a[i]);
  const VectorXd loglam =
      Kg * Eigen::FullPivLU<MatrixXd>(gamma_g).solve(p.delta);
  return loglam.array().exp();
}

// Pointwise orthogonalized kernel machinery shared by value and prediction.
struct DenseKernel {
  KernelSpec k0;
  bool orthogonal = false;
  MatrixXd xi_k;                        // scaled basis points
  MatrixXd F;                           // m x q
  Eigen::LDLT<MatrixXd> G_ldlt;         // F'WF (+ basis jitter)

  VectorXd b(const VectorXd& xk) const {  // F' k0(xi, x), q-vector
    const int m = static_cast<int>(xi_k.rows());
    VectorXd w(m);
    for (int s = 0; s < m; ++s)
      w[s] = kernel_eval(k0, xi_k.row(s).transpose(), xk);
    return F.transpose() * w;
  }

  double operator()(const VectorXd& xk, const VectorXd& yk) const {
    double v = kernel_eval(k0, xk, yk);
    if (orthogonal) v -= b(xk).dot(G_ldlt.solve(b(yk)));
    return v;
  }
};

DenseKernel dense_kernel(const CalibProblem& prob, const HetCalibParams& p) {
  DenseKernel dk;
  dk.k0 = KernelSpec{prob.mean_family, p.phi};
  dk.orthogonal = prob.variant.orthogonal;
  if (!dk.orthogonal) return dk;
  dk.xi_k = prob.scaler.apply(prob.basis->xi);
  dk.F = prob.model->grad_batch(prob.basis->xi, p.theta);
  const MatrixXd W = kernel_matrix(dk.k0, dk.xi_k);
  MatrixXd G = dk.F.transpose() * W * dk.F;
  // mirror the main path's starting jitter so both solve the same system
  const double scale = G.diagonal().cwiseAbs().mean();
  G.diagonal().array() += prob.ortho.jitter_start * scale;
  dk.G_ldlt.compute(G);
  return dk;
}

}  // namespace

DenseCheck dense_log_likelihood(const CalibProblem& prob,
                                const HetCalibParams& p) {
  const ReplicatedDesign& dz = *prob.design;
  const auto obs = dz.expand();
  const int N = static_cast<int>(obs.size());
  const VectorXd lam = dense_lambda(prob, p);
  const DenseKernel dk = dense_kernel(prob, p);

  // group index of each expanded row (expand() preserves location order)
  std::vector<int> gi(N);
  for (int i = 0, k = 0; i < dz.n(); ++i)
    for (int r = 0; r < dz.a[i]; ++r) gi[k++] = i;

  DenseCheck out;
  out.C.resize(N, N);
  out.z.resize(N);
  std::vector<VectorXd> xk(N);
  for (int k = 0; k < N; ++k) {
    xk[k] = prob.scaler.active
                ? prob.scaler.apply(obs[k].x.transpose()).transpose()
                : obs[k].x;
    out.z[k] = obs[k].y - prob.model->eval(obs[k].x, p.theta);
  }
  for (int k = 0; k < N; ++k) {
    for (int l = 0; l <= k; ++l) {
      const double v = dk(xk[k], xk[l]);
      out.C(k, l) = v;
      out.C(l, k) = v;
    }
    out.C(k, k) += lam[gi[k]];
  }

  Eigen::LDLT<MatrixXd> ldlt(out.C);
  const VectorXd alpha = ldlt.solve(out.z);
  out.nu_hat = out.z.dot(alpha) / static_cast<double>(N);
  const double logdet = ldlt.vectorD().array().log().sum();
  out.value = -0.5 * N * (kLog2Pi + 1.0 + std::log(out.nu_hat)) -
              0.5 * logdet;
  return out;
}

void dense_predict(const CalibProblem& prob, const HetCalibParams& p,
                   const MatrixXd& Xnew, VectorXd* mean, VectorXd* var) {
  const DenseCheck dc = dense_log_likelihood(prob, p);
  const ReplicatedDesign& dz = *prob.design;
  const auto obs = dz.expand();
  const int N = static_cast<int>(obs.size());
  const int n_new = static_cast<int>(Xnew.rows());
  const DenseKernel dk = dense_kernel(prob, p);
  Eigen::LDLT<MatrixXd> ldlt(dc.C);
  const VectorXd alpha = ldlt.solve(dc.z);

  mean->resize(n_new);
  var->resize(n_new);
  for (int j = 0; j < n_new; ++j) {
    const VectorXd xs = Xnew.row(j).transpose();
    const VectorXd xs_k = prob.scaler.active
                              ? prob.scaler.apply(Xnew.row(j)).transpose()
                              : xs;
    VectorXd c(N);
    for (int k = 0; k < N; ++k) {
      const VectorXd xk = prob.scaler.active
                              ? prob.scaler.apply(obs[k].x.transpose())
                                    .transpose()
                              : obs[k].x;
      c[k] = dk(xs_k, xk);
    }
    (*mean)[j] = prob.model->eval(xs, p.theta) + c.dot(alpha);
    const double kss = dk(xs_k, xs_k);
    (*var)[j] = dc.nu_hat * (kss - c.dot(ldlt.solve(c)));
  }
}

}  // namespace hetcal
