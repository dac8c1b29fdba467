#include "hetcal/likelihood.hpp"

#include <cmath>
#include <limits>

namespace hetcal {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
// Plug-in latent scale below this is treated as a degenerate point: the
// profiled variance-field term -(n/2) log nu_g diverges as Delta -> 0, a
// non-statistical singularity that line searches must back away from.
constexpr double kNuGFloor = 1e-10;
constexpr double kLogLamCap = 50.0;

}  // namespace

InputScaler make_scaler(const MatrixXd& bounds, bool active) {
  InputScaler s;
  s.active = active;
  if (!active) return s;
  s.offset = bounds.col(0);
  s.scale = (bounds.col(1) - bounds.col(0)).cwiseInverse();
  return s;
}

ParamLayout CalibProblem::layout() const {
  ParamLayout L;
  L.q = model->q();
  L.p1 = model->d();
  L.latent = variant.latent_noise;
  if (L.latent) {
    L.p2 = model->d();
    L.n = design->n();
  }
  return L;
}

CalibProblem make_problem(const ReplicatedDesign& design,
                          const ComputerModel& model, VariantToggles variant,
                          KernelFamily mean_family, KernelFamily noise_family,
                          double jitter, const OrthoConfig& ortho,
                          const InputScaler& scaler,
                          const VectorXd& basis_theta,
                          const VectorXd& basis_phi,
                          std::shared_ptr<const OrthoBasis> reuse) {
  if (design.d() != model.d())
    throw ConfigError("make_problem: design dimension " +
                      std::to_string(design.d()) + " != model dimension " +
                      std::to_string(model.d()));
  CalibProblem prob;
  prob.design = &design;
  prob.model = &model;
  prob.variant = variant;
  prob.mean_family = mean_family;
  prob.noise_family = noise_family;
  prob.jitter = jitter;
  prob.ortho = ortho;
  prob.scaler = scaler;
  prob.Xk = scaler.apply(design.X);
  prob.d2_train = pairwise_sq(prob.Xk);
  if (variant.orthogonal) {
    if (reuse) {
      prob.basis = std::move(reuse);
    } else {
      KernelSpec k0{mean_family, basis_phi};
      auto basis = std::make_shared<OrthoBasis>();
      // basis sampled on the raw box; kernel matrices use scaled coordinates
      OrthoBasis raw =
          build_basis(model, basis_theta, k0, design.bounds, ortho);
      if (scaler.active) {
        raw.d2_xi = pairwise_sq(scaler.apply(raw.xi));
        raw.W = kernel_eval_cache(mean_family, raw.d2_xi, basis_phi).value;
      }
      *basis = std::move(raw);
      prob.basis = basis;
    }
    prob.d2_cross = pairwise_sq(scaler.apply(prob.basis->xi), prob.Xk);
  }
  return prob;
}

CalibState calib_state(const CalibProblem& prob, const HetCalibParams& p) {
  const ReplicatedDesign& dz = *prob.design;
  const int n = dz.n();
  const int N = dz.N();
  CalibState st;
  st.k0 = KernelSpec{prob.mean_family, p.phi};
  st.k0.validate(dz.d());

  // Latent noise side first: smoothed variance ratios.
  bool variance_degenerate = false;
  if (prob.variant.latent_noise) {
    st.kg = KernelSpec{prob.noise_family, p.phi_g};
    st.kg.validate(dz.d());
    st.cache_g = kernel_eval_cache(prob.noise_family, prob.d2_train, p.phi_g);
    st.nf = noise_field(st.cache_g, dz.a, p.g, p.delta);
    st.lam = st.nf.lam;
    st.nu_g_hat = st.nf.nu_g_hat;
    if (st.nf.loglam.cwiseAbs().maxCoeff() > kLogLamCap) {
      st.ok = false;
      st.value = -std::numeric_limits<double>::infinity();
      return st;
    }
    // Keep going on a degenerate plug-in scale: the mean field is still well
    // defined (e.g. Delta = 0 gives the homoscedastic value) and callers
    // compare that component; only the total is marked unusable.
    variance_degenerate = !(st.nu_g_hat > kNuGFloor);
  } else {
    st.lam = VectorXd::Ones(n);
  }

  // Mean side: bias-kernel Gram with optional orthogonal projection.
  st.cache_train = kernel_eval_cache(prob.mean_family, prob.d2_train, p.phi);
  st.Kn = st.cache_train.value;
  if (prob.variant.orthogonal) {
    st.cache_xi =
        kernel_eval_cache(prob.mean_family, prob.basis->d2_xi, p.phi);
    st.cache_cross =
        kernel_eval_cache(prob.mean_family, prob.d2_cross, p.phi);
    st.oe = ortho_eval(*prob.basis, *prob.model, p.theta, st.cache_xi,
                       st.cache_cross, prob.ortho);
    st.Kn -= st.oe.corr;
  }

  MatrixXd gamma_n = st.Kn;
  for (int i = 0; i < n; ++i)
    gamma_n(i, i) += st.lam[i] / static_cast<double>(dz.a[i]);
  st.gamma_n = chol_with_jitter(gamma_n, 0.0, prob.jitter, "Gamma_n");

  st.fbar = prob.model->eval_batch(dz.X, p.theta);
  st.zbar = dz.ybar - st.fbar;
  st.alpha_n = st.gamma_n.llt.solve(st.zbar);

  double qform = st.zbar.dot(st.alpha_n);
  double rep_logdet = 0.0;  // log|K_N+Lambda_N| - log|Gamma_n|
  for (int i = 0; i < n; ++i) {
    const double ai = static_cast<double>(dz.a[i]);
    qform += ai * dz.s2[i] / st.lam[i];
    rep_logdet += (ai - 1.0) * std::log(st.lam[i]) + std::log(ai);
  }
  st.nu_hat = qform / static_cast<double>(N);
  if (!(st.nu_hat > 0.0) || !std::isfinite(st.nu_hat)) {
    st.ok = false;
    st.value = -std::numeric_limits<double>::infinity();
    return st;
  }

  const double nd = static_cast<double>(N);
  st.mean_field = -0.5 * nd * (kLog2Pi + 1.0 + std::log(st.nu_hat)) -
                  0.5 * (st.gamma_n.log_det() + rep_logdet);
  if (prob.variant.latent_noise) {
    if (variance_degenerate) {
      st.ok = false;
      st.variance_field = -std::numeric_limits<double>::infinity();
      st.value = -std::numeric_limits<double>::infinity();
      return st;
    }
    const double nn = static_cast<double>(n);
    st.variance_field =
        -0.5 * nn * (kLog2Pi + 1.0 + std::log(st.nu_g_hat)) -
        0.5 * st.nf.logdet;
  }
  st.value = st.mean_field + st.variance_field;
  if (!std::isfinite(st.value)) {
    st.ok = false;
    st.value = -std::numeric_limits<double>::infinity();
  }
  return st;
}

VectorXd mean_field_dlambda(const CalibProblem& prob, const CalibState& st) {
  const ReplicatedDesign& dz = *prob.design;
  const int n = dz.n();
  const MatrixXd gamma_inv =
      st.gamma_n.llt.solve(MatrixXd::Identity(n, n));
  VectorXd u(n);
  for (int i = 0; i < n; ++i) {
    const double ai = static_cast<double>(dz.a[i]);
    const double li = st.lam[i];
    u[i] = (ai * dz.s2[i] / (li * li) + st.alpha_n[i] * st.alpha_n[i] / ai) /
               (2.0 * st.nu_hat) -
           (ai - 1.0) / (2.0 * li) - gamma_inv(i, i) / (2.0 * ai);
  }
  return u;
}

namespace {

LikelihoodResult result_from_state(const CalibState& st) {
  LikelihoodResult r;
  r.value = st.value;
  r.mean_field = st.mean_field;
  r.variance_field = st.variance_field;
  r.nu_hat = st.nu_hat;
  r.nu_g_hat = st.nu_g_hat;
  r.ok = st.ok;
  return r;
}

}  // namespace

LikelihoodResult log_likelihood(const CalibProblem& prob,
                                const HetCalibParams& p) {
  return result_from_state(calib_state(prob, p));
}

LikelihoodResult log_likelihood_grad(const CalibProblem& prob,
                                     const HetCalibParams& p) {
  const CalibState st = calib_state(prob, p);
  LikelihoodResult r = result_from_state(st);
  const ParamLayout L = prob.layout();
  r.grad = VectorXd::Zero(L.dim());
  if (!st.ok) return r;

  const ReplicatedDesign& dz = *prob.design;
  const int n = dz.n();
  const int q = L.q;
  const MatrixXd gamma_inv = st.gamma_n.llt.solve(MatrixXd::Identity(n, n));

  // theta block
  const MatrixXd dfbar = prob.model->grad_batch(dz.X, p.theta);  // n x q
  for (int j = 0; j < q; ++j) {
    double dqform = -2.0 * st.alpha_n.dot(dfbar.col(j));
    double tr_term = 0.0;
    if (prob.variant.orthogonal && !st.oe.projection_disabled) {
      const MatrixXd dF =
          prob.model->hess_col_batch(prob.basis->xi, p.theta, j);
      const MatrixXd dKn = -ortho_corr_dtheta(st.oe, dF);
      dqform -= st.alpha_n.dot(dKn * st.alpha_n);
      tr_term = 0.5 * (gamma_inv.array() * dKn.array()).sum();
    }
    r.grad[L.off_theta() + j] = -dqform / (2.0 * st.nu_hat) - tr_term;
  }

  // mean-kernel lengthscales (chain through log transform at the end)
  for (int j = 0; j < L.p1; ++j) {
    MatrixXd dKn = kernel_grad_phi(st.cache_train, prob.d2_train.d2[j],
                                   p.phi[j]);
    if (prob.variant.orthogonal && !st.oe.projection_disabled) {
      const MatrixXd dW =
          kernel_grad_phi(st.cache_xi, prob.basis->d2_xi.d2[j], p.phi[j]);
      const MatrixXd dw =
          kernel_grad_phi(st.cache_cross, prob.d2_cross.d2[j], p.phi[j]);
      dKn -= ortho_corr_dphi(st.oe, dW, dw);
    }
    const double raw = st.alpha_n.dot(dKn * st.alpha_n) / (2.0 * st.nu_hat) -
                       0.5 * (gamma_inv.array() * dKn.array()).sum();
    r.grad[L.off_phi() + j] = raw * p.phi[j];
  }

  if (!prob.variant.latent_noise) return r;

  // Shared chain: d logL / d lambda, then back through the smoother.
  VectorXd u = mean_field_dlambda(prob, st);
  const VectorXd lu = st.lam.cwiseProduct(u);
  const VectorXd ainv =
      dz.a.cast<double>().cwiseInverse();
  const MatrixXd gamma_g_inv =
      st.nf.gamma.llt.solve(MatrixXd::Identity(n, n));

  // delta block
  r.grad.segment(L.off_delta(), n) =
      st.nf.gamma.llt.solve(st.nf.Kg * lu) - st.nf.alpha / st.nu_g_hat;

  // noise-kernel lengthscales
  for (int j = 0; j < L.p2; ++j) {
    const MatrixXd dKg =
        kernel_grad_phi(st.cache_g, prob.d2_train.d2[j], p.phi_g[j]);
    const VectorXd t = dKg * st.nf.alpha;
    const VectorXd v = t - st.nf.Kg * st.nf.gamma.llt.solve(t);
    const double raw = v.dot(lu) + st.nf.alpha.dot(t) / (2.0 * st.nu_g_hat) -
                       0.5 * (gamma_g_inv.array() * dKg.array()).sum();
    r.grad[L.off_phi_g() + j] = raw * p.phi_g[j];
  }

  // nugget scale g
  {
    const VectorXd t = ainv.cwiseProduct(st.nf.alpha);  // A^{-1} alpha
    const VectorXd v = -(st.nf.Kg * st.nf.gamma.llt.solve(t));
    const double tr = gamma_g_inv.diagonal().dot(ainv);
    const double raw =
        v.dot(lu) + st.nf.alpha.dot(t) / (2.0 * st.nu_g_hat) - 0.5 * tr;
    r.grad[L.off_g()] = raw * p.g;
  }

  return r;
}

}  // namespace hetcal
