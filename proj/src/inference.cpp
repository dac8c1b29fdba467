#include "hetcal/inference.hpp"

#include <cmath>
#include <limits>

#include "hetcal/stats.hpp"

namespace hetcal {

namespace {

VectorXd expand_vec(const VectorXd& v, const VectorXi& a) {
  const int N = a.sum();
  VectorXd out(N);
  for (int i = 0, k = 0; i < v.size(); ++i)
    for (int r = 0; r < a[i]; ++r) out[k++] = v[i];
  return out;
}

MatrixXd expand_sym(const MatrixXd& M, const VectorXi& a) {
  const int n = static_cast<int>(M.rows());
  const int N = a.sum();
  std::vector<int> gi(N);
  for (int i = 0, k = 0; i < n; ++i)
    for (int r = 0; r < a[i]; ++r) gi[k++] = i;
  MatrixXd out(N, N);
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l) out(k, l) = M(gi[k], gi[l]);
  return out;
}

}  // namespace

std::string InfoLayout::coord_name(int i) const {
  if (i < off_psi()) return "theta" + std::to_string(i + 1);
  if (i < off_nu()) return "phi" + std::to_string(i - off_psi() + 1);
  if (i == off_nu()) return "nu";
  if (!latent) return "?";
  if (i < off_g()) return "phi_g" + std::to_string(i - off_phi_g() + 1);
  if (i == off_g()) return "g";
  if (i == off_nu_g()) return "nu_g";
  return "delta" + std::to_string(i - off_delta() + 1);
}

InfoMatrix information_matrix(const CalibProblem& prob,
                              const HetCalibParams& p) {
  const ReplicatedDesign& dz = *prob.design;
  const int n = dz.n();
  const CalibState st = calib_state(prob, p);
  if (st.Kn.rows() != n)
    throw NumericError("information_matrix: parameter point is degenerate");
  if (!(p.nu > 0.0))
    throw ConfigError("information_matrix: nu must be positive");
  if (prob.variant.latent_noise && !(p.nu_g > 0.0))
    throw ConfigError("information_matrix: nu_g must be positive");

  InfoMatrix info;
  InfoLayout& L = info.layout;
  L.q = prob.model->q();
  L.p1 = static_cast<int>(p.phi.size());
  L.latent = prob.variant.latent_noise;
  if (L.latent) {
    L.p2 = static_cast<int>(p.phi_g.size());
    L.n = n;
  }
  const int m = L.dim();
  info.B = MatrixXd::Zero(m, m);

  // Dense expanded covariance Sigma = nu (K_N + Lambda_N).
  MatrixXd Sigma = p.nu * expand_sym(st.Kn, dz.a);
  Sigma.diagonal() += p.nu * expand_vec(st.lam, dz.a);
  Chol sig = chol_with_jitter(Sigma, 0.0, 1e-10, "Sigma (information)");

  // Noise-side shared pieces.
  const VectorXd ainv = dz.a.cast<double>().cwiseInverse();
  MatrixXd KgGinv;              // K_g Gamma_g^{-1}
  std::vector<MatrixXd> dKg(L.p2);
  if (L.latent) {
    KgGinv = st.nf.gamma.llt.solve(st.nf.Kg).transpose();
    for (int j = 0; j < L.p2; ++j)
      dKg[j] = kernel_grad_phi(st.cache_g, prob.d2_train.d2[j], p.phi_g[j]);
  }

  // d Sigma / d omega_i, realized as Sigma^{-1}-premultiplied T_i for the
  // trace formula (B_0)_ij = tr(T_i T_j) / 2; empty T marks a zero block.
  std::vector<MatrixXd> T(m);
  auto push_sym = [&](int i, const MatrixXd& dKn) {
    T[i] = sig.llt.solve(p.nu * expand_sym(dKn, dz.a));
  };
  auto push_diag = [&](int i, const VectorXd& dlam) {
    MatrixXd D = MatrixXd::Zero(Sigma.rows(), Sigma.cols());
    D.diagonal() = p.nu * expand_vec(dlam, dz.a);
    T[i] = sig.llt.solve(D);
  };

  for (int j = 0; j < L.q; ++j) {
    if (prob.variant.orthogonal && !st.oe.projection_disabled) {
      const MatrixXd dF =
          prob.model->hess_col_batch(prob.basis->xi, p.theta, j);
      push_sym(L.off_theta() + j, -ortho_corr_dtheta(st.oe, dF));
    }
  }
  for (int j = 0; j < L.p1; ++j) {
    MatrixXd dKn =
        kernel_grad_phi(st.cache_train, prob.d2_train.d2[j], p.phi[j]);
    if (prob.variant.orthogonal && !st.oe.projection_disabled) {
      const MatrixXd dW =
          kernel_grad_phi(st.cache_xi, prob.basis->d2_xi.d2[j], p.phi[j]);
      const MatrixXd dw =
          kernel_grad_phi(st.cache_cross, prob.d2_cross.d2[j], p.phi[j]);
      dKn -= ortho_corr_dphi(st.oe, dW, dw);
    }
    push_sym(L.off_psi() + j, dKn);
  }
  T[L.off_nu()] = sig.llt.solve(Sigma / p.nu);
  if (L.latent) {
    for (int j = 0; j < L.p2; ++j) {
      const VectorXd t = dKg[j] * st.nf.alpha;
      push_diag(L.off_phi_g() + j, st.lam.cwiseProduct(t - KgGinv * t));
    }
    push_diag(L.off_g(),
              -st.lam.cwiseProduct(KgGinv * ainv.cwiseProduct(st.nf.alpha)));
    // d Sigma / d nu_g = 0: T stays empty.
    const MatrixXd dlam_ddelta =
        st.lam.asDiagonal() * KgGinv;  // column i: d lambda / d delta_i
    for (int i = 0; i < n; ++i)
      push_diag(L.off_delta() + i, dlam_ddelta.col(i));
  }

  for (int i = 0; i < m; ++i) {
    if (!T[i].size()) continue;
    for (int j = 0; j <= i; ++j) {
      if (!T[j].size()) continue;
      const double b0 =
          0.5 * (T[i].array() * T[j].transpose().array()).sum();
      info.B(i, j) += b0;
      if (j != i) info.B(j, i) += b0;
    }
  }

  // B_11: model-gradient information on the theta block.
  {
    const MatrixXd dfbar = prob.model->grad_batch(dz.X, p.theta);
    MatrixXd FN(Sigma.rows(), L.q);
    for (int j = 0; j < L.q; ++j) FN.col(j) = expand_vec(dfbar.col(j), dz.a);
    const MatrixXd B11 = FN.transpose() * sig.llt.solve(FN);
    info.B.block(0, 0, L.q, L.q) += B11;
  }

  if (L.latent) {
    // V = nu_g Gamma_g blocks over omega_3 = (phi_g, g, nu_g) and delta.
    const int m3 = L.p2 + 2;
    const MatrixXd gamma_g =
        st.nf.Kg + MatrixXd((p.g * ainv).asDiagonal());
    const MatrixXd V = p.nu_g * gamma_g;
    Chol vchol = chol_with_jitter(V, 0.0, 1e-10, "V (information)");
    const VectorXd beta = st.nf.alpha / p.nu_g;  // V^{-1} Delta

    std::vector<MatrixXd> Vd(m3), W(m3);  // V_j and V^{-1} V_j
    std::vector<VectorXd> c(m3), vc(m3);  // V_j beta and V^{-1} V_j beta
    for (int j = 0; j < m3; ++j) {
      if (j < L.p2) Vd[j] = p.nu_g * dKg[j];
      else if (j == L.p2) Vd[j] = MatrixXd((p.nu_g * ainv).asDiagonal());
      else Vd[j] = gamma_g;
      W[j] = vchol.llt.solve(Vd[j]);
      c[j] = Vd[j] * beta;
      vc[j] = vchol.llt.solve(c[j]);
    }
    auto v_second = [&](int i, int j) -> MatrixXd {
      // nonzero second derivatives: (phi,phi), (phi,nu_g), (g,nu_g)
      const int hi = std::max(i, j), lo = std::min(i, j);
      if (hi < L.p2)
        return p.nu_g * kernel_hess_phi(st.cache_g, prob.d2_train.d2[lo],
                                        p.phi_g[lo], prob.d2_train.d2[hi],
                                        p.phi_g[hi], lo == hi);
      if (hi == L.p2 + 1 && lo < L.p2) return dKg[lo];
      if (hi == L.p2 + 1 && lo == L.p2)
        return MatrixXd(ainv.asDiagonal());
      return MatrixXd();
    };

    const int o3 = L.off_phi_g();
    for (int i = 0; i < m3; ++i) {
      for (int j = 0; j <= i; ++j) {
        double b = -0.5 * (W[i].array() * W[j].transpose().array()).sum();
        b += c[i].dot(vc[j]);  // quadratic part of Delta' V^{ij} Delta / 2
        const MatrixXd Vij = v_second(i, j);
        if (Vij.size()) {
          b += 0.5 * vchol.llt.solve(Vij).trace();
          b -= 0.5 * beta.dot(Vij * beta);
        }
        info.B(o3 + i, o3 + j) += b;
        if (j != i) info.B(o3 + j, o3 + i) += b;
      }
    }
    // B_43: cross of delta with omega_3; column j is -V^{-1} V_j beta.
    for (int j = 0; j < m3; ++j) {
      info.B.block(L.off_delta(), o3 + j, n, 1) -= vc[j];
      info.B.block(o3 + j, L.off_delta(), 1, n) -= vc[j].transpose();
    }
    // B_44 = V^{-1}.
    info.B.block(L.off_delta(), L.off_delta(), n, n) +=
        vchol.llt.solve(MatrixXd::Identity(n, n));
  }

  info.B = 0.5 * (info.B + info.B.transpose()).eval();
  return info;
}

namespace {

std::vector<int> keep_indices(int m, const std::vector<int>& pinned) {
  std::vector<bool> drop(m, false);
  for (int i : pinned)
    if (i >= 0 && i < m) drop[i] = true;
  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (!drop[i]) keep.push_back(i);
  return keep;
}

MatrixXd submatrix(const MatrixXd& B, const std::vector<int>& rows,
                   const std::vector<int>& cols) {
  MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = B(rows[i], cols[j]);
  return out;
}

MatrixXd invert_pd(const MatrixXd& B, const char* what) {
  Eigen::LLT<MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B);
    throw NumericError(std::string(what) +
                       ": matrix is not positive definite (smallest "
                       "eigenvalue " +
                       format_double(es.eigenvalues().minCoeff()) + ")");
  }
  return llt.solve(MatrixXd::Identity(B.rows(), B.cols()));
}

}  // namespace

ConfidenceReport confidence_region(const InfoMatrix& info,
                                   const HetCalibParams& p, double alpha,
                                   const std::vector<int>& pinned) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("confidence_region: alpha must be in (0,1)");
  const InfoLayout& L = info.layout;
  const std::vector<int> keep = keep_indices(L.dim(), pinned);
  const MatrixXd Binv =
      invert_pd(submatrix(info.B, keep, keep), "information matrix");

  ConfidenceReport rep;
  rep.alpha = alpha;
  rep.z = normal_two_sided_z(alpha);
  rep.chi2_radius = chi2_quantile(1.0 - alpha, L.q);
  rep.theta_hat = p.theta;
  rep.se = VectorXd::Constant(L.q, std::numeric_limits<double>::quiet_NaN());
  rep.intervals.setConstant(L.q, 2,
                            std::numeric_limits<double>::quiet_NaN());
  rep.theta_cov.setConstant(L.q, L.q,
                            std::numeric_limits<double>::quiet_NaN());
  for (int i : pinned) rep.conditional_on.push_back(L.coord_name(i));

  // positions of the theta coordinates inside the reduced matrix
  std::vector<int> pos(L.q, -1);
  for (std::size_t k = 0; k < keep.size(); ++k)
    if (keep[k] < L.q) pos[keep[k]] = static_cast<int>(k);
  for (int i = 0; i < L.q; ++i) {
    if (pos[i] < 0) continue;
    rep.se[i] = std::sqrt(Binv(pos[i], pos[i]));
    rep.intervals(i, 0) = p.theta[i] - rep.z * rep.se[i];
    rep.intervals(i, 1) = p.theta[i] + rep.z * rep.se[i];
    for (int j = 0; j < L.q; ++j)
      if (pos[j] >= 0) rep.theta_cov(i, j) = Binv(pos[i], pos[j]);
  }
  return rep;
}

HetTestResult het_test(const InfoMatrix& info, const HetCalibParams& p,
                       const std::vector<int>& pinned) {
  const InfoLayout& L = info.layout;
  if (!L.latent)
    throw ConfigError(
        "het_test: defined only for latent-noise (heteroscedastic) variants");
  const std::vector<int> keep = keep_indices(L.dim(), pinned);
  std::vector<int> didx, rest;
  for (int k : keep)
    (k >= L.off_delta() ? didx : rest).push_back(k);
  if (static_cast<int>(didx.size()) != L.n)
    throw ConfigError("het_test: delta coordinates must not be profiled out");

  // [ (B^{-1})_{Delta Delta} ]^{-1} via the Schur complement of the block.
  const MatrixXd Bdd = submatrix(info.B, didx, didx);
  MatrixXd S = Bdd;
  if (!rest.empty()) {
    const MatrixXd Bdr = submatrix(info.B, didx, rest);
    const MatrixXd Brr = submatrix(info.B, rest, rest);
    Eigen::LLT<MatrixXd> llt(Brr);
    if (llt.info() != Eigen::Success)
      throw NumericError("het_test: non-delta information block not PD");
    S -= Bdr * llt.solve(Bdr.transpose());
  }

  HetTestResult out;
  out.dof = L.n;
  out.statistic = p.delta.dot(S * p.delta);
  if (out.statistic < 0.0 && out.statistic > -1e-10) out.statistic = 0.0;
  if (out.statistic < 0.0)
    throw NumericError("het_test: negative statistic (information not PSD)");
  out.p_value = chi2_sf(out.statistic, static_cast<double>(out.dof));
  for (int i : pinned) out.conditional_on.push_back(L.coord_name(i));
  return out;
}

std::vector<int> bound_pinned_coords(const FitResult& fit,
                                     const InfoLayout& L) {
  std::vector<int> pinned;
  auto at_edge = [](double x, double b) {
    return std::abs(x - b) <= 1e-8 * std::max(1.0, std::abs(b));
  };
  for (int j = 0; j < L.p1; ++j)
    if (at_edge(fit.params.phi[j], fit.bounds.phi(j, 0)) ||
        at_edge(fit.params.phi[j], fit.bounds.phi(j, 1)))
      pinned.push_back(L.off_psi() + j);
  if (L.latent) {
    for (int j = 0; j < L.p2; ++j)
      if (at_edge(fit.params.phi_g[j], fit.bounds.phi_g(j, 0)) ||
          at_edge(fit.params.phi_g[j], fit.bounds.phi_g(j, 1)))
        pinned.push_back(L.off_phi_g() + j);
    if (at_edge(fit.params.g, fit.bounds.g_lo) ||
        at_edge(fit.params.g, fit.bounds.g_hi))
      pinned.push_back(L.off_g());
  }
  return pinned;
}

ConfidenceReport confidence_region(const FitResult& fit, double alpha) {
  if (fit.degenerate_noise) {
    // The noise field is pinned at its delta = 0 limit, where the latent
    // blocks of the information matrix are undefined; the interval comes
    // from the homoscedastic reduction instead.
    FitResult hom = fit;
    hom.degenerate_noise = false;
    hom.variant.latent_noise = false;
    hom.params.nu_g = 1.0;
    ConfidenceReport rep = confidence_region(hom, alpha);
    rep.conditional_on.push_back("noise field (degenerate delta = 0 limit)");
    return rep;
  }
  const CalibProblem prob = fit.problem();
  const InfoMatrix info = information_matrix(prob, fit.params);
  const std::vector<int> pinned = bound_pinned_coords(fit, info.layout);
  ConfidenceReport rep = confidence_region(info, fit.params, alpha, pinned);
  for (int j = 0; j < info.layout.q; ++j)
    if (std::abs(fit.params.theta[j] - fit.bounds.theta(j, 0)) < 1e-10 ||
        std::abs(fit.params.theta[j] - fit.bounds.theta(j, 1)) < 1e-10)
      rep.conditional_on.push_back("theta" + std::to_string(j + 1) +
                                   " at search bound");
  return rep;
}

HetTestResult het_test(const FitResult& fit) {
  if (!fit.variant.latent_noise)
    throw ConfigError(
        "het_test: defined only for latent-noise (heteroscedastic) variants");
  if (fit.degenerate_noise) {
    // delta-hat = 0 exactly, so the quadratic form is 0 for any weighting:
    // no evidence against homoscedasticity.
    HetTestResult r;
    r.statistic = 0.0;
    r.dof = fit.design.n();
    r.p_value = 1.0;
    r.conditional_on.push_back("degenerate noise field (delta = 0 limit)");
    return r;
  }
  const CalibProblem prob = fit.problem();
  const InfoMatrix info = information_matrix(prob, fit.params);
  return het_test(info, fit.params, bound_pinned_coords(fit, info.layout));
}

}  // namespace hetcal
