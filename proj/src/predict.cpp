#include "hetcal/predict.hpp"

#include <cmath>

#include "hetcal/csvio.hpp"

namespace hetcal {

std::vector<PredictiveDistribution> predict_at(const CalibProblem& prob,
                                               const HetCalibParams& p,
                                               const MatrixXd& Xnew) {
  if (Xnew.cols() != prob.design->d())
    throw ConfigError("predict: Xnew has " + std::to_string(Xnew.cols()) +
                      " columns, design has " +
                      std::to_string(prob.design->d()));
  const CalibState st = calib_state(prob, p);
  if (!st.ok)
    throw NumericError("predict: parameters are at a degenerate point");
  const int n_new = static_cast<int>(Xnew.rows());

  const MatrixXd Xnew_k = prob.scaler.apply(Xnew);
  const PairwiseSq d2x = pairwise_sq(prob.Xk, Xnew_k);
  MatrixXd kx = kernel_eval_cache(prob.mean_family, d2x, p.phi).value;
  VectorXd kxx = VectorXd::Ones(n_new);  // unit-diagonal base kernels
  if (prob.variant.orthogonal && !st.oe.projection_disabled) {
    const PairwiseSq d2s = pairwise_sq(prob.scaler.apply(prob.basis->xi),
                                       Xnew_k);
    const MatrixXd w_star =
        kernel_eval_cache(prob.mean_family, d2s, p.phi).value;
    const MatrixXd B_star = st.oe.F.transpose() * w_star;  // q x n*
    kx -= ortho_cross_correction(st.oe, B_star);
    kxx -= ortho_diag_correction(st.oe, B_star);
  }

  // Posterior pieces in the n-dimensional reduced form.
  const VectorXd disc_mean = kx.transpose() * st.alpha_n;
  const MatrixXd gamma_solve = st.gamma_n.llt.solve(kx);
  const VectorXd quad =
      (kx.array() * gamma_solve.array()).colwise().sum().transpose();

  VectorXd log_lam_new = VectorXd::Zero(n_new);
  if (prob.variant.latent_noise) {
    const MatrixXd kg_x =
        kernel_eval_cache(prob.noise_family, d2x, p.phi_g).value;
    log_lam_new = kg_x.transpose() * st.nf.alpha;
  }

  const VectorXd fx = prob.model->eval_batch(Xnew, p.theta);
  std::vector<PredictiveDistribution> out(n_new);
  for (int i = 0; i < n_new; ++i) {
    PredictiveDistribution& pd = out[i];
    pd.x = Xnew.row(i).transpose();
    pd.model_value = fx[i];
    pd.discrepancy_mean = disc_mean[i];
    pd.mean = fx[i] + disc_mean[i];
    pd.discrepancy_variance = st.nu_hat * (kxx[i] - quad[i]);
    pd.noise_variance = st.nu_hat * std::exp(log_lam_new[i]);
    pd.total_variance = pd.discrepancy_variance + pd.noise_variance;
  }
  return out;
}

std::vector<PredictiveDistribution> predict(const FitResult& fit,
                                            const MatrixXd& Xnew) {
  if (fit.degenerate_noise) {
    // delta = 0 limit: the noise field is flat, so predictions reduce to the
    // homoscedastic view (lambda = 1 everywhere, noise variance nu_hat).
    FitResult hom = fit;
    hom.degenerate_noise = false;
    hom.variant.latent_noise = false;
    hom.params.nu_g = 1.0;
    return predict(hom, Xnew);
  }
  const CalibProblem prob = fit.problem();
  return predict_at(prob, fit.params, Xnew);
}

void write_predictions_csv(const std::vector<PredictiveDistribution>& preds,
                           const std::string& path) {
  CsvTable t;
  const int d = preds.empty() ? 0 : static_cast<int>(preds.front().x.size());
  for (int k = 0; k < d; ++k) t.columns.push_back("x" + std::to_string(k + 1));
  for (const char* c : {"mean", "sd_total", "sd_noise", "model",
                        "discrepancy", "lo95", "hi95"})
    t.columns.push_back(c);
  for (const auto& pd : preds) {
    std::vector<double> row;
    for (int k = 0; k < d; ++k) row.push_back(pd.x[k]);
    const double sd_total = std::sqrt(pd.total_variance);
    row.push_back(pd.mean);
    row.push_back(sd_total);
    row.push_back(std::sqrt(pd.noise_variance));
    row.push_back(pd.model_value);
    row.push_back(pd.discrepancy_mean);
    row.push_back(pd.mean - 1.96 * sd_total);
    row.push_back(pd.mean + 1.96 * sd_total);
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

double rmse(const std::vector<PredictiveDistribution>& preds,
            const VectorXd& truth) {
  if (static_cast<int>(preds.size()) != truth.size())
    throw ConfigError("rmse: prediction and truth lengths differ");
  if (preds.empty()) throw ConfigError("rmse: empty grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = truth[static_cast<int>(i)] - preds[i].mean;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

double predictive_score(const std::vector<PredictiveDistribution>& preds,
                        const VectorXd& zeta, const VectorXd& r) {
  if (static_cast<int>(preds.size()) != zeta.size() || zeta.size() != r.size())
    throw ConfigError("predictive_score: grid lengths differ");
  if (preds.empty()) throw ConfigError("predictive_score: empty grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double s2 = preds[i].total_variance;
    if (!(s2 > 0.0))
      throw NumericError("predictive_score: non-positive predictive variance");
    const int k = static_cast<int>(i);
    const double e = zeta[k] - preds[i].mean;
    acc += -e * e / s2 - r[k] / s2 - std::log(s2);
  }
  return acc / static_cast<double>(preds.size());
}

}  // namespace hetcal
