#include "hetcal/fit.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "hetcal/baselines.hpp"
#include "hetcal/lhs.hpp"
#include "hetcal/rng.hpp"

namespace hetcal {

namespace {

// Lengthscale box per input dimension: [0.05, 5] times the coordinate range
// seen by the kernel (range is 1 when inputs are min-max scaled).
MatrixXd lengthscale_box(const ReplicatedDesign& design, bool scaled) {
  const int d = design.d();
  MatrixXd b(d, 2);
  for (int k = 0; k < d; ++k) {
    const double range =
        scaled ? 1.0 : design.bounds(k, 1) - design.bounds(k, 0);
    b(k, 0) = 0.05 * range;
    b(k, 1) = 5.0 * range;
  }
  return b;
}

}  // namespace

CalibProblem FitResult::problem() const {
  return make_problem(design, model, variant, mean_family, noise_family,
                      jitter, ortho, scaler, params.theta, params.phi, basis);
}

ParamBounds default_bounds(const ReplicatedDesign& design,
                           const ComputerModel& model, const FitConfig& cfg) {
  ParamBounds b;
  b.theta = model.theta_bounds();
  b.phi = cfg.phi_bounds.size() ? cfg.phi_bounds
                                : lengthscale_box(design, cfg.scale_inputs);
  if (variant_toggles(cfg.estimator).latent_noise)
    b.phi_g = cfg.phi_g_bounds.size()
                  ? cfg.phi_g_bounds
                  : lengthscale_box(design, cfg.scale_inputs);
  return b;
}

FitResult fit_variant(const ReplicatedDesign& design,
                      const ComputerModel& model, const FitConfig& cfg) {
  if (cfg.starts < 1) throw ConfigError("fit_variant: starts must be >= 1");
  if (cfg.estimator == EstimatorKind::Wls)
    throw ConfigError("fit_variant: WLS has no GP likelihood; use fit_wls");

  FitResult fr{.estimator = cfg.estimator,
               .variant = variant_toggles(cfg.estimator),
               .mean_family = cfg.mean_family,
               .noise_family = cfg.noise_family,
               .design = design,
               .model = model,
               .scaler = make_scaler(design.bounds, cfg.scale_inputs),
               .ortho = cfg.ortho,
               .basis = nullptr,
               .jitter = cfg.jitter};
  fr.bounds = default_bounds(design, model, cfg);

  VectorXd theta0 = cfg.theta0.size()
                        ? cfg.theta0
                        : VectorXd(0.5 * (fr.bounds.theta.col(0) +
                                          fr.bounds.theta.col(1)));
  VectorXd phi0 = cfg.phi0.size()
                      ? cfg.phi0
                      : VectorXd(0.5 * (fr.bounds.phi.col(0) +
                                        fr.bounds.phi.col(1)));

  CalibProblem prob =
      make_problem(design, model, fr.variant, cfg.mean_family,
                   cfg.noise_family, cfg.jitter, cfg.ortho, fr.scaler,
                   theta0, phi0);
  fr.basis = prob.basis;
  if (fr.basis && fr.basis->conditioning_warning)
    fr.warnings.push_back(
        "orthogonal basis has fewer than " +
        std::to_string(cfg.ortho.min_m_per_q) +
        " points per parameter; projection may be poorly conditioned");

  const ParamLayout L = prob.layout();
  VectorXd lo, hi;
  pack_bounds(fr.bounds, L, &lo, &hi);

  const VectorXd delta0 = L.latent ? delta_init(design) : VectorXd();

  // Latent variants are guarded by (and warm-started from) their
  // homoscedastic counterpart, so that one is fitted first.
  std::optional<FitResult> hom;
  if (L.latent) {
    FitConfig hom_cfg = cfg;
    hom_cfg.estimator = fr.variant.orthogonal ? EstimatorKind::HomOgp
                                              : EstimatorKind::HomGp;
    try {
      hom = fit_variant(design, model, hom_cfg);
    } catch (const NumericError&) {
      // Counterpart failed; the latent fit stands on its own.
    }
  }

  // Starts, most informed first: data-driven theta warm starts (the
  // homoscedastic counterpart's optimum for latent variants, then a
  // unit-weight least-squares estimate; both keep the center lengthscales,
  // which hom fits distort by absorbing noise structure), the heuristic box
  // center, then LHS points over the packed box excluding delta, which
  // always begins at its empirical initialization.  Warm starts are omitted
  // when the caller pinned theta0.
  std::vector<VectorXd> inits;
  HetCalibParams p0;
  p0.theta = theta0;
  p0.phi = phi0;
  if (L.latent) {
    p0.phi_g = cfg.phi_g0.size()
                   ? cfg.phi_g0
                   : VectorXd(0.5 * (fr.bounds.phi_g.col(0) +
                                     fr.bounds.phi_g.col(1)));
    p0.g = cfg.g0;
    p0.delta = delta0;
  }
  if (cfg.theta0.size() == 0) {
    if (L.latent && hom) {
      HetCalibParams w = p0;
      w.theta = hom->params.theta;
      inits.push_back(pack_params(w, L));
    }
    try {
      const WlsResult wls =
          fit_wls(design, model, WlsWeights::Unit, VectorXd(), 3,
                  derive_seed(cfg.seed, 0x715fu));
      HetCalibParams w = p0;
      w.theta = wls.theta;
      inits.push_back(pack_params(w, L));
    } catch (const Error&) {
      // No usable least-squares start; the center takes its place.
    }
  }
  if (static_cast<int>(inits.size()) < cfg.starts || inits.empty())
    inits.push_back(pack_params(p0, L));
  if (const int extra = cfg.starts - static_cast<int>(inits.size());
      extra > 0) {
    const int head = L.q + L.p1 + (L.latent ? L.p2 + 1 : 0);
    Rng rng(derive_seed(cfg.seed, 0x6d73u));
    const MatrixXd unit = lhs_maximin_unit(extra, head, rng);
    for (int s = 0; s < extra; ++s) {
      VectorXd x = pack_params(p0, L);
      for (int j = 0; j < head; ++j)
        x[j] = lo[j] + unit(s, j) * (hi[j] - lo[j]);
      inits.push_back(std::move(x));
    }
  }

  ObjectiveFn objective = [&](const VectorXd& x, VectorXd* grad) -> double {
    const HetCalibParams p = unpack_params(x, L);
    try {
      if (grad) {
        LikelihoodResult r = log_likelihood_grad(prob, p);
        if (!r.ok) {
          grad->setZero(L.dim());
          return std::numeric_limits<double>::infinity();
        }
        *grad = -r.grad;
        return -r.value;
      }
      LikelihoodResult r = log_likelihood(prob, p);
      return r.ok ? -r.value : std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      if (grad) grad->setZero(L.dim());
      return std::numeric_limits<double>::infinity();
    }
  };

  // The joint objective is unbounded along delta -> 0: nu_g_hat -> 0 makes
  // the variance field diverge while the mean field flattens to the
  // homoscedastic value, so a start can ride that ray to an arbitrarily
  // large value that carries no information about the noise surface.  Two
  // admissibility filters reject such trajectories start by start: a plug-in
  // latent scale below kNuGCollapse ("collapsed"; legitimate optima sit
  // orders of magnitude higher), and a mean field that fails to beat the
  // homoscedastic optimum ("hom_dominated").  The second one also rejects
  // modes whose variance field subsidizes a worse explanation of the data
  // itself: a latent noise surface is only evidence when it improves the
  // data likelihood, where the lambda = 1 nesting makes the comparison
  // meaningful.
  constexpr double kNuGCollapse = 1e-6;

  VectorXd best_x;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < inits.size(); ++s) {
    OptimResult opt = minimize_box(objective, inits[s], lo, hi, cfg.optim);
    StartReport rep;
    rep.x0 = inits[s];
    rep.value = -opt.value;
    rep.iters = opt.iters;
    rep.evals = opt.evals;
    rep.converged = opt.converged;
    rep.status = opt.status;
    rep.ok = std::isfinite(opt.value);
    if (rep.ok && L.latent) {
      double nu_g_end = 0.0;
      double mean_field_end = -std::numeric_limits<double>::infinity();
      try {
        const CalibState st = calib_state(prob, unpack_params(opt.x, L));
        if (st.ok) {
          nu_g_end = st.nu_g_hat;
          mean_field_end = st.mean_field;
        }
      } catch (const NumericError&) {
      }
      if (nu_g_end < kNuGCollapse) {
        rep.ok = false;
        rep.status = "collapsed";
      } else if (hom && !(mean_field_end > hom->loglik)) {
        rep.ok = false;
        rep.status = "hom_dominated";
      }
    }
    fr.starts.push_back(rep);
    if (rep.ok && rep.value > best_value) {
      best_value = rep.value;
      best_x = opt.x;
      fr.best_start = static_cast<int>(s);
    }
  }

  // Final selection for latent variants: the heteroscedastic solution stands
  // only when an admissible start exists and its joint value also exceeds
  // the homoscedastic optimum (which keeps the variant lattice monotone).
  // Otherwise the fit returns the delta = 0 member of the family,
  // represented by the counterpart's optimum.
  if (L.latent && hom &&
      (fr.best_start < 0 || !(best_value > hom->loglik))) {
    fr.warnings.push_back(
        fr.best_start < 0
            ? "every start collapsed or was dominated by the homoscedastic "
              "fit; returning the delta = 0 limit"
            : "heteroscedastic optimum did not exceed the homoscedastic "
              "likelihood; returning its delta = 0 limit");
    for (const auto& w : hom->warnings) fr.warnings.push_back(w);
    HetCalibParams p = unpack_params(inits.front(), L);
    p.theta = hom->params.theta;
    p.phi = hom->params.phi;
    p.nu = hom->params.nu;
    p.nu_g = 0.0;
    p.delta = VectorXd::Zero(design.n());
    fr.params = p;
    fr.degenerate_noise = true;
    fr.loglik = hom->loglik;
    fr.mean_field = hom->mean_field;
    fr.variance_field = std::numeric_limits<double>::quiet_NaN();
    StartReport rep;
    rep.x0 = pack_params(p, L);
    rep.value = hom->loglik;
    if (hom->best_start >= 0) {
      rep.iters = hom->starts[hom->best_start].iters;
      rep.evals = hom->starts[hom->best_start].evals;
      rep.converged = hom->starts[hom->best_start].converged;
    }
    rep.ok = true;
    rep.status = "homoscedastic_limit";
    fr.starts.push_back(rep);
    fr.best_start = static_cast<int>(fr.starts.size()) - 1;
    return fr;
  }
  if (fr.best_start < 0)
    throw NumericError(
        "fit_variant: every start ended at a degenerate likelihood point");

  fr.params = unpack_params(best_x, L);
  const CalibState st = calib_state(prob, fr.params);
  if (!st.ok)
    throw NumericError("fit_variant: optimum re-evaluation is degenerate");
  fr.params.nu = st.nu_hat;
  fr.params.nu_g = L.latent ? st.nu_g_hat : 1.0;
  fr.loglik = st.value;
  fr.mean_field = st.mean_field;
  fr.variance_field = st.variance_field;
  if (st.gamma_n.jitter > 0.0)
    fr.warnings.push_back("Gamma_n required rescue jitter " +
                          format_double(st.gamma_n.jitter) +
                          " at the optimum");

  int failed = 0;
  for (const auto& rep : fr.starts)
    if (!rep.ok) ++failed;
  if (failed)
    fr.warnings.push_back(std::to_string(failed) + " of " +
                          std::to_string(fr.starts.size()) +
                          " starts ended degenerate");
  return fr;
}

}  // namespace hetcal
