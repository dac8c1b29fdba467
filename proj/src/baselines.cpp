#include "hetcal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hetcal/lhs.hpp"
#include "hetcal/rng.hpp"

namespace hetcal {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, VectorXd* x, VectorXd* w) {
  x->resize(n);
  w->resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    (*x)[i] = -z;
    (*x)[n - 1 - i] = z;
    (*w)[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    (*w)[n - 1 - i] = (*w)[i];
  }
}

// Composite rule: panels of up to 20 nodes until nodes_per_dim is reached.
void composite_gl(double lo, double hi, int nodes, VectorXd* x, VectorXd* w) {
  const int per_panel = std::min(nodes, 20);
  const int panels = (nodes + per_panel - 1) / per_panel;
  VectorXd xr, wr;
  gauss_legendre(per_panel, &xr, &wr);
  x->resize(panels * per_panel);
  w->resize(panels * per_panel);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    for (int i = 0; i < per_panel; ++i) {
      (*x)[p * per_panel + i] = a + 0.5 * h * (xr[i] + 1.0);
      (*w)[p * per_panel + i] = 0.5 * h * wr[i];
    }
  }
}

}  // namespace

QuadratureGrid quadrature_grid(const MatrixXd& bounds, int nodes_per_dim) {
  const int d = static_cast<int>(bounds.rows());
  if (d < 1 || bounds.cols() != 2)
    throw ConfigError("quadrature_grid: bounds must be d x 2");
  if (nodes_per_dim < 2)
    throw ConfigError("quadrature_grid: need at least 2 nodes per dimension");
  std::vector<VectorXd> xs(d), ws(d);
  long long total = 1;
  for (int k = 0; k < d; ++k) {
    composite_gl(bounds(k, 0), bounds(k, 1), nodes_per_dim, &xs[k], &ws[k]);
    total *= xs[k].size();
    if (total > 20'000'000)
      throw ConfigError("quadrature_grid: tensor grid too large");
  }
  QuadratureGrid g;
  g.X.resize(total, d);
  g.w.resize(total);
  std::vector<int> idx(d, 0);
  for (long long r = 0; r < total; ++r) {
    double wt = 1.0;
    for (int k = 0; k < d; ++k) {
      g.X(r, k) = xs[k][idx[k]];
      wt *= ws[k][idx[k]];
    }
    g.w[r] = wt;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < xs[k].size()) break;
      idx[k] = 0;
    }
  }
  return g;
}

const char* wls_weights_name(WlsWeights w) {
  switch (w) {
    case WlsWeights::SampleVariance: return "sample-variance";
    case WlsWeights::KnownR: return "known-r";
    case WlsWeights::Unit: return "unit";
  }
  return "?";
}

namespace {

// Shared multistart minimization over the model's theta box.  The surface is
// often heavily multimodal (oscillatory models), so instead of descending
// from arbitrary draws the candidates come from a cheap space-filling pool
// ranked by objective value; the best `starts` of them get polished.
WlsResult minimize_theta(const ComputerModel& model, const ObjectiveFn& fn,
                         int starts, std::uint64_t seed,
                         const OptimOptions& opts) {
  const int q = model.q();
  const VectorXd lo = model.theta_bounds().col(0);
  const VectorXd hi = model.theta_bounds().col(1);
  std::vector<std::pair<double, VectorXd>> pool;
  pool.emplace_back(std::numeric_limits<double>::infinity(),
                    VectorXd(0.5 * (lo + hi)));
  {
    Rng rng(derive_seed(seed, 0x776cu));
    const int extra = std::max(64 * q, 4 * starts);
    const MatrixXd unit = lhs_maximin_unit(extra, q, rng);
    for (int s = 0; s < extra; ++s)
      pool.emplace_back(std::numeric_limits<double>::infinity(),
                        VectorXd(lo + (unit.row(s).transpose().array() *
                                       (hi - lo).array()).matrix()));
  }
  for (auto& c : pool) {
    try {
      c.first = fn(c.second, nullptr);
    } catch (const EvalError&) {
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<VectorXd> inits;
  for (const auto& c : pool) {
    if (static_cast<int>(inits.size()) >= std::max(starts, 1)) break;
    if (std::isfinite(c.first)) inits.push_back(c.second);
  }
  if (inits.empty())
    throw NumericError("theta optimization: objective not finite anywhere on "
                       "the candidate pool");
  WlsResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < inits.size(); ++s) {
    OptimResult r = minimize_box(fn, inits[s], lo, hi, opts);
    if (std::isfinite(r.value) && r.value < best) {
      best = r.value;
      out.theta = r.x;
      out.objective = r.value;
      out.best_start = static_cast<int>(s);
    }
    out.starts.push_back(std::move(r));
  }
  if (out.best_start < 0)
    throw NumericError("theta optimization failed from every start");
  return out;
}

}  // namespace

WlsResult fit_wls(const ReplicatedDesign& design, const ComputerModel& model,
                  WlsWeights weights, const VectorXd& known_r, int starts,
                  std::uint64_t seed, const OptimOptions& opts) {
  if (design.d() != model.d())
    throw ConfigError("fit_wls: design/model dimension mismatch");
  const int n = design.n();
  VectorXd r;
  switch (weights) {
    case WlsWeights::SampleVariance: {
      for (int i = 0; i < n; ++i)
        if (design.a[i] < 2)
          throw DataError(
              "fit_wls: sample-variance weights need >= 2 replicates at "
              "every location (location " +
              std::to_string(i + 1) +
              " has 1); use unit weights instead");
      r = design.r_hat();
      for (int i = 0; i < n; ++i)
        if (!(r[i] > 0.0))
          throw DataError("fit_wls: zero sample variance at location " +
                          std::to_string(i + 1));
      break;
    }
    case WlsWeights::KnownR: {
      if (known_r.size() != n)
        throw ConfigError("fit_wls: known_r must have one value per location");
      if ((known_r.array() <= 0.0).any())
        throw ConfigError("fit_wls: known_r must be strictly positive");
      r = known_r;
      break;
    }
    case WlsWeights::Unit:
      r = VectorXd::Ones(n);
      break;
  }

  ObjectiveFn fn = [&](const VectorXd& theta, VectorXd* grad) -> double {
    const VectorXd z = design.ybar - model.eval_batch(design.X, theta);
    if (grad) {
      const MatrixXd G = model.grad_batch(design.X, theta);
      *grad = -2.0 * G.transpose() * z.cwiseQuotient(r);
    }
    return z.cwiseQuotient(r).dot(z);
  };

  WlsResult out = minimize_theta(model, fn, starts, seed, opts);
  out.weights = weights;
  out.weight_values = r;
  return out;
}

namespace {

VectorXd quadrature_oracle(const ComputerModel& model, const ScalarField& zeta,
                           const ScalarField* r, const MatrixXd& bounds,
                           int nodes_per_dim) {
  const QuadratureGrid g = quadrature_grid(bounds, nodes_per_dim);
  const long long M = g.X.rows();
  VectorXd zv(M), wr(M);
  for (long long k = 0; k < M; ++k) {
    const VectorXd x = g.X.row(k).transpose();
    zv[k] = zeta(x);
    double rv = 1.0;
    if (r) {
      rv = (*r)(x);
      if (!(rv > 0.0))
        throw ConfigError("oracle: variance field non-positive at a node");
    }
    wr[k] = g.w[k] / rv;
  }

  ObjectiveFn fn = [&](const VectorXd& theta, VectorXd* grad) -> double {
    const VectorXd z = zv - model.eval_batch(g.X, theta);
    if (grad) {
      const MatrixXd G = model.grad_batch(g.X, theta);
      *grad = -2.0 * G.transpose() * wr.cwiseProduct(z);
    }
    return wr.dot(z.cwiseAbs2());
  };

  // Coarse scan over a regular theta grid, then polish the best cells.
  const int q = model.q();
  const VectorXd lo = model.theta_bounds().col(0);
  const VectorXd hi = model.theta_bounds().col(1);
  int per_dim = 16;
  while (q > 1 && std::pow(per_dim, q) > 4096.0) --per_dim;
  std::vector<int> idx(q, 0);
  long long cells = 1;
  for (int k = 0; k < q; ++k) cells *= per_dim;
  std::vector<std::pair<double, VectorXd>> ranked;
  for (long long c = 0; c < cells; ++c) {
    VectorXd th(q);
    for (int k = 0; k < q; ++k)
      th[k] = lo[k] + (idx[k] + 0.5) * (hi[k] - lo[k]) / per_dim;
    ranked.emplace_back(fn(th, nullptr), th);
    for (int k = q - 1; k >= 0; --k) {
      if (++idx[k] < per_dim) break;
      idx[k] = 0;
    }
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  OptimOptions opts;
  opts.gtol = 1e-9;
  VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  const int polish = std::min<std::size_t>(3, ranked.size());
  for (int s = 0; s < polish; ++s) {
    OptimResult res = minimize_box(fn, ranked[s].second, lo, hi, opts);
    if (std::isfinite(res.value) && res.value < best_val) {
      best_val = res.value;
      best = res.x;
    }
  }
  if (!best.size()) throw NumericError("oracle: polish failed");
  return best;
}

}  // namespace

VectorXd wls_limit_oracle(const ComputerModel& model, const ScalarField& zeta,
                          const ScalarField& r, const MatrixXd& bounds,
                          int nodes_per_dim) {
  return quadrature_oracle(model, zeta, &r, bounds, nodes_per_dim);
}

VectorXd l2_truth_oracle(const ComputerModel& model, const ScalarField& zeta,
                         const MatrixXd& bounds, int nodes_per_dim) {
  return quadrature_oracle(model, zeta, nullptr, bounds, nodes_per_dim);
}

}  // namespace hetcal
