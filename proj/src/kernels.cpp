#include "hetcal/kernels.hpp"

#include <cmath>

namespace hetcal {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "matern52") return KernelFamily::Matern52;
  if (name == "gaussian") return KernelFamily::Gaussian;
  throw ConfigError("unknown kernel family '" + name +
                    "' (available: matern52, gaussian)");
}

const char* kernel_family_name(KernelFamily f) {
  return f == KernelFamily::Matern52 ? "matern52" : "gaussian";
}

void KernelSpec::validate(int d) const {
  if (lengthscales.size() != d)
    throw ConfigError("kernel lengthscales: expected " + std::to_string(d) +
                      " entries, got " + std::to_string(lengthscales.size()));
  for (Eigen::Index k = 0; k < lengthscales.size(); ++k)
    if (!(lengthscales[k] > 0.0) || !std::isfinite(lengthscales[k]))
      throw ConfigError("kernel lengthscales must be positive and finite");
}

PairwiseSq pairwise_sq(const MatrixXd& X, const MatrixXd& Y) {
  if (X.cols() != Y.cols())
    throw ConfigError("pairwise_sq: dimension mismatch");
  PairwiseSq out;
  out.d2.reserve(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    MatrixXd diff = X.col(k).replicate(1, Y.rows());
    diff.rowwise() -= Y.col(k).transpose();
    out.d2.push_back(diff.array().square().matrix());
  }
  return out;
}

PairwiseSq pairwise_sq(const MatrixXd& X) { return pairwise_sq(X, X); }

KernelEvalCache kernel_eval_cache(KernelFamily family, const PairwiseSq& d2,
                                  const VectorXd& phi) {
  if (static_cast<Eigen::Index>(d2.d2.size()) != phi.size())
    throw ConfigError("kernel_eval_cache: lengthscale dimension mismatch");
  KernelEvalCache c;
  c.family = family;
  MatrixXd r2 = MatrixXd::Zero(d2.rows(), d2.cols());
  for (std::size_t k = 0; k < d2.d2.size(); ++k)
    r2.array() += d2.d2[k].array() / (phi[static_cast<Eigen::Index>(k)] *
                                      phi[static_cast<Eigen::Index>(k)]);
  if (family == KernelFamily::Gaussian) {
    c.e = (-0.5 * r2.array()).exp().matrix();
    c.value = c.e;
  } else {
    c.s = (5.0 * r2.array()).sqrt().matrix();
    c.e = (-c.s.array()).exp().matrix();
    c.value = ((1.0 + c.s.array() + c.s.array().square() / 3.0) * c.e.array())
                  .matrix();
  }
  return c;
}

MatrixXd kernel_grad_phi(const KernelEvalCache& c, const MatrixXd& d2j,
                         double phij) {
  const double p3 = phij * phij * phij;
  if (c.family == KernelFamily::Gaussian)
    return (c.value.array() * d2j.array() / p3).matrix();
  return ((5.0 / 3.0) * (1.0 + c.s.array()) * c.e.array() * d2j.array() / p3)
      .matrix();
}

MatrixXd kernel_hess_phi(const KernelEvalCache& c, const MatrixXd& d2i,
                         double phii, const MatrixXd& d2j, double phij,
                         bool same_dim) {
  const double pi3 = phii * phii * phii;
  const double pj3 = phij * phij * phij;
  if (c.family == KernelFamily::Gaussian) {
    MatrixXd h = (c.value.array() * (d2i.array() / pi3) * (d2j.array() / pj3))
                     .matrix();
    if (same_dim)
      h.array() -= 3.0 * c.value.array() * d2j.array() / (pj3 * phij);
    return h;
  }
  MatrixXd h = ((25.0 / 3.0) * c.e.array() * d2i.array() * d2j.array() /
                (pi3 * pj3))
                   .matrix();
  if (same_dim)
    h.array() -=
        5.0 * (1.0 + c.s.array()) * c.e.array() * d2j.array() / (pj3 * phij);
  return h;
}

double kernel_eval(const KernelSpec& spec, const VectorXd& x,
                   const VectorXd& y) {
  spec.validate(static_cast<int>(x.size()));
  if (x.size() != y.size()) throw ConfigError("kernel_eval: dimension mismatch");
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double z = (x[k] - y[k]) / spec.lengthscales[k];
    r2 += z * z;
  }
  if (spec.family == KernelFamily::Gaussian) return std::exp(-0.5 * r2);
  const double s = std::sqrt(5.0 * r2);
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

MatrixXd kernel_matrix(const KernelSpec& spec, const MatrixXd& X) {
  spec.validate(static_cast<int>(X.cols()));
  return kernel_eval_cache(spec.family, pairwise_sq(X), spec.lengthscales)
      .value;
}

MatrixXd kernel_cross(const KernelSpec& spec, const MatrixXd& X,
                      const MatrixXd& Y) {
  spec.validate(static_cast<int>(X.cols()));
  return kernel_eval_cache(spec.family, pairwise_sq(X, Y), spec.lengthscales)
      .value;
}

std::vector<MatrixXd> kernel_grad_lengthscale(const KernelSpec& spec,
                                              const MatrixXd& X) {
  spec.validate(static_cast<int>(X.cols()));
  const PairwiseSq d2 = pairwise_sq(X);
  const KernelEvalCache c =
      kernel_eval_cache(spec.family, d2, spec.lengthscales);
  std::vector<MatrixXd> out;
  out.reserve(d2.d2.size());
  for (std::size_t k = 0; k < d2.d2.size(); ++k)
    out.push_back(kernel_grad_phi(
        c, d2.d2[k], spec.lengthscales[static_cast<Eigen::Index>(k)]));
  return out;
}

MatrixXd kernel_hess_lengthscale(const KernelSpec& spec, const MatrixXd& X,
                                 int i, int j) {
  spec.validate(static_cast<int>(X.cols()));
  const PairwiseSq d2 = pairwise_sq(X);
  const KernelEvalCache c =
      kernel_eval_cache(spec.family, d2, spec.lengthscales);
  return kernel_hess_phi(c, d2.d2[static_cast<std::size_t>(i)],
                         spec.lengthscales[i], d2.d2[static_cast<std::size_t>(j)],
                         spec.lengthscales[j], i == j);
}

}  // namespace hetcal
