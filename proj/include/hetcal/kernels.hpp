#pragma once

#include <string>
#include <vector>

#include "hetcal/common.hpp"

namespace hetcal {

// Stationary correlation kernels with unit diagonal and anisotropic
// per-dimension lengthscales phi:
//   r^2 = sum_k (x_k - y_k)^2 / phi_k^2
//   matern52:  (1 + s + s^2/3) exp(-s),  s = sqrt(5) r
//   gaussian:  exp(-r^2 / 2)
enum class KernelFamily { Matern52, Gaussian };

KernelFamily kernel_family_from_string(const std::string& name);
const char* kernel_family_name(KernelFamily f);

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  VectorXd lengthscales;  // one per input dimension, all > 0

  void validate(int d) const;
};

// Per-dimension squared coordinate differences for a pair of point sets;
// computed once and reused across lengthscale updates.
struct PairwiseSq {
  std::vector<MatrixXd> d2;  // each rows(X) x rows(Y)
  Eigen::Index rows() const { return d2.empty() ? 0 : d2.front().rows(); }
  Eigen::Index cols() const { return d2.empty() ? 0 : d2.front().cols(); }
};

PairwiseSq pairwise_sq(const MatrixXd& X, const MatrixXd& Y);
PairwiseSq pairwise_sq(const MatrixXd& X);  // symmetric case

// Elementwise evaluation cache shared by value / gradient / second-derivative
// computations at a fixed set of lengthscales.
struct KernelEvalCache {
  KernelFamily family;
  MatrixXd s;      // matern52: sqrt(5) r (empty for gaussian)
  MatrixXd e;      // matern52: exp(-s); gaussian: the kernel value itself
  MatrixXd value;  // kernel values
};

KernelEvalCache kernel_eval_cache(KernelFamily family, const PairwiseSq& d2,
                                  const VectorXd& phi);
// d value / d phi_j; d2j is the j-th squared-difference slab.
MatrixXd kernel_grad_phi(const KernelEvalCache& c, const MatrixXd& d2j,
                         double phij);
// d^2 value / d phi_i d phi_j.
MatrixXd kernel_hess_phi(const KernelEvalCache& c, const MatrixXd& d2i,
                         double phii, const MatrixXd& d2j, double phij,
                         bool same_dim);

// Convenience API over raw coordinates.
double kernel_eval(const KernelSpec& spec, const VectorXd& x, const VectorXd& y);
MatrixXd kernel_matrix(const KernelSpec& spec, const MatrixXd& X);
MatrixXd kernel_cross(const KernelSpec& spec, const MatrixXd& X,
                      const MatrixXd& Y);
// One matrix per lengthscale dimension.
std::vector<MatrixXd> kernel_grad_lengthscale(const KernelSpec& spec,
                                              const MatrixXd& X);
MatrixXd kernel_hess_lengthscale(const KernelSpec& spec, const MatrixXd& X,
                                 int i, int j);

}  // namespace hetcal
