#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hetcal/common.hpp"
#include "hetcal/expr.hpp"

namespace hetcal {

// A computer model f(x, theta) with x in R^d and theta in a box in R^q.
// Expression-backed models differentiate symbolically; callable-backed
// models fall back to central finite differences with per-component step
// max(1e-6, 1e-6 |theta_j|) for the gradient and steps on the gradient for
// second derivatives.
class ComputerModel {
 public:
  using RawFn = std::function<double(const VectorXd& x, const VectorXd& theta)>;

  // Expression-backed model.
  ComputerModel(std::string source, int d, int q, MatrixXd theta_bounds);
  // Callable-backed model (finite-difference derivatives).
  ComputerModel(RawFn fn, int d, int q, MatrixXd theta_bounds);

  int d() const { return d_; }
  int q() const { return q_; }
  // q x 2 matrix of parameter bounds [lo, hi].
  const MatrixXd& theta_bounds() const { return theta_bounds_; }
  // empty for callable-backed models
  const std::string& source() const { return source_; }
  bool symbolic() const { return ast_ != nullptr; }
  const char* gradient_path() const {
    return symbolic() ? "symbolic" : "finite-difference";
  }

  double eval(const VectorXd& x, const VectorXd& theta) const;
  // df/dtheta, length q
  VectorXd grad_theta(const VectorXd& x, const VectorXd& theta) const;
  // d2f/dtheta_i dtheta_j, q x q symmetric
  MatrixXd hess_theta(const VectorXd& x, const VectorXd& theta) const;

  // Batch helpers over the rows of X (k x d): values (k), gradients (k x q),
  // and one Hessian column d(grad)/dtheta_j (k x q).
  VectorXd eval_batch(const MatrixXd& X, const VectorXd& theta) const;
  MatrixXd grad_batch(const MatrixXd& X, const VectorXd& theta) const;
  MatrixXd hess_col_batch(const MatrixXd& X, const VectorXd& theta,
                          int j) const;

 private:
  void check_dims(const VectorXd& x, const VectorXd& theta) const;

  int d_ = 0, q_ = 0;
  MatrixXd theta_bounds_;  // q x 2
  std::string source_;
  ExprPtr ast_;
  std::vector<ExprPtr> grad_ast_;               // per theta_j
  std::vector<std::vector<ExprPtr>> hess_ast_;  // [i][j], i <= j stored both
  RawFn raw_;
};

// Built-in models by name: "tuo1d", "plumlee3p", "growth".
ComputerModel builtin_model(const std::string& name);
bool is_builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

}  // namespace hetcal
