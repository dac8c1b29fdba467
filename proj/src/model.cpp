#include "hetcal/model.hpp"

#include <cmath>

namespace hetcal {

namespace {

MatrixXd check_bounds(MatrixXd b, int q) {
  if (b.rows() != q || b.cols() != 2)
    throw ConfigError("theta_bounds must be q x 2");
  for (int i = 0; i < q; ++i)
    if (!(b(i, 0) < b(i, 1)))
      throw ConfigError("theta_bounds row " + std::to_string(i + 1) +
                        " must satisfy lo < hi");
  return b;
}

}  // namespace

ComputerModel::ComputerModel(std::string source, int d, int q,
                             MatrixXd theta_bounds)
    : d_(d), q_(q), theta_bounds_(check_bounds(std::move(theta_bounds), q)),
      source_(std::move(source)) {
  ast_ = parse_expr(source_, d_, q_);
  grad_ast_.reserve(static_cast<std::size_t>(q_));
  for (int j = 0; j < q_; ++j) grad_ast_.push_back(diff_theta(ast_, j));
  hess_ast_.assign(static_cast<std::size_t>(q_), {});
  for (int i = 0; i < q_; ++i) {
    hess_ast_[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(q_));
    for (int j = 0; j < q_; ++j)
      hess_ast_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          diff_theta(grad_ast_[static_cast<std::size_t>(i)], j);
  }
}

ComputerModel::ComputerModel(RawFn fn, int d, int q, MatrixXd theta_bounds)
    : d_(d), q_(q), theta_bounds_(check_bounds(std::move(theta_bounds), q)),
      raw_(std::move(fn)) {
  if (!raw_) throw ConfigError("ComputerModel: null callable");
}

void ComputerModel::check_dims(const VectorXd& x, const VectorXd& theta) const {
  if (x.size() != d_)
    throw ConfigError("model eval: x has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(d_));
  if (theta.size() != q_)
    throw ConfigError("model eval: theta has dimension " +
                      std::to_string(theta.size()) + ", expected " +
                      std::to_string(q_));
}

double ComputerModel::eval(const VectorXd& x, const VectorXd& theta) const {
  check_dims(x, theta);
  if (ast_)
    return eval_expr(ast_, {x.data(), static_cast<std::size_t>(d_)},
                     {theta.data(), static_cast<std::size_t>(q_)});
  return raw_(x, theta);
}

VectorXd ComputerModel::grad_theta(const VectorXd& x,
                                   const VectorXd& theta) const {
  check_dims(x, theta);
  VectorXd g(q_);
  if (ast_) {
    for (int j = 0; j < q_; ++j)
      g[j] = eval_expr(grad_ast_[static_cast<std::size_t>(j)],
                       {x.data(), static_cast<std::size_t>(d_)},
                       {theta.data(), static_cast<std::size_t>(q_)});
    return g;
  }
  VectorXd t = theta;
  for (int j = 0; j < q_; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta[j]));
    t[j] = theta[j] + h;
    const double up = raw_(x, t);
    t[j] = theta[j] - h;
    const double dn = raw_(x, t);
    t[j] = theta[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

MatrixXd ComputerModel::hess_theta(const VectorXd& x,
                                   const VectorXd& theta) const {
  check_dims(x, theta);
  MatrixXd h(q_, q_);
  if (ast_) {
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < q_; ++j)
        h(i, j) = eval_expr(
            hess_ast_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
            {x.data(), static_cast<std::size_t>(d_)},
            {theta.data(), static_cast<std::size_t>(q_)});
    return 0.5 * (h + h.transpose());
  }
  VectorXd t = theta;
  for (int j = 0; j < q_; ++j) {
    const double step = std::max(1e-5, 1e-5 * std::abs(theta[j]));
    t[j] = theta[j] + step;
    const VectorXd up = grad_theta(x, t);
    t[j] = theta[j] - step;
    const VectorXd dn = grad_theta(x, t);
    t[j] = theta[j];
    h.col(j) = (up - dn) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

VectorXd ComputerModel::eval_batch(const MatrixXd& X,
                                   const VectorXd& theta) const {
  VectorXd out(X.rows());
  VectorXd x(d_);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    x = X.row(i);
    out[i] = eval(x, theta);
  }
  return out;
}

MatrixXd ComputerModel::grad_batch(const MatrixXd& X,
                                   const VectorXd& theta) const {
  MatrixXd out(X.rows(), q_);
  VectorXd x(d_);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    x = X.row(i);
    out.row(i) = grad_theta(x, theta);
  }
  return out;
}

MatrixXd ComputerModel::hess_col_batch(const MatrixXd& X, const VectorXd& theta,
                                       int j) const {
  MatrixXd out(X.rows(), q_);
  VectorXd x(d_);
  if (ast_) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      x = X.row(i);
      for (int k = 0; k < q_; ++k)
        out(i, k) = eval_expr(
            hess_ast_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)],
            {x.data(), static_cast<std::size_t>(d_)},
            {theta.data(), static_cast<std::size_t>(q_)});
    }
    return out;
  }
  VectorXd t = theta;
  const double step = std::max(1e-5, 1e-5 * std::abs(theta[j]));
  t[j] = theta[j] + step;
  const MatrixXd up = grad_batch(X, t);
  t[j] = theta[j] - step;
  const MatrixXd dn = grad_batch(X, t);
  return (up - dn) / (2.0 * step);
}

namespace {

struct BuiltinDef {
  const char* name;
  const char* source;
  int d, q;
  double bounds[8][2];
};

const BuiltinDef kBuiltins[] = {
    // Inexact damped-oscillation model for the 1-d exponential-sine process.
    {"tuo1d",
     "exp(x1/10)*sin(x1) - sqrt(theta1^2 - theta1 + 1)*(sin(theta1*x1) + "
     "cos(theta1*x1))",
     1, 1,
     {{-5, 5}}},
    // Linear-in-theta plane fit to the 2-d ridge process.
    {"plumlee3p", "theta1 + theta2*x1 + theta3*x2", 2, 3,
     {{-2, 2}, {0, 8}, {-4, 4}}},
    // Exponential growth-rate model for the plant-growth data.
    {"growth", "exp(theta1*x1)", 1, 1, {{0, 1}}},
};

}  // namespace

bool is_builtin_model(const std::string& name) {
  for (const auto& b : kBuiltins)
    if (name == b.name) return true;
  return false;
}

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> out;
  for (const auto& b : kBuiltins) out.emplace_back(b.name);
  return out;
}

ComputerModel builtin_model(const std::string& name) {
  for (const auto& b : kBuiltins) {
    if (name != b.name) continue;
    MatrixXd bounds(b.q, 2);
    for (int i = 0; i < b.q; ++i) {
      bounds(i, 0) = b.bounds[i][0];
      bounds(i, 1) = b.bounds[i][1];
    }
    return ComputerModel(b.source, b.d, b.q, bounds);
  }
  throw ConfigError("unknown builtin model '" + name +
                    "' (available: tuo1d, plumlee3p, growth)");
}

}  // namespace hetcal
