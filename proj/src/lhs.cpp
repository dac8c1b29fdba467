#include "hetcal/lhs.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace hetcal {

MatrixXd lhs_unit(int k, int d, Rng& rng) {
  if (k < 1 || d < 1) throw ConfigError("lhs_unit: k and d must be positive");
  MatrixXd out(k, d);
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int col = 0; col < d; ++col) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = k - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < k; ++i)
      out(i, col) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) +
                     rng.uniform()) /
                    static_cast<double>(k);
  }
  return out;
}

MatrixXd lhs_maximin_unit(int k, int d, Rng& rng, int restarts) {
  if (restarts < 1) restarts = 1;
  MatrixXd best;
  double best_score = -1.0;
  for (int r = 0; r < restarts; ++r) {
    MatrixXd cand = lhs_unit(k, d, rng);
    double score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k && score > best_score; ++i)
      for (int j = i + 1; j < k; ++j)
        score = std::min(score, (cand.row(i) - cand.row(j)).squaredNorm());
    if (k == 1) score = 1.0;
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

MatrixXd scale_to_box(const MatrixXd& unit, const MatrixXd& bounds) {
  if (bounds.rows() != unit.cols() || bounds.cols() != 2)
    throw ConfigError("scale_to_box: bounds must be d x 2");
  MatrixXd out = unit;
  for (Eigen::Index k = 0; k < unit.cols(); ++k)
    out.col(k) =
        (bounds(k, 0) + (bounds(k, 1) - bounds(k, 0)) * unit.col(k).array())
            .matrix();
  return out;
}

}  // namespace hetcal
