#pragma once

#include "hetcal/common.hpp"
#include "hetcal/rng.hpp"

namespace hetcal {

// Latin hypercube sample of k points on the unit cube [0,1)^d: one point per
// stratum per dimension, jittered within strata.
MatrixXd lhs_unit(int k, int d, Rng& rng);

// Maximin-polished LHS: draws `restarts` candidates (default 100) and keeps
// the one with the largest minimal pairwise distance.
MatrixXd lhs_maximin_unit(int k, int d, Rng& rng, int restarts = 100);

// Affine map of unit-cube points into a d x 2 box.
MatrixXd scale_to_box(const MatrixXd& unit, const MatrixXd& bounds);

}  // namespace hetcal
