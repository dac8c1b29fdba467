#pragma once

#include <string>
#include <vector>

#include "hetcal/common.hpp"

namespace hetcal {

struct Observation {
  VectorXd x;
  double y = 0.0;
};

// Replicated experimental design: unique input locations with their grouped
// responses.  Locations are canonicalized by rounding each coordinate to
// `rounding` decimal places and ordered lexicographically; replicate values
// within a group are stored ascending so grouped statistics are invariant to
// input row order.  s2 uses the biased divisor a_i (zero when a_i = 1).
struct ReplicatedDesign {
  MatrixXd X;                            // n x d canonical unique locations
  std::vector<std::vector<double>> replicates;  // per location, sorted
  VectorXi a;                            // replicate counts
  VectorXd ybar;                         // group means
  VectorXd s2;                           // biased within-group variances
  MatrixXd bounds;                       // d x 2 input box
  int rounding = 8;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int N() const { return static_cast<int>(a.sum()); }
  bool fully_replicated() const;  // every a_i >= 2

  // Unbiased per-location variance estimates (divisor a_i - 1); NaN where
  // a_i = 1.  Used for sample-variance WLS weights.
  VectorXd r_hat() const;

  // All raw observations in canonical order (replicates expanded).
  std::vector<Observation> expand() const;
};

// Groups raw observations into a ReplicatedDesign.  When `bounds` has zero
// rows it is inferred from the data min/max per dimension.
ReplicatedDesign group_replicates(const std::vector<Observation>& obs,
                                  int rounding = 8,
                                  const MatrixXd& bounds = MatrixXd());

// CSV schema: which columns carry the inputs (in order) and the response.
struct DesignSchema {
  std::vector<std::string> x_columns;
  std::string y_column;
};

ReplicatedDesign read_design_csv(const std::string& path,
                                 const DesignSchema& schema, int rounding = 8,
                                 const MatrixXd& bounds = MatrixXd());
// Writes one row per raw observation (replicates expanded) with 17
// significant digit formatting, so read-back regrouping is bitwise stable.
void write_design_csv(const ReplicatedDesign& design, const std::string& path,
                      const DesignSchema& schema);

}  // namespace hetcal
