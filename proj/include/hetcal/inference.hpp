#pragma once

#include <string>
#include <vector>

#include "hetcal/fit.hpp"

namespace hetcal {

// Coordinate layout of the full parameter vector
//   omega = (theta | psi, nu | phi_g, g, nu_g | delta)
// in the raw (untransformed) parameterization used by the asymptotics.
struct InfoLayout {
  int q = 0, p1 = 0, p2 = 0, n = 0;
  bool latent = false;

  int dim() const { return q + p1 + 1 + (latent ? p2 + 2 + n : 0); }
  int off_theta() const { return 0; }
  int off_psi() const { return q; }
  int off_nu() const { return q + p1; }
  int off_phi_g() const { return q + p1 + 1; }
  int off_g() const { return q + p1 + 1 + p2; }
  int off_nu_g() const { return q + p1 + 2 + p2; }
  int off_delta() const { return q + p1 + 3 + p2; }
  std::string coord_name(int i) const;
};

struct InfoMatrix {
  InfoLayout layout;
  MatrixXd B;  // dim x dim, symmetric PSD
};

// Expectation-form information matrix at the given parameter point,
// assembled densely over the expanded N observations (N <= a few thousand).
InfoMatrix information_matrix(const CalibProblem& prob,
                              const HetCalibParams& p);

struct ConfidenceReport {
  double alpha = 0.05;
  double z = 0.0;            // two-sided normal quantile used for intervals
  double chi2_radius = 0.0;  // chi^2_{q,1-alpha} ellipsoid radius
  VectorXd theta_hat;
  VectorXd se;         // marginal standard errors (NaN when profiled out)
  MatrixXd intervals;  // q x 2
  MatrixXd theta_cov;  // q x q block of B^{-1} (ellipsoid shape matrix)
  std::vector<std::string> conditional_on;  // bound-pinned coordinates
};

struct HetTestResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<std::string> conditional_on;
};

// Low-level versions over an explicit information matrix: `pinned` lists
// coordinate indices (layout order) profiled out before inversion.
ConfidenceReport confidence_region(const InfoMatrix& info,
                                   const HetCalibParams& p, double alpha,
                                   const std::vector<int>& pinned = {});
HetTestResult het_test(const InfoMatrix& info, const HetCalibParams& p,
                       const std::vector<int>& pinned = {});

// Drivers on a finished fit: detect bound-pinned hyperparameters from the
// fit's search box, profile them out, and flag the result as conditional.
ConfidenceReport confidence_region(const FitResult& fit, double alpha = 0.05);
HetTestResult het_test(const FitResult& fit);

// Coordinates of fit.params sitting on the search box (relative tol 1e-8).
std::vector<int> bound_pinned_coords(const FitResult& fit,
                                     const InfoLayout& L);

}  // namespace hetcal
