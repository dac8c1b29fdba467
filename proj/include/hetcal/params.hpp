#pragma once

#include <string>

#include "hetcal/common.hpp"

namespace hetcal {

// The five estimators benchmarked against each other.  GP variants are the
// cross of two toggles: orthogonal bias kernel x latent noise field.
enum class EstimatorKind { Wls, HomGp, HomOgp, HetGp, HetOgp };

EstimatorKind estimator_from_string(const std::string& name);
const char* estimator_name(EstimatorKind k);

struct VariantToggles {
  bool orthogonal = false;
  bool latent_noise = false;
};
VariantToggles variant_toggles(EstimatorKind k);  // Wls has no GP toggles

// Full parameter block omega = (theta | phi, nu | phi_g, g, nu_g | delta).
// nu and nu_g are plug-in scales: computed in closed form, never optimized.
struct HetCalibParams {
  VectorXd theta;
  VectorXd phi;    // mean-kernel lengthscales
  double nu = 1.0;
  VectorXd phi_g;  // noise-kernel lengthscales (latent variants)
  double g = 0.1;  // latent nugget scale
  double nu_g = 1.0;
  VectorXd delta;  // latent log-variance values (latent variants)
};

// Box bounds in the raw parameterization.
struct ParamBounds {
  MatrixXd theta;  // q x 2
  MatrixXd phi;    // p1 x 2
  MatrixXd phi_g;  // p2 x 2
  double g_lo = 1e-6, g_hi = 100.0;
  double delta_lo = -20.0, delta_hi = 20.0;
};

// Optimizer coordinates: theta raw, lengthscales and g on the log scale,
// delta raw.  nu / nu_g never appear (they are profiled out).
struct ParamLayout {
  int q = 0, p1 = 0, p2 = 0, n = 0;
  bool latent = false;

  int dim() const { return q + p1 + (latent ? p2 + 1 + n : 0); }
  int off_theta() const { return 0; }
  int off_phi() const { return q; }
  int off_phi_g() const { return q + p1; }
  int off_g() const { return q + p1 + p2; }
  int off_delta() const { return q + p1 + p2 + 1; }
  std::string coord_name(int i) const;
};

VectorXd pack_params(const HetCalibParams& p, const ParamLayout& L);
HetCalibParams unpack_params(const VectorXd& v, const ParamLayout& L);
void pack_bounds(const ParamBounds& b, const ParamLayout& L, VectorXd* lo,
                 VectorXd* hi);

}  // namespace hetcal
