#include "hetcal/params.hpp"

#include <cmath>

namespace hetcal {

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "wls") return EstimatorKind::Wls;
  if (name == "homgp") return EstimatorKind::HomGp;
  if (name == "homogp") return EstimatorKind::HomOgp;
  if (name == "hetgp") return EstimatorKind::HetGp;
  if (name == "hetogp") return EstimatorKind::HetOgp;
  throw ConfigError("unknown estimator '" + name +
                    "' (available: wls, homgp, homogp, hetgp, hetogp)");
}

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Wls: return "wls";
    case EstimatorKind::HomGp: return "homgp";
    case EstimatorKind::HomOgp: return "homogp";
    case EstimatorKind::HetGp: return "hetgp";
    case EstimatorKind::HetOgp: return "hetogp";
  }
  return "?";
}

VariantToggles variant_toggles(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::HomGp: return {false, false};
    case EstimatorKind::HomOgp: return {true, false};
    case EstimatorKind::HetGp: return {false, true};
    case EstimatorKind::HetOgp: return {true, true};
    case EstimatorKind::Wls:
      throw ConfigError("WLS is not a GP variant");
  }
  return {};
}

std::string ParamLayout::coord_name(int i) const {
  if (i < off_phi()) return "theta" + std::to_string(i + 1);
  if (i < off_phi_g()) return "log_phi" + std::to_string(i - off_phi() + 1);
  if (!latent) return "?";
  if (i < off_g()) return "log_phi_g" + std::to_string(i - off_phi_g() + 1);
  if (i == off_g()) return "log_g";
  if (i < dim()) return "delta" + std::to_string(i - off_delta() + 1);
  return "?";
}

VectorXd pack_params(const HetCalibParams& p, const ParamLayout& L) {
  if (p.theta.size() != L.q || p.phi.size() != L.p1)
    throw ConfigError("pack_params: dimension mismatch");
  VectorXd v(L.dim());
  v.segment(L.off_theta(), L.q) = p.theta;
  v.segment(L.off_phi(), L.p1) = p.phi.array().log();
  if (L.latent) {
    if (p.phi_g.size() != L.p2 || p.delta.size() != L.n)
      throw ConfigError("pack_params: latent dimension mismatch");
    v.segment(L.off_phi_g(), L.p2) = p.phi_g.array().log();
    v[L.off_g()] = std::log(p.g);
    v.segment(L.off_delta(), L.n) = p.delta;
  }
  return v;
}

HetCalibParams unpack_params(const VectorXd& v, const ParamLayout& L) {
  if (v.size() != L.dim()) throw ConfigError("unpack_params: size mismatch");
  HetCalibParams p;
  p.theta = v.segment(L.off_theta(), L.q);
  p.phi = v.segment(L.off_phi(), L.p1).array().exp();
  if (L.latent) {
    p.phi_g = v.segment(L.off_phi_g(), L.p2).array().exp();
    p.g = std::exp(v[L.off_g()]);
    p.delta = v.segment(L.off_delta(), L.n);
  }
  return p;
}

void pack_bounds(const ParamBounds& b, const ParamLayout& L, VectorXd* lo,
                 VectorXd* hi) {
  lo->resize(L.dim());
  hi->resize(L.dim());
  auto check_box = [](const MatrixXd& box, int rows, const char* what) {
    if (box.rows() != rows || box.cols() != 2)
      throw ConfigError(std::string("pack_bounds: ") + what +
                        " box has wrong shape");
    for (int i = 0; i < rows; ++i)
      if (!(box(i, 0) < box(i, 1)))
        throw ConfigError(std::string("pack_bounds: ") + what +
                          " box needs lo < hi");
  };
  check_box(b.theta, L.q, "theta");
  check_box(b.phi, L.p1, "phi");
  lo->segment(L.off_theta(), L.q) = b.theta.col(0);
  hi->segment(L.off_theta(), L.q) = b.theta.col(1);
  lo->segment(L.off_phi(), L.p1) = b.phi.col(0).array().log();
  hi->segment(L.off_phi(), L.p1) = b.phi.col(1).array().log();
  if (L.latent) {
    check_box(b.phi_g, L.p2, "phi_g");
    if (!(b.g_lo > 0.0 && b.g_lo < b.g_hi))
      throw ConfigError("pack_bounds: need 0 < g_lo < g_hi");
    if (!(b.delta_lo < b.delta_hi))
      throw ConfigError("pack_bounds: need delta_lo < delta_hi");
    lo->segment(L.off_phi_g(), L.p2) = b.phi_g.col(0).array().log();
    hi->segment(L.off_phi_g(), L.p2) = b.phi_g.col(1).array().log();
    (*lo)[L.off_g()] = std::log(b.g_lo);
    (*hi)[L.off_g()] = std::log(b.g_hi);
    lo->segment(L.off_delta(), L.n).setConstant(b.delta_lo);
    hi->segment(L.off_delta(), L.n).setConstant(b.delta_hi);
  }
  if ((lo->array() >= hi->array()).any())
    throw ConfigError("pack_bounds: every lower bound must be below its upper");
}

}  // namespace hetcal
