#include "hetcal/serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace hetcal {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "hetcal-fit/1";
constexpr const char* kVersion = "hetcal 1.0.0";

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

json vec_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorXd vec_from(const json& a, const char* what) {
  if (!a.is_array()) throw DataError(std::string(what) + ": expected array");
  VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

MatrixXd mat_from(const json& a, const char* what) {
  if (!a.is_array()) throw DataError(std::string(what) + ": expected array");
  if (a.empty()) return MatrixXd();
  const std::size_t cols = a[0].size();
  MatrixXd m(a.size(), cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != cols)
      throw DataError(std::string(what) + ": ragged matrix");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = a[i][j].get<double>();
  }
  return m;
}

// JSON has no NaN/inf literals; scrub them to null on the way out.
void scrub(json& node) {
  if (node.is_number_float() && !std::isfinite(node.get<double>()))
    node = nullptr;
  else if (node.is_object() || node.is_array())
    for (auto& child : node) scrub(child);
}

}  // namespace

std::string design_fingerprint(const ReplicatedDesign& design) {
  std::ostringstream ss;
  ss << design.n() << '|' << design.d() << '|' << design.rounding << '\n';
  for (int i = 0; i < design.n(); ++i) {
    for (int k = 0; k < design.d(); ++k)
      ss << format_double(design.X(i, k)) << ',';
    ss << ':';
    for (double y : design.replicates[i]) ss << format_double(y) << ',';
    ss << '\n';
  }
  const std::string text = ss.str();
  return hex64(fnv1a64(text.data(), text.size()));
}

std::string fit_to_json(const FitResult& fit, const ConfidenceReport* ci,
                        const HetTestResult* het,
                        const std::string& config_text,
                        const std::string& data_path) {
  json root;
  root["format"] = kFormatTag;
  root["estimator"] = estimator_name(fit.estimator);
  root["variant"] = {{"orthogonal", fit.variant.orthogonal},
                     {"latent_noise", fit.variant.latent_noise}};
  root["families"] = {{"mean", kernel_family_name(fit.mean_family)},
                      {"noise", kernel_family_name(fit.noise_family)}};

  json model;
  if (fit.model.symbolic())
    model["source"] = fit.model.source();
  else
    model["source"] = nullptr;  // callable models cannot be restored
  model["d"] = fit.model.d();
  model["q"] = fit.model.q();
  model["theta_bounds"] = mat_json(fit.model.theta_bounds());
  model["gradient"] = fit.model.gradient_path();
  root["model"] = std::move(model);

  json design;
  design["x"] = mat_json(fit.design.X);
  json reps = json::array();
  for (const auto& group : fit.design.replicates) reps.push_back(group);
  design["replicates"] = std::move(reps);
  design["bounds"] = mat_json(fit.design.bounds);
  design["rounding"] = fit.design.rounding;
  design["n"] = fit.design.n();
  design["total_observations"] = fit.design.N();
  root["design"] = std::move(design);

  root["scaler"] = {{"active", fit.scaler.active},
                    {"offset", vec_json(fit.scaler.offset)},
                    {"scale", vec_json(fit.scaler.scale)}};
  root["ortho"] = {{"m", fit.ortho.m},
                   {"seed", fit.ortho.seed},
                   {"jitter_start", fit.ortho.jitter_start},
                   {"jitter_max", fit.ortho.jitter_max},
                   {"min_m_per_q", fit.ortho.min_m_per_q}};
  root["jitter"] = fit.jitter;

  root["params"] = {{"theta", vec_json(fit.params.theta)},
                    {"phi", vec_json(fit.params.phi)},
                    {"nu", fit.params.nu},
                    {"phi_g", vec_json(fit.params.phi_g)},
                    {"g", fit.params.g},
                    {"nu_g", fit.params.nu_g},
                    {"delta", vec_json(fit.params.delta)}};
  root["bounds"] = {{"theta", mat_json(fit.bounds.theta)},
                    {"phi", mat_json(fit.bounds.phi)},
                    {"phi_g", mat_json(fit.bounds.phi_g)},
                    {"g", json::array({fit.bounds.g_lo, fit.bounds.g_hi})},
                    {"delta", json::array(
                                  {fit.bounds.delta_lo, fit.bounds.delta_hi})}};
  root["loglik"] = {{"total", fit.loglik},
                    {"mean_field", fit.mean_field},
                    {"variance_field", fit.variance_field}};
  root["degenerate_noise"] = fit.degenerate_noise;

  json opt;
  opt["best_start"] = fit.best_start;
  json starts = json::array();
  for (const StartReport& s : fit.starts) {
    starts.push_back({{"x0", vec_json(s.x0)},
                      {"value", s.value},
                      {"iters", s.iters},
                      {"evals", s.evals},
                      {"converged", s.converged},
                      {"ok", s.ok},
                      {"status", s.status}});
  }
  opt["starts"] = std::move(starts);
  opt["warnings"] = fit.warnings;
  root["optimizer"] = std::move(opt);

  if (ci) {
    json jc;
    jc["alpha"] = ci->alpha;
    jc["z"] = ci->z;
    jc["chi2_radius"] = ci->chi2_radius;
    json coords = json::array();
    for (Eigen::Index j = 0; j < ci->theta_hat.size(); ++j) {
      coords.push_back({{"estimate", ci->theta_hat[j]},
                        {"se", ci->se[j]},
                        {"lo", ci->intervals(j, 0)},
                        {"hi", ci->intervals(j, 1)}});
    }
    jc["theta"] = std::move(coords);
    jc["theta_cov"] = mat_json(ci->theta_cov);
    jc["conditional_on"] = ci->conditional_on;
    root["confidence"] = std::move(jc);
  }
  if (het) {
    root["het_test"] = {{"statistic", het->statistic},
                        {"dof", het->dof},
                        {"p_value", het->p_value},
                        {"conditional_on", het->conditional_on}};
  }

  json prov;
  prov["version"] = kVersion;
  prov["data_hash"] = design_fingerprint(fit.design);
  if (!data_path.empty()) prov["data_path"] = data_path;
  if (!config_text.empty())
    prov["config_hash"] =
        hex64(fnv1a64(config_text.data(), config_text.size()));
  prov["ortho_seed"] = fit.ortho.seed;
  root["provenance"] = std::move(prov);

  scrub(root);
  return root.dump(2) + "\n";
}

FitResult fit_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("fit JSON parse error: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kFormatTag)
    throw DataError("not a hetcal fit file (missing format tag)");

  const auto& jm = j.at("model");
  if (jm.at("source").is_null())
    throw DataError("fit used a callable model; it cannot be restored");
  ComputerModel model(jm.at("source").get<std::string>(), jm.at("d").get<int>(),
                      jm.at("q").get<int>(),
                      mat_from(jm.at("theta_bounds"), "theta_bounds"));

  const auto& jd = j.at("design");
  const MatrixXd X = mat_from(jd.at("x"), "design.x");
  std::vector<Observation> obs;
  const auto& reps = jd.at("replicates");
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (const auto& y : reps[i])
      obs.push_back({X.row(static_cast<Eigen::Index>(i)).transpose(),
                     y.get<double>()});
  ReplicatedDesign design =
      group_replicates(obs, jd.value("rounding", 8),
                       mat_from(jd.at("bounds"), "design.bounds"));

  FitResult fit{.estimator = estimator_from_string(
                    j.at("estimator").get<std::string>()),
                .variant = {},
                .mean_family = kernel_family_from_string(
                    j.at("families").at("mean").get<std::string>()),
                .noise_family = kernel_family_from_string(
                    j.at("families").at("noise").get<std::string>()),
                .design = std::move(design),
                .model = std::move(model),
                .scaler = {},
                .ortho = {},
                .basis = nullptr,
                .jitter = j.value("jitter", 1e-8)};
  fit.variant = variant_toggles(fit.estimator);

  const auto& js = j.at("scaler");
  fit.scaler.active = js.at("active").get<bool>();
  fit.scaler.offset = vec_from(js.at("offset"), "scaler.offset");
  fit.scaler.scale = vec_from(js.at("scale"), "scaler.scale");

  const auto& jo = j.at("ortho");
  fit.ortho.m = jo.at("m").get<int>();
  fit.ortho.seed = jo.at("seed").get<std::uint64_t>();
  fit.ortho.jitter_start = jo.at("jitter_start").get<double>();
  fit.ortho.jitter_max = jo.at("jitter_max").get<double>();
  fit.ortho.min_m_per_q = jo.value("min_m_per_q", 10);

  const auto& jp = j.at("params");
  fit.params.theta = vec_from(jp.at("theta"), "params.theta");
  fit.params.phi = vec_from(jp.at("phi"), "params.phi");
  fit.params.nu = jp.at("nu").get<double>();
  fit.params.phi_g = vec_from(jp.at("phi_g"), "params.phi_g");
  fit.params.g = jp.at("g").get<double>();
  fit.params.nu_g = jp.at("nu_g").get<double>();
  fit.params.delta = vec_from(jp.at("delta"), "params.delta");

  const auto& jb = j.at("bounds");
  fit.bounds.theta = mat_from(jb.at("theta"), "bounds.theta");
  fit.bounds.phi = mat_from(jb.at("phi"), "bounds.phi");
  fit.bounds.phi_g = mat_from(jb.at("phi_g"), "bounds.phi_g");
  fit.bounds.g_lo = jb.at("g")[0].get<double>();
  fit.bounds.g_hi = jb.at("g")[1].get<double>();
  fit.bounds.delta_lo = jb.at("delta")[0].get<double>();
  fit.bounds.delta_hi = jb.at("delta")[1].get<double>();

  const auto& jl = j.at("loglik");
  fit.loglik = jl.at("total").get<double>();
  fit.mean_field = jl.at("mean_field").get<double>();
  fit.degenerate_noise = j.value("degenerate_noise", false);
  fit.variance_field =
      jl.at("variance_field").is_null()
          ? (fit.degenerate_noise ? std::numeric_limits<double>::quiet_NaN()
                                  : -std::numeric_limits<double>::infinity())
          : jl.at("variance_field").get<double>();

  const auto& jopt = j.at("optimizer");
  fit.best_start = jopt.at("best_start").get<int>();
  for (const auto& s : jopt.at("starts")) {
    StartReport r;
    r.x0 = vec_from(s.at("x0"), "start.x0");
    r.value = s.at("value").is_null()
                  ? -std::numeric_limits<double>::infinity()
                  : s.at("value").get<double>();
    r.iters = s.at("iters").get<int>();
    r.evals = s.at("evals").get<int>();
    r.converged = s.at("converged").get<bool>();
    r.ok = s.at("ok").get<bool>();
    r.status = s.at("status").get<std::string>();
    fit.starts.push_back(std::move(r));
  }
  fit.warnings = jopt.at("warnings").get<std::vector<std::string>>();
  return fit;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("short write on '" + path + "'");
}

}  // namespace hetcal
