#include "hetcal/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "hetcal/lhs.hpp"
#include "hetcal/rng.hpp"

namespace hetcal {

namespace {

using nlohmann::json;

double eval_field(const ExprPtr& e, const VectorXd& x) {
  return eval_expr(e, std::span<const double>(x.data(), x.size()),
                   std::span<const double>());
}

// Deterministic probe grid used to validate r > 0: equispaced for d = 1,
// fixed-seed LHS otherwise, roughly 1e4 points either way.
MatrixXd probe_grid(const MatrixXd& bounds) {
  const int d = static_cast<int>(bounds.rows());
  if (d == 1) {
    const int k = 10000;
    MatrixXd X(k, 1);
    for (int i = 0; i < k; ++i)
      X(i, 0) = bounds(0, 0) +
                (bounds(0, 1) - bounds(0, 0)) * i / static_cast<double>(k - 1);
    return X;
  }
  Rng rng(0x70726f6265ULL);  // fixed: validation must not consume data streams
  return scale_to_box(lhs_unit(10000, d, rng), bounds);
}

MatrixXd parse_bounds(const json& j, int rows, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ConfigError(std::string(what) + " must be an array of " +
                      std::to_string(rows) + " [lo, hi] pairs");
  MatrixXd b(rows, 2);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
        !row[1].is_number())
      throw ConfigError(std::string(what) + " row " + std::to_string(i + 1) +
                        " must be [lo, hi]");
    b(i, 0) = row[0].get<double>();
    b(i, 1) = row[1].get<double>();
    if (!(b(i, 0) < b(i, 1)))
      throw ConfigError(std::string(what) + " row " + std::to_string(i + 1) +
                        ": lo must be < hi");
  }
  return b;
}

int get_int(const json& j, const char* key, int fallback, int lo) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ConfigError(std::string("scenario field '") + key +
                      "' must be an integer");
  const int v = j[key].get<int>();
  if (v < lo)
    throw ConfigError(std::string("scenario field '") + key + "' must be >= " +
                      std::to_string(lo));
  return v;
}

}  // namespace

double Scenario::zeta_at(const VectorXd& x) const { return eval_field(zeta, x); }
double Scenario::r_at(const VectorXd& x) const { return eval_field(r, x); }

Scenario scenario_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario JSON must be an object");
  for (const char* key : {"name", "truth", "variance", "d", "bounds", "design"})
    if (!j.contains(key))
      throw ConfigError(std::string("scenario is missing field '") + key + "'");

  Scenario sc;
  sc.source = j.dump(2);
  sc.name = j["name"].get<std::string>();
  sc.d = get_int(j, "d", 1, 1);
  sc.bounds = parse_bounds(j["bounds"], sc.d, "bounds");
  sc.zeta = parse_expr(j["truth"].get<std::string>(), sc.d, 0);
  sc.r = parse_expr(j["variance"].get<std::string>(), sc.d, 0);

  if (j.contains("model_builtin")) {
    sc.model = std::make_shared<ComputerModel>(
        builtin_model(j["model_builtin"].get<std::string>()));
  } else if (j.contains("model")) {
    if (!j.contains("theta_bounds"))
      throw ConfigError("expression models need 'theta_bounds'");
    const int q = static_cast<int>(j["theta_bounds"].size());
    sc.model = std::make_shared<ComputerModel>(
        j["model"].get<std::string>(), sc.d, q,
        parse_bounds(j["theta_bounds"], q, "theta_bounds"));
  } else {
    throw ConfigError("scenario needs 'model' (expression) or 'model_builtin'");
  }
  if (sc.model->d() != sc.d)
    throw ConfigError("model input dimension " + std::to_string(sc.model->d()) +
                      " does not match scenario d = " + std::to_string(sc.d));

  const auto& dj = j["design"];
  const std::string kind = dj.value("kind", std::string("equispaced"));
  if (kind == "equispaced") {
    if (sc.d != 1)
      throw ConfigError("equispaced designs are 1-d; use kind 'lhs'");
    sc.design.kind = DesignKind::Equispaced;
  } else if (kind == "lhs") {
    sc.design.kind = DesignKind::LatinHypercube;
  } else {
    throw ConfigError("design.kind must be 'equispaced' or 'lhs', got '" +
                      kind + "'");
  }
  sc.design.n = get_int(dj, "n", 8, 2);
  sc.design.replicates = get_int(dj, "replicates", 1, 1);

  sc.replications = get_int(j, "replications", 100, 1);
  sc.rmse_grid = get_int(j, "rmse_grid", 101, 2);
  sc.score_grid = get_int(j, "score_grid", 100, 2);
  sc.basis_m = get_int(j, "basis_m", 1000, 10);
  if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();

  // r must be a genuine variance surface everywhere we may sample.
  const MatrixXd probe = probe_grid(sc.bounds);
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    const double v = sc.r_at(probe.row(i).transpose());
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("scenario '" + sc.name +
                        "': variance expression is not strictly positive at " +
                        "probe point " + std::to_string(i));
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

namespace {

// 2 pi to the last bit; written out because JSON carries plain numbers.
constexpr const char* kTuo1dJson = R"json({
  "name": "tuo1d",
  "truth": "exp(x1/10)*sin(x1)",
  "variance": "(0.01 + 0.2*(x1 - pi)^2)^2",
  "model": "exp(x1/10)*sin(x1) - sqrt(theta1^2 - theta1 + 1)*(sin(theta1*x1) + cos(theta1*x1))",
  "theta_bounds": [[-5, 5]],
  "d": 1,
  "bounds": [[0.0, 6.283185307179586]],
  "design": {"kind": "equispaced", "n": 8, "replicates": 5},
  "replications": 100,
  "rmse_grid": 101,
  "score_grid": 100,
  "seed": 20240401,
  "basis_m": 500
})json";

constexpr const char* kTuo1dConstJson = R"json({
  "name": "tuo1d_const",
  "truth": "exp(x1/10)*sin(x1)",
  "variance": "1",
  "model": "exp(x1/10)*sin(x1) - sqrt(theta1^2 - theta1 + 1)*(sin(theta1*x1) + cos(theta1*x1))",
  "theta_bounds": [[-5, 5]],
  "d": 1,
  "bounds": [[0.0, 6.283185307179586]],
  "design": {"kind": "equispaced", "n": 8, "replicates": 5},
  "replications": 200,
  "rmse_grid": 101,
  "score_grid": 100,
  "seed": 20240402,
  "basis_m": 500
})json";

constexpr const char* kPlumlee3pJson = R"json({
  "name": "plumlee3p",
  "truth": "4*x1 + x1*sin(5*x2)",
  "variance": "0.01*exp(-10*sin(x1*pi)*cos(x2*pi))",
  "model": "theta1 + theta2*x1 + theta3*x2",
  "theta_bounds": [[-2, 2], [0, 8], [-4, 4]],
  "d": 2,
  "bounds": [[0, 1], [0, 1]],
  "design": {"kind": "lhs", "n": 30, "replicates": 5},
  "replications": 100,
  "rmse_grid": 101,
  "score_grid": 100,
  "seed": 20240403,
  "basis_m": 300
})json";

}  // namespace

bool is_builtin_scenario(const std::string& name) {
  return name == "tuo1d" || name == "tuo1d_const" || name == "plumlee3p";
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "tuo1d") return scenario_from_json(kTuo1dJson);
  if (name == "tuo1d_const") return scenario_from_json(kTuo1dConstJson);
  if (name == "plumlee3p") return scenario_from_json(kPlumlee3pJson);
  throw ConfigError("unknown builtin scenario '" + name +
                    "' (available: tuo1d, tuo1d_const, plumlee3p)");
}

namespace {

MatrixXd design_points(const Scenario& sc, Rng& rng) {
  if (sc.design.kind == DesignKind::Equispaced) {
    MatrixXd X(sc.design.n, 1);
    const double lo = sc.bounds(0, 0), hi = sc.bounds(0, 1);
    for (int i = 0; i < sc.design.n; ++i)
      X(i, 0) = lo + (hi - lo) * i / static_cast<double>(sc.design.n - 1);
    return X;
  }
  return scale_to_box(lhs_maximin_unit(sc.design.n, sc.d, rng), sc.bounds);
}

}  // namespace

ReplicatedDesign generate_dataset(const Scenario& sc, int rep_index,
                                  int replicates) {
  if (rep_index < 0) throw ConfigError("replication index must be >= 0");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  Rng rng(derive_seed(sc.seed, static_cast<std::uint64_t>(rep_index)));
  const MatrixXd X = design_points(sc, rng);

  std::vector<Observation> obs;
  obs.reserve(static_cast<std::size_t>(X.rows()) * replicates);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const VectorXd x = X.row(i).transpose();
    const double mean = sc.zeta_at(x);
    const double sd = std::sqrt(sc.r_at(x));
    for (int k = 0; k < replicates; ++k)
      obs.push_back({x, mean + sd * rng.normal()});
  }
  return group_replicates(obs, 8, sc.bounds);
}

ReplicatedDesign generate_dataset(const Scenario& sc, int rep_index) {
  return generate_dataset(sc, rep_index, sc.design.replicates);
}

MatrixXd metric_grid(const Scenario& sc, int count, std::uint64_t salt) {
  if (count < 2) throw ConfigError("metric grid needs at least 2 points");
  if (sc.d == 1) {
    MatrixXd X(count, 1);
    const double lo = sc.bounds(0, 0), hi = sc.bounds(0, 1);
    for (int i = 0; i < count; ++i)
      X(i, 0) = lo + (hi - lo) * i / static_cast<double>(count - 1);
    return X;
  }
  Rng rng(derive_seed(sc.seed, 0x6d65747269ULL + salt));
  return scale_to_box(lhs_maximin_unit(count, sc.d, rng), sc.bounds);
}

}  // namespace hetcal
