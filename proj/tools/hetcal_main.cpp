#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "hetcal/baselines.hpp"
#include "hetcal/csvio.hpp"
#include "hetcal/dense_check.hpp"
#include "hetcal/fit.hpp"
#include "hetcal/inference.hpp"
#include "hetcal/predict.hpp"
#include "hetcal/scenario.hpp"
#include "hetcal/serialize.hpp"
#include "hetcal/study.hpp"

namespace {

using namespace hetcal;
using ojson = nlohmann::ordered_json;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + ": '" + tok + "' is not a number");
  }
}

// "lo:hi,lo:hi,..." -> rows x 2
MatrixXd parse_pair_list(const std::string& spec, const char* what) {
  const std::vector<std::string> items = split_commas(spec);
  if (items.empty()) throw ConfigError(std::string(what) + ": empty list");
  MatrixXd out(items.size(), 2);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto colon = items[i].find(':');
    if (colon == std::string::npos)
      throw ConfigError(std::string(what) + ": expected lo:hi, got '" +
                        items[i] + "'");
    out(i, 0) = parse_number(items[i].substr(0, colon), what);
    out(i, 1) = parse_number(items[i].substr(colon + 1), what);
    if (!(out(i, 0) < out(i, 1)))
      throw ConfigError(std::string(what) + ": lo must be < hi in '" +
                        items[i] + "'");
  }
  return out;
}

// "lo:hi:count" per dimension, comma separated; tensor product over dims.
MatrixXd parse_grid_spec(const std::string& spec, int d) {
  const std::vector<std::string> items = split_commas(spec);
  if (static_cast<int>(items.size()) != d)
    throw ConfigError("--grid needs " + std::to_string(d) +
                      " lo:hi:count specs, got " +
                      std::to_string(items.size()));
  std::vector<VectorXd> axes;
  double total = 1;
  for (const std::string& item : items) {
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : item.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("--grid: expected lo:hi:count, got '" + item + "'");
    const double lo = parse_number(item.substr(0, c1), "--grid");
    const double hi = parse_number(item.substr(c1 + 1, c2 - c1 - 1), "--grid");
    const double cnt = parse_number(item.substr(c2 + 1), "--grid");
    const int k = static_cast<int>(cnt);
    if (k < 1 || cnt != k) throw ConfigError("--grid: count must be >= 1");
    if (k > 1 && !(lo < hi)) throw ConfigError("--grid: lo must be < hi");
    VectorXd axis(k);
    for (int i = 0; i < k; ++i)
      axis[i] = k == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(k - 1);
    axes.push_back(std::move(axis));
    total *= k;
    if (total > 1e6) throw ConfigError("--grid: more than 1e6 points");
  }
  const int rows = static_cast<int>(total);
  MatrixXd X(rows, d);
  for (int r = 0; r < rows; ++r) {
    int rem = r;  // last axis varies fastest
    for (int k = d - 1; k >= 0; --k) {
      const int n = static_cast<int>(axes[k].size());
      X(r, k) = axes[k][rem % n];
      rem /= n;
    }
  }
  return X;
}

Scenario resolve_scenario(const std::string& ref) {
  if (is_builtin_scenario(ref)) return builtin_scenario(ref);
  return load_scenario(ref);
}

// ---------------------------------------------------------------- fit ----

struct FitCliOpts {
  std::string data, x_cols, y_col = "y";
  std::string model, theta_bounds, x_bounds;
  std::string estimator = "hetogp";
  std::string mean_kernel = "matern52", noise_kernel = "matern52";
  int starts = 5;
  std::uint64_t seed = 2024;
  int m = 1000;
  std::uint64_t basis_seed = 1;
  bool no_scale = false;
  double alpha = 0.05;
  double jitter = 1e-8;
  std::string out = "fit.json";
  std::string config;
  bool dense_check = false;
};

void add_fit_options(CLI::App* cmd, FitCliOpts& o) {
  cmd->add_option("--data", o.data, "CSV with input and response columns");
  cmd->add_option("--x-cols", o.x_cols,
                  "comma-separated input column names (default x1..xd)");
  cmd->add_option("--y-col", o.y_col, "response column name (default y)");
  cmd->add_option("--model", o.model,
                  "builtin model name or an expression in x1..,theta1..");
  cmd->add_option("--theta-bounds", o.theta_bounds,
                  "lo:hi per parameter (expression models)");
  cmd->add_option("--x-bounds", o.x_bounds,
                  "lo:hi per input dimension (default: data range)");
  cmd->add_option("--estimator", o.estimator,
                  "wls | homgp | homogp | hetgp | hetogp");
  cmd->add_option("--mean-kernel", o.mean_kernel, "matern52 | gaussian");
  cmd->add_option("--noise-kernel", o.noise_kernel, "matern52 | gaussian");
  cmd->add_option("--starts", o.starts, "multistart count");
  cmd->add_option("--seed", o.seed, "multistart RNG seed");
  cmd->add_option("--m", o.m, "Monte Carlo basis size (orthogonal variants)");
  cmd->add_option("--basis-seed", o.basis_seed, "Monte Carlo basis seed");
  cmd->add_flag("--no-scale-inputs", o.no_scale,
                "keep kernels on raw input coordinates");
  cmd->add_option("--alpha", o.alpha, "CI level (default 0.05 = 95% CIs)");
  cmd->add_option("--jitter", o.jitter, "relative rescue jitter cap");
  cmd->add_option("--out", o.out, "output fit JSON path");
  cmd->add_option("--config", o.config, "JSON file with these options");
  cmd->add_flag("--dense-check", o.dense_check)->group("");  // hidden
}

// Fills options the user left untouched from the --config JSON.
void apply_config(const CLI::App* cmd, FitCliOpts& o) {
  if (o.config.empty()) return;
  ojson j;
  try {
    j = ojson::parse(read_text_file(o.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("--config parse error: ") + e.what());
  }
  auto unset = [&cmd](const char* flag) { return cmd->count(flag) == 0; };
  auto get_str = [&j](const char* key, std::string& dst) {
    if (j.contains(key)) dst = j[key].get<std::string>();
  };
  if (unset("--data")) get_str("data", o.data);
  if (unset("--y-col")) get_str("y_col", o.y_col);
  if (unset("--model")) get_str("model", o.model);
  if (unset("--estimator")) get_str("estimator", o.estimator);
  if (unset("--mean-kernel")) get_str("mean_kernel", o.mean_kernel);
  if (unset("--noise-kernel")) get_str("noise_kernel", o.noise_kernel);
  if (unset("--out")) get_str("out", o.out);
  if (unset("--x-cols") && j.contains("x_cols")) {
    if (j["x_cols"].is_array()) {
      std::string joined;
      for (const auto& c : j["x_cols"])
        joined += (joined.empty() ? "" : ",") + c.get<std::string>();
      o.x_cols = joined;
    } else {
      o.x_cols = j["x_cols"].get<std::string>();
    }
  }
  auto pairs_to_string = [](const ojson& arr) {
    std::string s;
    for (const auto& row : arr) {
      if (!row.is_array() || row.size() != 2)
        throw ConfigError("--config: bounds entries must be [lo, hi]");
      s += (s.empty() ? "" : ",") + std::to_string(row[0].get<double>()) +
           ":" + std::to_string(row[1].get<double>());
    }
    return s;
  };
  if (unset("--theta-bounds") && j.contains("theta_bounds"))
    o.theta_bounds = j["theta_bounds"].is_string()
                         ? j["theta_bounds"].get<std::string>()
                         : pairs_to_string(j["theta_bounds"]);
  if (unset("--x-bounds") && j.contains("x_bounds"))
    o.x_bounds = j["x_bounds"].is_string() ? j["x_bounds"].get<std::string>()
                                           : pairs_to_string(j["x_bounds"]);
  if (unset("--starts") && j.contains("starts")) o.starts = j["starts"];
  if (unset("--seed") && j.contains("seed")) o.seed = j["seed"];
  if (unset("--m") && j.contains("m")) o.m = j["m"];
  if (unset("--basis-seed") && j.contains("basis_seed"))
    o.basis_seed = j["basis_seed"];
  if (unset("--no-scale-inputs") && j.contains("scale_inputs"))
    o.no_scale = !j["scale_inputs"].get<bool>();
  if (unset("--alpha") && j.contains("alpha")) o.alpha = j["alpha"];
  if (unset("--jitter") && j.contains("jitter")) o.jitter = j["jitter"];
}

struct FitArtifacts {
  ReplicatedDesign design;
  std::optional<ComputerModel> model;
  std::optional<FitResult> fit;
  std::optional<WlsResult> wls;
  std::optional<ConfidenceReport> ci;
  std::optional<HetTestResult> het;
  std::string effective_config;  // canonical merged options (hashed)
};

// Canonical text of the merged options; hashed into provenance so identical
// configurations are recognizable across runs.
std::string effective_config_text(const FitCliOpts& o) {
  ojson j;
  j["data"] = o.data;
  j["x_cols"] = o.x_cols;
  j["y_col"] = o.y_col;
  j["model"] = o.model;
  j["theta_bounds"] = o.theta_bounds;
  j["x_bounds"] = o.x_bounds;
  j["estimator"] = o.estimator;
  j["mean_kernel"] = o.mean_kernel;
  j["noise_kernel"] = o.noise_kernel;
  j["starts"] = o.starts;
  j["seed"] = o.seed;
  j["m"] = o.m;
  j["basis_seed"] = o.basis_seed;
  j["scale_inputs"] = !o.no_scale;
  j["alpha"] = o.alpha;
  j["jitter"] = o.jitter;
  return j.dump();
}

FitArtifacts run_fit_pipeline(const CLI::App* cmd, FitCliOpts o,
                              bool require_latent) {
  apply_config(cmd, o);
  if (o.data.empty()) throw ConfigError("--data is required");
  if (o.model.empty()) throw ConfigError("--model is required");

  FitArtifacts art;
  art.effective_config = effective_config_text(o);

  std::optional<ComputerModel> model;
  if (is_builtin_model(o.model)) {
    model.emplace(builtin_model(o.model));
  } else {
    if (o.theta_bounds.empty())
      throw ConfigError("expression models need --theta-bounds");
    const MatrixXd tb = parse_pair_list(o.theta_bounds, "--theta-bounds");
    const int d = o.x_cols.empty()
                      ? 1
                      : static_cast<int>(split_commas(o.x_cols).size());
    model.emplace(o.model, d, static_cast<int>(tb.rows()), tb);
  }

  DesignSchema schema;
  schema.y_column = o.y_col;
  if (o.x_cols.empty()) {
    for (int k = 1; k <= model->d(); ++k)
      schema.x_columns.push_back("x" + std::to_string(k));
  } else {
    schema.x_columns = split_commas(o.x_cols);
  }
  if (static_cast<int>(schema.x_columns.size()) != model->d())
    throw ConfigError("model has d = " + std::to_string(model->d()) +
                      " inputs but " +
                      std::to_string(schema.x_columns.size()) +
                      " x columns were given");

  MatrixXd xb;
  if (!o.x_bounds.empty()) {
    xb = parse_pair_list(o.x_bounds, "--x-bounds");
    if (xb.rows() != model->d())
      throw ConfigError("--x-bounds needs one lo:hi per input dimension");
  }
  art.design = read_design_csv(o.data, schema, 8, xb);
  art.model = std::move(model);

  const EstimatorKind est = estimator_from_string(o.estimator);
  if (require_latent && !(est == EstimatorKind::HetGp ||
                          est == EstimatorKind::HetOgp))
    throw ConfigError(
        "het-test needs a heteroscedastic estimator (hetgp or hetogp)");

  if (est == EstimatorKind::Wls) {
    art.wls = fit_wls(art.design, *art.model, WlsWeights::SampleVariance,
                      VectorXd(), o.starts, o.seed);
    return art;
  }

  FitConfig fc;
  fc.estimator = est;
  fc.mean_family = kernel_family_from_string(o.mean_kernel);
  fc.noise_family = kernel_family_from_string(o.noise_kernel);
  fc.starts = o.starts;
  fc.seed = o.seed;
  fc.ortho.m = o.m;
  fc.ortho.seed = o.basis_seed;
  fc.jitter = o.jitter;
  fc.scale_inputs = !o.no_scale;
  art.fit = fit_variant(art.design, *art.model, fc);

  try {
    art.ci = confidence_region(*art.fit, o.alpha);
    if (art.fit->variant.latent_noise) art.het = het_test(*art.fit);
  } catch (const std::exception& e) {
    std::cerr << "warning: inference unavailable: " << e.what() << "\n";
  }

  if (o.dense_check) {
    if (art.design.N() > 400)
      throw ConfigError("--dense-check is for small designs (N <= 400)");
    const CalibProblem prob = art.fit->problem();
    const DenseCheck dc = dense_log_likelihood(prob, art.fit->params);
    const double rel = std::abs(dc.value - art.fit->mean_field) /
                       std::max(1.0, std::abs(dc.value));
    if (!(rel <= 1e-9))
      throw NumericError("dense check failed: reduced mean field " +
                         format_double(art.fit->mean_field) + " vs dense " +
                         format_double(dc.value));
    std::cerr << "dense check ok: relative gap " << format_double(rel)
              << "\n";
  }
  return art;
}

void print_fit_summary(const FitArtifacts& art) {
  std::ostream& os = std::cout;
  os << std::setprecision(6);
  if (art.wls) {
    const WlsResult& w = *art.wls;
    os << "fit: wls (" << wls_weights_name(w.weights) << " weights)\n";
    os << "data: n = " << art.design.n() << " locations, N = "
       << art.design.N() << " observations, d = " << art.design.d() << "\n";
    os << "objective: " << w.objective << "\n\n";
    os << "  coordinate    Estimate\n";
    for (Eigen::Index j = 0; j < w.theta.size(); ++j)
      os << "  theta" << j + 1 << "        " << w.theta[j] << "\n";
    os << "\n(no likelihood, intervals, or het test for wls)\n";
    return;
  }
  const FitResult& fit = *art.fit;
  os << "fit: " << estimator_name(fit.estimator)
     << (fit.variant.orthogonal ? " (orthogonal bias kernel" : " (free bias kernel")
     << (fit.variant.latent_noise ? ", latent noise field)" : ", constant noise)")
     << "\n";
  os << "data: n = " << fit.design.n() << " locations, N = " << fit.design.N()
     << " observations, d = " << fit.design.d() << "\n";
  os << "log likelihood: " << fit.loglik << " (mean field " << fit.mean_field;
  if (fit.variant.latent_noise && !fit.degenerate_noise)
    os << ", variance field " << fit.variance_field;
  os << ")\n";
  os << "plug-in scales: nu_hat = " << fit.params.nu;
  if (fit.variant.latent_noise) os << ", nu_g_hat = " << fit.params.nu_g;
  os << "\n";
  if (fit.degenerate_noise)
    os << "noise field: degenerate (delta = 0 homoscedastic limit)\n";
  const StartReport& best = fit.starts[fit.best_start];
  os << "optimizer: start " << fit.best_start + 1 << "/" << fit.starts.size()
     << ", " << best.iters << " iterations, "
     << (best.converged ? "converged" : "stopped") << " (" << best.status
     << ")\n";
  for (const std::string& w : fit.warnings) os << "warning: " << w << "\n";
  os << "\n  coordinate    Estimate      95% Confidence Interval\n";
  for (Eigen::Index j = 0; j < fit.params.theta.size(); ++j) {
    os << "  theta" << j + 1 << "        " << std::setw(10)
       << fit.params.theta[j];
    if (art.ci)
      os << "    [" << art.ci->intervals(j, 0) << ", "
         << art.ci->intervals(j, 1) << "]";
    os << "\n";
  }
  if (art.ci && !art.ci->conditional_on.empty()) {
    os << "  (intervals conditional on:";
    for (const auto& s : art.ci->conditional_on) os << " " << s;
    os << ")\n";
  }
  if (art.het) {
    os << "\nheteroscedasticity test: statistic = " << art.het->statistic
       << ", dof = " << art.het->dof << ", p-value = " << art.het->p_value
       << "\n";
  }
}

void write_fit_outputs(const FitArtifacts& art, const FitCliOpts& o) {
  if (art.wls) return;  // wls has no serialized fit format
  const std::string text = fit_to_json(
      *art.fit, art.ci ? &*art.ci : nullptr, art.het ? &*art.het : nullptr,
      art.effective_config, o.data);
  write_text_file(o.out, text);
  std::cerr << "wrote " << o.out << "\n";
}

// ------------------------------------------------------------- predict ----

struct PredictCliOpts {
  std::string fit = "fit.json";
  std::string grid, points, data, x_cols, y_col = "y";
  std::string out = "predictions.csv";
};

void run_predict(const PredictCliOpts& o) {
  const FitResult fit = fit_from_json(read_text_file(o.fit));

  if (!o.data.empty()) {
    DesignSchema schema;
    schema.y_column = o.y_col;
    if (o.x_cols.empty()) {
      for (int k = 1; k <= fit.model.d(); ++k)
        schema.x_columns.push_back("x" + std::to_string(k));
    } else {
      schema.x_columns = split_commas(o.x_cols);
    }
    const ReplicatedDesign check = read_design_csv(o.data, schema, 8);
    if (design_fingerprint(check) != design_fingerprint(fit.design))
      throw DataError("stale fit: '" + o.data +
                      "' does not match the data this fit was trained on");
  }

  MatrixXd X;
  if (!o.points.empty()) {
    const CsvTable t = read_csv(o.points);
    X.resize(t.rows.size(), fit.model.d());
    for (int k = 0; k < fit.model.d(); ++k) {
      const int c = t.require_column("x" + std::to_string(k + 1));
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        X(static_cast<Eigen::Index>(i), k) = t.rows[i][c];
    }
  } else if (!o.grid.empty()) {
    X = parse_grid_spec(o.grid, fit.model.d());
  } else if (fit.model.d() == 1) {
    X = parse_grid_spec(format_double(fit.design.bounds(0, 0)) + ":" +
                            format_double(fit.design.bounds(0, 1)) + ":101",
                        1);
  } else {
    throw ConfigError("multi-dimensional inputs need --grid or --points");
  }

  int outside = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int k = 0; k < fit.model.d(); ++k)
      if (X(i, k) < fit.design.bounds(k, 0) ||
          X(i, k) > fit.design.bounds(k, 1)) {
        ++outside;
        break;
      }
  if (outside > 0)
    std::cerr << "warning: " << outside
              << " prediction points lie outside the training box"
              << " (extrapolation)\n";

  write_predictions_csv(predict(fit, X), o.out);
  std::cerr << "wrote " << o.out << " (" << X.rows() << " rows)\n";
}

// --------------------------------------------------------------- study ----

struct StudyCliOpts {
  std::string scenario;
  int reps = 0;
  std::string replicate_counts, estimators;
  int starts = 5;
  int threads = 0;
  bool no_ci = false;
  std::string out_dir = "study_out";
};

void run_study_cmd(const StudyCliOpts& o) {
  if (o.scenario.empty()) throw ConfigError("--scenario is required");
  const Scenario sc = resolve_scenario(o.scenario);

  StudyConfig cfg;
  cfg.replications = o.reps;
  cfg.starts = o.starts;
  cfg.threads = o.threads;
  cfg.with_ci = !o.no_ci;
  if (!o.estimators.empty()) {
    cfg.estimators.clear();
    for (const std::string& name : split_commas(o.estimators))
      cfg.estimators.push_back(estimator_from_string(name));
  }
  if (!o.replicate_counts.empty()) {
    for (const std::string& tok : split_commas(o.replicate_counts))
      cfg.replicate_counts.push_back(
          static_cast<int>(parse_number(tok, "--replicate-counts")));
  }

  const StudyResult res = run_study(sc, cfg);

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + o.out_dir +
                  "': " + ec.message());
  write_study_csv(res, o.out_dir + "/study.csv");
  const std::string md = summary_markdown(res);
  write_text_file(o.out_dir + "/summary.md", md);
  write_text_file(o.out_dir + "/summary.json", summary_json_text(res));

  ojson checks = ojson::array();
  for (const StudyCheck& c : study_checks(res))
    checks.push_back({{"name", c.name},
                      {"applicable", c.applicable},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  write_text_file(o.out_dir + "/checks.json", checks.dump(2) + "\n");

  std::cout << md;
  int failures = 0;
  for (const StudyRow& r : res.rows)
    if (!r.ok) ++failures;
  if (failures > 0)
    std::cerr << "warning: " << failures << "/" << res.rows.size()
              << " fits failed (see study.csv)\n";
  std::cerr << "wrote " << o.out_dir << "/{study.csv, summary.md, "
            << "summary.json, checks.json}\n";
}

// ------------------------------------------------------------- oracles ----

void run_oracles(const std::string& scenario_ref, const std::string& out) {
  const Scenario sc = resolve_scenario(scenario_ref);
  const ScalarField zeta = [&sc](const VectorXd& x) { return sc.zeta_at(x); };
  const ScalarField rfun = [&sc](const VectorXd& x) { return sc.r_at(x); };
  const VectorXd star = l2_truth_oracle(*sc.model, zeta, sc.bounds);
  const VectorXd prime = wls_limit_oracle(*sc.model, zeta, rfun, sc.bounds);

  std::cout << "scenario: " << sc.name << "\n";
  std::cout << "theta* (L2 projection):";
  for (Eigen::Index j = 0; j < star.size(); ++j)
    std::cout << " " << format_double(star[j]);
  std::cout << "\ntheta' (WLS limit):   ";
  for (Eigen::Index j = 0; j < prime.size(); ++j)
    std::cout << " " << format_double(prime[j]);
  std::cout << "\nseparation |theta' - theta*| = "
            << format_double((star - prime).norm()) << "\n";

  if (!out.empty()) {
    ojson j;
    j["scenario"] = sc.name;
    j["theta_star"] = std::vector<double>(star.data(), star.data() + star.size());
    j["theta_prime"] =
        std::vector<double>(prime.data(), prime.data() + prime.size());
    write_text_file(out, j.dump(2) + "\n");
    std::cerr << "wrote " << out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hetcal: calibrates inexact computer models against replicated "
      "observations with input-dependent noise"};
  app.require_subcommand(1);

  FitCliOpts fit_opts;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit an estimator to a CSV of observations");
  add_fit_options(fit_cmd, fit_opts);

  FitCliOpts het_opts;
  CLI::App* het_cmd = app.add_subcommand(
      "het-test", "fit a heteroscedastic variant and test for noise variation");
  add_fit_options(het_cmd, het_opts);

  PredictCliOpts pred_opts;
  CLI::App* pred_cmd =
      app.add_subcommand("predict", "evaluate a saved fit on new inputs");
  pred_cmd->add_option("--fit", pred_opts.fit, "fit JSON from the fit command");
  pred_cmd->add_option("--grid", pred_opts.grid,
                       "lo:hi:count per dimension, comma separated");
  pred_cmd->add_option("--points", pred_opts.points,
                       "CSV of new inputs with columns x1..xd");
  pred_cmd->add_option("--data", pred_opts.data,
                       "training CSV to verify against the fit's data hash");
  pred_cmd->add_option("--x-cols", pred_opts.x_cols,
                       "input columns of --data (default x1..xd)");
  pred_cmd->add_option("--y-col", pred_opts.y_col, "response column of --data");
  pred_cmd->add_option("--out", pred_opts.out, "output CSV path");

  StudyCliOpts study_opts;
  CLI::App* study_cmd = app.add_subcommand(
      "study", "run a Monte Carlo comparison of the five estimators");
  study_cmd->add_option("--scenario", study_opts.scenario,
                        "scenario JSON path or builtin name "
                        "(tuo1d, tuo1d_const, plumlee3p)");
  study_cmd->add_option("--reps", study_opts.reps,
                        "override the scenario's replication count");
  study_cmd->add_option("--replicate-counts", study_opts.replicate_counts,
                        "comma list of per-location replicate counts");
  study_cmd->add_option("--estimators", study_opts.estimators,
                        "comma list restricting the estimator set");
  study_cmd->add_option("--starts", study_opts.starts, "multistarts per fit");
  study_cmd->add_option("--threads", study_opts.threads,
                        "worker threads (default: hardware)");
  study_cmd->add_flag("--no-ci", study_opts.no_ci,
                      "skip confidence intervals and het tests");
  study_cmd->add_option("--out-dir", study_opts.out_dir, "output directory");

  std::string oracle_scenario, oracle_out;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracles", "print theta* and theta' for a scenario");
  oracle_cmd->add_option("--scenario", oracle_scenario,
                         "scenario JSON path or builtin name");
  oracle_cmd->add_option("--out", oracle_out, "optional JSON output");

  try {
    app.parse(argc, argv);
    if (fit_cmd->parsed()) {
      const FitArtifacts art = run_fit_pipeline(fit_cmd, fit_opts, false);
      print_fit_summary(art);
      write_fit_outputs(art, fit_opts);
    } else if (het_cmd->parsed()) {
      const FitArtifacts art = run_fit_pipeline(het_cmd, het_opts, true);
      if (!art.het)
        throw NumericError("the heteroscedasticity test is unavailable "
                           "(information matrix not invertible)");
      std::cout << std::setprecision(6) << "heteroscedasticity test ("
                << estimator_name(art.fit->estimator)
                << "): statistic = " << art.het->statistic
                << ", dof = " << art.het->dof
                << ", p-value = " << art.het->p_value << "\n";
      if (!art.het->conditional_on.empty()) {
        std::cout << "(conditional on:";
        for (const auto& s : art.het->conditional_on) std::cout << " " << s;
        std::cout << ")\n";
      }
      if (het_cmd->count("--out")) write_fit_outputs(art, het_opts);
    } else if (pred_cmd->parsed()) {
      run_predict(pred_opts);
    } else if (study_cmd->parsed()) {
      run_study_cmd(study_opts);
    } else if (oracle_cmd->parsed()) {
      if (oracle_scenario.empty()) throw ConfigError("--scenario is required");
      run_oracles(oracle_scenario, oracle_out);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
