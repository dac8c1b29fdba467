#include "hetcal/study.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "hetcal/inference.hpp"
#include "hetcal/predict.hpp"
#include "hetcal/rng.hpp"
#include "hetcal/stats.hpp"

namespace hetcal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Grids {
  MatrixXd Xr, Xs;       // RMSE / score test locations
  VectorXd zeta_r;       // truth on Xr
  VectorXd zeta_s, r_s;  // truth and true variance on Xs
};

Grids make_grids(const Scenario& sc) {
  Grids g;
  g.Xr = metric_grid(sc, sc.rmse_grid, 1);
  g.Xs = metric_grid(sc, sc.score_grid, 2);
  g.zeta_r.resize(g.Xr.rows());
  for (Eigen::Index i = 0; i < g.Xr.rows(); ++i)
    g.zeta_r[i] = sc.zeta_at(g.Xr.row(i).transpose());
  g.zeta_s.resize(g.Xs.rows());
  g.r_s.resize(g.Xs.rows());
  for (Eigen::Index i = 0; i < g.Xs.rows(); ++i) {
    g.zeta_s[i] = sc.zeta_at(g.Xs.row(i).transpose());
    g.r_s[i] = sc.r_at(g.Xs.row(i).transpose());
  }
  return g;
}

double model_rmse(const ComputerModel& model, const VectorXd& theta,
                  const MatrixXd& X, const VectorXd& truth) {
  const VectorXd f = model.eval_batch(X, theta);
  return std::sqrt((truth - f).squaredNorm() / static_cast<double>(X.rows()));
}

void run_task(const Scenario& sc, const StudyConfig& cfg, const Grids& grids,
              const VectorXd& theta_star, int rep, int replicates,
              EstimatorKind est, StudyRow* row) {
  row->rep = rep;
  row->replicates = replicates;
  row->estimator = est;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ReplicatedDesign design = generate_dataset(sc, rep, replicates);
    const int ei = static_cast<int>(est);

    if (est == EstimatorKind::Wls) {
      WlsWeights w = cfg.wls_weights;
      if (w == WlsWeights::SampleVariance && !design.fully_replicated())
        w = WlsWeights::Unit;  // unreplicated locations: no variance estimate
      const WlsResult wr = fit_wls(
          design, *sc.model, w, VectorXd(), cfg.starts,
          derive_seed(derive_seed(sc.seed, 0xf17500ULL + ei), rep));
      row->theta_hat = wr.theta;
      row->converged = wr.starts[wr.best_start].converged;
      row->rmse = model_rmse(*sc.model, wr.theta, grids.Xr, grids.zeta_r);
      row->loglik = kNaN;
    } else {
      FitConfig fc;
      fc.estimator = est;
      fc.starts = cfg.starts;
      fc.seed = derive_seed(derive_seed(sc.seed, 0xf17500ULL + ei), rep);
      fc.ortho.m = sc.basis_m;
      fc.ortho.seed = derive_seed(derive_seed(sc.seed, 0xba5150ULL + ei), rep);
      const FitResult fit = fit_variant(design, *sc.model, fc);
      row->theta_hat = fit.params.theta;
      row->converged = fit.starts[fit.best_start].converged;
      row->loglik = fit.loglik;
      row->rmse = rmse(predict(fit, grids.Xr), grids.zeta_r);
      row->score =
          predictive_score(predict(fit, grids.Xs), grids.zeta_s, grids.r_s);
      row->has_score = true;

      if (cfg.with_ci) {
        try {
          const ConfidenceReport cr = confidence_region(fit, cfg.alpha);
          row->covered.resize(sc.model->q());
          for (int j = 0; j < sc.model->q(); ++j)
            row->covered[j] = (cr.intervals(j, 0) <= theta_star[j] &&
                               theta_star[j] <= cr.intervals(j, 1))
                                  ? 1
                                  : 0;
          if (fit.variant.latent_noise) {
            const HetTestResult ht = het_test(fit);
            row->het_stat = ht.statistic;
            row->het_p = ht.p_value;
            row->has_het = true;
          }
        } catch (const std::exception& e) {
          row->error = std::string("inference: ") + e.what();
        }
      }
    }
    row->bias = row->theta_hat - theta_star;
    row->ok = true;
  } catch (const std::exception& e) {
    row->ok = false;
    row->error = e.what();
  }
  row->seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
}

}  // namespace

StudyResult run_study(const Scenario& sc, const StudyConfig& cfg) {
  if (cfg.estimators.empty())
    throw ConfigError("run_study: estimator list is empty");
  if (cfg.replications < 0)
    throw ConfigError("run_study: replications must be >= 0");

  StudyResult res;
  res.scenario_name = sc.name;
  res.seed = sc.seed;
  res.q = sc.model->q();
  res.alpha = cfg.alpha;
  res.estimators = cfg.estimators;
  res.replications = cfg.replications > 0 ? cfg.replications : sc.replications;
  res.replicate_counts = cfg.replicate_counts.empty()
                             ? std::vector<int>{sc.design.replicates}
                             : cfg.replicate_counts;
  for (int c : res.replicate_counts)
    if (c < 1) throw ConfigError("run_study: replicate counts must be >= 1");

  const ScalarField zeta = [&sc](const VectorXd& x) { return sc.zeta_at(x); };
  const ScalarField rfun = [&sc](const VectorXd& x) { return sc.r_at(x); };
  res.theta_star = l2_truth_oracle(*sc.model, zeta, sc.bounds);
  res.theta_prime = wls_limit_oracle(*sc.model, zeta, rfun, sc.bounds);

  const Grids grids = make_grids(sc);
  res.r_constant =
      (grids.r_s.maxCoeff() - grids.r_s.minCoeff()) <=
      1e-12 * std::max(1.0, std::abs(grids.r_s.maxCoeff()));

  const int E = static_cast<int>(res.estimators.size());
  const int groups = static_cast<int>(res.replicate_counts.size());
  const int total = groups * res.replications * E;
  res.rows.resize(total);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int t = next.fetch_add(1); t < total; t = next.fetch_add(1)) {
      const int gi = t / (res.replications * E);
      const int rem = t % (res.replications * E);
      const int rep = rem / E;
      const EstimatorKind est = res.estimators[rem % E];
      run_task(sc, cfg, grids, res.theta_star, rep,
               res.replicate_counts[gi], est, &res.rows[t]);
    }
  };

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return res;
}

namespace {

double median_or_nan(std::vector<double> v) {
  return v.empty() ? kNaN : sample_median(std::move(v));
}
double iqr_or_nan(std::vector<double> v) {
  return v.empty() ? kNaN : sample_iqr(std::move(v));
}

}  // namespace

std::vector<GroupSummary> summarize(const StudyResult& res) {
  std::vector<GroupSummary> out;
  for (int replicates : res.replicate_counts) {
    for (EstimatorKind est : res.estimators) {
      GroupSummary g;
      g.estimator = est;
      g.replicates = replicates;
      g.theta_mean = VectorXd::Constant(res.q, kNaN);
      g.theta_sd = VectorXd::Constant(res.q, kNaN);
      g.median_bias = VectorXd::Constant(res.q, kNaN);
      g.iqr_bias = VectorXd::Constant(res.q, kNaN);
      g.coverage = VectorXi::Zero(res.q);
      g.median_rmse = g.median_score = kNaN;

      std::vector<const StudyRow*> ok;
      for (const StudyRow& row : res.rows) {
        if (row.estimator != est || row.replicates != replicates) continue;
        ++g.rows;
        if (!row.ok) {
          ++g.failures;
          continue;
        }
        ok.push_back(&row);
        if (row.converged) ++g.converged;
      }
      const int k = static_cast<int>(ok.size());
      if (k > 0) {
        for (int j = 0; j < res.q; ++j) {
          std::vector<double> th(k), bi(k);
          for (int i = 0; i < k; ++i) {
            th[i] = ok[i]->theta_hat[j];
            bi[i] = ok[i]->bias[j];
          }
          double mean = 0.0;
          for (double v : th) mean += v;
          mean /= k;
          double ss = 0.0;
          for (double v : th) ss += (v - mean) * (v - mean);
          g.theta_mean[j] = mean;
          g.theta_sd[j] = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
          g.median_bias[j] = median_or_nan(bi);
          g.iqr_bias[j] = iqr_or_nan(std::move(bi));
        }
        std::vector<double> rm, sc, hp;
        for (const StudyRow* row : ok) {
          rm.push_back(row->rmse);
          if (row->has_score) sc.push_back(row->score);
          if (!row->covered.empty()) {
            ++g.ci_rows;
            for (int j = 0; j < res.q; ++j) g.coverage[j] += row->covered[j];
          }
          if (row->has_het) hp.push_back(row->het_p);
        }
        g.median_rmse = median_or_nan(std::move(rm));
        g.score_rows = static_cast<int>(sc.size());
        g.median_score = median_or_nan(std::move(sc));
        g.het_rows = static_cast<int>(hp.size());
        if (!hp.empty()) {
          int r01 = 0, r05 = 0;
          for (double p : hp) {
            if (p < 0.01) ++r01;
            if (p < 0.05) ++r05;
          }
          g.het_reject_01 = static_cast<double>(r01) / g.het_rows;
          g.het_reject_05 = static_cast<double>(r05) / g.het_rows;
        } else {
          g.het_reject_01 = g.het_reject_05 = kNaN;
        }
      } else {
        g.het_reject_01 = g.het_reject_05 = kNaN;
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

void write_study_csv(const StudyResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write study CSV '" + path + "'");
  out << "replication,estimator,replicates,metric,value\n";
  auto emit = [&out](const StudyRow& r, const char* metric, double v) {
    out << r.rep << ',' << estimator_name(r.estimator) << ',' << r.replicates
        << ',' << metric << ',' << format_double(v) << '\n';
  };
  for (const StudyRow& r : res.rows) {
    emit(r, "ok", r.ok ? 1 : 0);
    emit(r, "converged", r.converged ? 1 : 0);
    if (r.ok) {
      for (int j = 0; j < r.theta_hat.size(); ++j) {
        const std::string sj = std::to_string(j + 1);
        emit(r, ("theta" + sj).c_str(), r.theta_hat[j]);
        emit(r, ("bias" + sj).c_str(), r.bias[j]);
      }
      emit(r, "rmse", r.rmse);
      if (r.has_score) emit(r, "score", r.score);
      for (std::size_t j = 0; j < r.covered.size(); ++j)
        emit(r, ("covered" + std::to_string(j + 1)).c_str(), r.covered[j]);
      if (r.has_het) {
        emit(r, "het_stat", r.het_stat);
        emit(r, "het_p", r.het_p);
      }
      if (std::isfinite(r.loglik)) emit(r, "loglik", r.loglik);
    }
    emit(r, "seconds", r.seconds);
  }
  if (!out) throw IoError("short write on study CSV '" + path + "'");
}

namespace {

std::string fmt_cell(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::string fmt_vec(const VectorXd& v) {
  std::string s;
  for (int j = 0; j < v.size(); ++j) {
    if (j) s += " / ";
    s += fmt_cell(v[j]);
  }
  return s;
}

}  // namespace

std::string summary_markdown(const StudyResult& res) {
  const std::vector<GroupSummary> groups = summarize(res);
  std::ostringstream md;
  md << "# Study: " << res.scenario_name << "\n\n";
  md << "- replications: " << res.replications << " per group, seed "
     << res.seed << "\n";
  md << "- theta* = (" << fmt_vec(res.theta_star) << "), theta' = ("
     << fmt_vec(res.theta_prime) << ")\n";
  md << "- noise: " << (res.r_constant ? "homoscedastic" : "heteroscedastic")
     << "\n\n";
  md << "| estimator | replicates | fits | failed | median bias | IQR bias | "
        "median RMSE | median score | coverage | het reject @1% |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const GroupSummary& g : groups) {
    md << "| " << estimator_name(g.estimator) << " | " << g.replicates << " | "
       << g.rows << " | " << g.failures << " | " << fmt_vec(g.median_bias)
       << " | " << fmt_vec(g.iqr_bias) << " | " << fmt_cell(g.median_rmse)
       << " | " << fmt_cell(g.median_score) << " | ";
    if (g.ci_rows > 0) {
      for (int j = 0; j < res.q; ++j) {
        if (j) md << " / ";
        md << g.coverage[j] << "/" << g.ci_rows;
      }
    } else {
      md << "-";
    }
    md << " | " << fmt_cell(g.het_reject_01) << " |\n";
  }
  md << "\n";
  const std::vector<StudyCheck> checks = study_checks(res);
  if (!checks.empty()) {
    md << "## Checks\n\n";
    for (const StudyCheck& c : checks)
      if (c.applicable)
        md << "- " << (c.pass ? "PASS" : "FAIL") << " " << c.name << ": "
           << c.detail << "\n";
  }
  return md.str();
}

std::string summary_json_text(const StudyResult& res) {
  using json = nlohmann::ordered_json;
  json root;
  root["scenario"] = res.scenario_name;
  root["seed"] = res.seed;
  root["replications"] = res.replications;
  root["replicate_counts"] = res.replicate_counts;
  root["alpha"] = res.alpha;
  root["r_constant"] = res.r_constant;
  root["theta_star"] = std::vector<double>(
      res.theta_star.data(), res.theta_star.data() + res.theta_star.size());
  root["theta_prime"] = std::vector<double>(
      res.theta_prime.data(), res.theta_prime.data() + res.theta_prime.size());

  json rows = json::array();
  for (const StudyRow& r : res.rows) {
    json jr;
    jr["rep"] = r.rep;
    jr["estimator"] = estimator_name(r.estimator);
    jr["replicates"] = r.replicates;
    jr["ok"] = r.ok;
    jr["converged"] = r.converged;
    if (!r.error.empty()) jr["error"] = r.error;
    if (r.ok) {
      jr["theta_hat"] = std::vector<double>(
          r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size());
      jr["bias"] =
          std::vector<double>(r.bias.data(), r.bias.data() + r.bias.size());
      jr["rmse"] = r.rmse;
      if (r.has_score) jr["score"] = r.score;
      if (!r.covered.empty()) jr["covered"] = r.covered;
      if (r.has_het) {
        jr["het_stat"] = r.het_stat;
        jr["het_p"] = r.het_p;
      }
      if (std::isfinite(r.loglik)) jr["loglik"] = r.loglik;
    }
    rows.push_back(std::move(jr));
  }
  root["rows"] = std::move(rows);

  json groups = json::array();
  for (const GroupSummary& g : summarize(res)) {
    json jg;
    jg["estimator"] = estimator_name(g.estimator);
    jg["replicates"] = g.replicates;
    jg["rows"] = g.rows;
    jg["failures"] = g.failures;
    jg["converged"] = g.converged;
    auto vec = [](const VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    jg["theta_mean"] = vec(g.theta_mean);
    jg["theta_sd"] = vec(g.theta_sd);
    jg["median_bias"] = vec(g.median_bias);
    jg["iqr_bias"] = vec(g.iqr_bias);
    jg["median_rmse"] = g.median_rmse;
    jg["median_score"] = g.median_score;
    jg["score_rows"] = g.score_rows;
    jg["coverage"] =
        std::vector<int>(g.coverage.data(), g.coverage.data() + g.coverage.size());
    jg["ci_rows"] = g.ci_rows;
    jg["het_reject_01"] = g.het_reject_01;
    jg["het_reject_05"] = g.het_reject_05;
    jg["het_rows"] = g.het_rows;
    groups.push_back(std::move(jg));
  }
  root["groups"] = std::move(groups);

  json checks = json::array();
  for (const StudyCheck& c : study_checks(res)) {
    json jc;
    jc["name"] = c.name;
    jc["applicable"] = c.applicable;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    checks.push_back(std::move(jc));
  }
  root["checks"] = std::move(checks);
  // NaN is not valid JSON; nlohmann would emit "null" only for json(nullptr),
  // so scrub non-finite numbers into nulls before dumping.
  std::function<void(json&)> scrub = [&scrub](json& node) {
    if (node.is_number_float() && !std::isfinite(node.get<double>()))
      node = nullptr;
    else if (node.is_object() || node.is_array())
      for (auto& child : node) scrub(child);
  };
  scrub(root);
  return root.dump(2) + "\n";
}

namespace {

const GroupSummary* find_group(const std::vector<GroupSummary>& groups,
                               EstimatorKind est, int replicates) {
  for (const GroupSummary& g : groups)
    if (g.estimator == est && g.replicates == replicates) return &g;
  return nullptr;
}

std::vector<double> collect(const StudyResult& res, EstimatorKind est,
                            int replicates,
                            const std::function<bool(const StudyRow&)>& want,
                            const std::function<double(const StudyRow&)>& get) {
  std::vector<double> v;
  for (const StudyRow& r : res.rows)
    if (r.ok && r.estimator == est && r.replicates == replicates && want(r))
      v.push_back(get(r));
  return v;
}

bool has_estimator(const StudyResult& res, EstimatorKind est) {
  for (EstimatorKind e : res.estimators)
    if (e == est) return true;
  return false;
}

std::string fmt_num(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

}  // namespace

std::vector<StudyCheck> study_checks(const StudyResult& res) {
  std::vector<StudyCheck> out;
  const std::vector<GroupSummary> groups = summarize(res);
  const int c0 = res.replicate_counts.front();
  const int c1 = res.replicate_counts.back();

  {  // WLS limit: mean of the WLS fits sits at theta', away from theta*.
    StudyCheck c{"wls_limit", false, false, ""};
    const GroupSummary* w = find_group(groups, EstimatorKind::Wls, c0);
    if (has_estimator(res, EstimatorKind::Wls) && w && !res.r_constant &&
        w->rows - w->failures >= 10) {
      c.applicable = true;
      const double sep = (res.theta_prime - res.theta_star).norm();
      const int k = w->rows - w->failures;
      bool near_prime = true, away_star = false;
      for (int j = 0; j < res.q; ++j) {
        const double mcse = w->theta_sd[j] / std::sqrt(static_cast<double>(k));
        if (std::abs(w->theta_mean[j] - res.theta_prime[j]) > 3 * mcse)
          near_prime = false;
        if (std::abs(w->theta_mean[j] - res.theta_star[j]) > 3 * mcse)
          away_star = true;
      }
      c.pass = sep > 0.02 && near_prime && away_star;
      c.detail = "|theta'-theta*| = " + fmt_num(sep) + ", mean WLS = (" +
                 fmt_vec(w->theta_mean) + ") vs theta' = (" +
                 fmt_vec(res.theta_prime) + ")" +
                 (near_prime ? "" : " [not within 3 MCSE of theta']") +
                 (away_star ? "" : " [not separated from theta*]");
    }
    out.push_back(std::move(c));
  }

  {  // HetOGP coverage of theta* in the nominal band.
    StudyCheck c{"hetogp_coverage", false, false, ""};
    const GroupSummary* h = find_group(groups, EstimatorKind::HetOgp, c0);
    if (h && res.q == 1 && h->ci_rows >= 50) {
      c.applicable = true;
      const double frac = static_cast<double>(h->coverage[0]) / h->ci_rows;
      c.pass = frac >= 0.85 && frac <= 0.99;
      c.detail = std::to_string(h->coverage[0]) + "/" +
                 std::to_string(h->ci_rows) + " intervals cover theta*";
    }
    out.push_back(std::move(c));
  }

  {  // Bias ranking: HetOGP below WLS, no worse than HomOGP.
    StudyCheck c{"bias_ranking", false, false, ""};
    const GroupSummary* het = find_group(groups, EstimatorKind::HetOgp, c0);
    const GroupSummary* wls = find_group(groups, EstimatorKind::Wls, c0);
    const GroupSummary* hom = find_group(groups, EstimatorKind::HomOgp, c0);
    if (het && wls && hom && res.q == 1 && !res.r_constant) {
      c.applicable = true;
      const double bh = std::abs(het->median_bias[0]);
      const double bw = std::abs(wls->median_bias[0]);
      const double bo = std::abs(hom->median_bias[0]);
      c.pass = bh < bw && bh <= bo + 1e-12;
      c.detail = "|median bias| hetogp " + fmt_num(bh) + ", wls " +
                 fmt_num(bw) + ", homogp " + fmt_num(bo);
    }
    out.push_back(std::move(c));
  }

  {  // Heteroscedastic variants score higher than homoscedastic ones.
    StudyCheck c{"score_ranking", false, false, ""};
    const bool have =
        has_estimator(res, EstimatorKind::HetOgp) &&
        has_estimator(res, EstimatorKind::HetGp) &&
        has_estimator(res, EstimatorKind::HomOgp) &&
        has_estimator(res, EstimatorKind::HomGp);
    if (have && !res.r_constant) {
      auto score_of = [&res, c0](EstimatorKind e) {
        return collect(
            res, e, c0, [](const StudyRow& r) { return r.has_score; },
            [](const StudyRow& r) { return r.score; });
      };
      std::vector<double> hi = score_of(EstimatorKind::HetOgp);
      const std::vector<double> hi2 = score_of(EstimatorKind::HetGp);
      hi.insert(hi.end(), hi2.begin(), hi2.end());
      std::vector<double> lo = score_of(EstimatorKind::HomOgp);
      const std::vector<double> lo2 = score_of(EstimatorKind::HomGp);
      lo.insert(lo.end(), lo2.begin(), lo2.end());
      if (hi.size() >= 10 && lo.size() >= 10) {
        c.applicable = true;
        const double p = rank_sum_p_greater(hi, lo);
        c.pass = p < 0.01;
        c.detail = "rank-sum p = " + fmt_num(p) + " (het scores > hom scores)";
      }
    }
    out.push_back(std::move(c));
  }

  {  // More replicates shrink the HetOGP bias IQR.
    StudyCheck c{"replicate_monotonicity", false, false, ""};
    const GroupSummary* lo = find_group(groups, EstimatorKind::HetOgp, c0);
    const GroupSummary* hi = find_group(groups, EstimatorKind::HetOgp, c1);
    if (lo && hi && c1 > c0) {
      c.applicable = true;
      int shrunk = 0;
      std::string per;
      for (int j = 0; j < res.q; ++j) {
        if (hi->iqr_bias[j] <= lo->iqr_bias[j]) ++shrunk;
        per += (j ? ", " : "") + fmt_num(lo->iqr_bias[j]) + "->" +
               fmt_num(hi->iqr_bias[j]);
      }
      const int need = (2 * res.q + 2) / 3;  // 2-of-3 rule, 1-of-1 for q = 1
      c.pass = shrunk >= need;
      c.detail = "IQR per coordinate (" + std::to_string(c0) + " -> " +
                 std::to_string(c1) + " replicates): " + per + "; " +
                 std::to_string(shrunk) + "/" + std::to_string(res.q) +
                 " shrank";
    }
    out.push_back(std::move(c));
  }

  {  // Het-test calibration: size on homoscedastic data, power otherwise.
    StudyCheck c{res.r_constant ? "het_test_type1" : "het_test_power", false,
                 false, ""};
    const GroupSummary* h = find_group(groups, EstimatorKind::HetOgp, c0);
    if (h && h->het_rows >= 50) {
      c.applicable = true;
      const double rate = h->het_reject_01;
      if (res.r_constant) {
        c.pass = rate >= 0.0 && rate <= 0.04;
        c.detail = "type-I rate @1% = " + fmt_num(rate) + " over " +
                   std::to_string(h->het_rows) + " sims";
      } else {
        c.pass = rate > 0.5;
        c.detail = "power @1% = " + fmt_num(rate) + " over " +
                   std::to_string(h->het_rows) + " sims";
      }
    }
    out.push_back(std::move(c));
  }

  return out;
}

}  // namespace hetcal
