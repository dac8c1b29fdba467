#pragma once

#include <string>
#include <vector>

#include "hetcal/baselines.hpp"
#include "hetcal/fit.hpp"
#include "hetcal/scenario.hpp"

namespace hetcal {

struct StudyConfig {
  // Default: all five estimators.
  std::vector<EstimatorKind> estimators = {
      EstimatorKind::Wls, EstimatorKind::HomGp, EstimatorKind::HomOgp,
      EstimatorKind::HetGp, EstimatorKind::HetOgp};
  int replications = 0;               // 0: scenario default
  std::vector<int> replicate_counts;  // empty: scenario default, one group
  int starts = 5;
  double alpha = 0.05;   // CI level for the coverage indicator
  bool with_ci = true;   // information-matrix CIs + het tests per fit
  int threads = 0;       // 0: hardware concurrency
  WlsWeights wls_weights = WlsWeights::SampleVariance;
};

// One (replication, estimator) outcome.  NaN / empty marks a metric that the
// estimator does not provide (score and CIs for WLS, het test for
// homoscedastic variants) or that was skipped by config.
struct StudyRow {
  int rep = 0;
  int replicates = 0;
  EstimatorKind estimator = EstimatorKind::HetOgp;
  bool ok = false;          // the fit produced estimates
  bool converged = false;   // optimizer convergence of the winning start
  std::string error;        // set when ok == false
  VectorXd theta_hat;
  VectorXd bias;            // theta_hat - theta_star
  double loglik = 0.0;
  double rmse = 0.0;
  double score = 0.0;
  bool has_score = false;
  std::vector<int> covered;  // per-coordinate CI coverage of theta_star
  double het_stat = 0.0, het_p = 0.0;
  bool has_het = false;
  double seconds = 0.0;     // wall time; excluded from canonical output
};

struct StudyResult {
  std::string scenario_name;
  std::uint64_t seed = 0;
  int q = 0;
  VectorXd theta_star, theta_prime;  // oracles, computed once
  bool r_constant = false;           // homoscedastic scenario
  std::vector<int> replicate_counts;
  int replications = 0;
  std::vector<EstimatorKind> estimators;
  double alpha = 0.05;
  std::vector<StudyRow> rows;  // ordered by (replicate group, rep, estimator)
};

// Runs the full Monte Carlo study. Individual fit failures become rows with
// ok == false; only scenario-level problems throw. Replications run in
// parallel; the result ordering and all seeds are schedule-independent.
StudyResult run_study(const Scenario& sc, const StudyConfig& cfg);

// Per (estimator, replicate-count) aggregation over the ok rows.
struct GroupSummary {
  EstimatorKind estimator = EstimatorKind::HetOgp;
  int replicates = 0;
  int rows = 0, failures = 0, converged = 0;
  VectorXd theta_mean, theta_sd;      // moments of theta_hat
  VectorXd median_bias, iqr_bias;     // per coordinate
  double median_rmse = 0.0;
  double median_score = 0.0;
  int score_rows = 0;
  VectorXi coverage;                  // per-coordinate cover counts
  int ci_rows = 0;
  double het_reject_01 = 0.0, het_reject_05 = 0.0;
  int het_rows = 0;
};
std::vector<GroupSummary> summarize(const StudyResult& res);

// Long-format CSV: replication, estimator, replicates, metric, value; one
// metric per row (theta1.., bias1.., rmse, score, covered1.., het_stat,
// het_p, loglik, converged, ok, seconds, error flag).
void write_study_csv(const StudyResult& res, const std::string& path);

// Markdown summary: one row per (estimator, replicate-count) group.
std::string summary_markdown(const StudyResult& res);

// Canonical JSON of the study (rows + aggregates, wall times excluded):
// byte-identical across reruns of the same scenario + seed.
std::string summary_json_text(const StudyResult& res);

// Scenario-applicable distributional checks (oracle separation, coverage
// band, estimator ranking, replicate monotonicity, het-test calibration).
struct StudyCheck {
  std::string name;
  bool applicable = false;
  bool pass = false;
  std::string detail;
};
std::vector<StudyCheck> study_checks(const StudyResult& res);

}  // namespace hetcal
