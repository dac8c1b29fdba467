#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "hetcal/design.hpp"
#include "hetcal/expr.hpp"
#include "hetcal/model.hpp"

namespace hetcal {

// How the unique input locations of a simulated design are laid out.
enum class DesignKind { Equispaced, LatinHypercube };

struct DesignSpec {
  DesignKind kind = DesignKind::Equispaced;
  int n = 8;           // unique locations
  int replicates = 5;  // observations per location
};

// A synthetic calibration scenario: true process, true noise variance, the
// inexact model handed to the estimators, and the sampling design.  zeta and
// r are expressions in x alone.
struct Scenario {
  std::string name;
  int d = 1;
  ExprPtr zeta;  // true process mean
  ExprPtr r;     // true noise variance (strictly positive on bounds)
  std::shared_ptr<const ComputerModel> model;
  MatrixXd bounds;  // d x 2 input box
  DesignSpec design;
  int replications = 100;  // Monte Carlo repetitions of the whole experiment
  int rmse_grid = 101;     // test grid size for RMSE
  int score_grid = 100;    // test grid size for the predictive score
  std::uint64_t seed = 1;
  int basis_m = 1000;  // Monte Carlo basis size for orthogonal variants
  std::string source;  // JSON text the scenario was loaded from (provenance)

  double zeta_at(const VectorXd& x) const;
  double r_at(const VectorXd& x) const;
};

// Equispaced designs are inclusive of both box endpoints (n >= 2).
// Latin hypercube designs are maximin-polished and drawn fresh per
// replication from the replication's substream.

// Parses and validates a scenario. r is probed for strict positivity on a
// deterministic 1e4-point grid; violations throw ConfigError.
Scenario scenario_from_json(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Bundled scenarios compiled into the library: "tuo1d" (1-d exponential-sine
// process, 8 equispaced locations x 5 replicates), "plumlee3p" (2-d ridge
// process, 30-point LHS), and "tuo1d_const" (same process with r = 1, the
// homoscedastic null used to calibrate the heteroscedasticity test).
Scenario builtin_scenario(const std::string& name);
bool is_builtin_scenario(const std::string& name);

// Draws dataset `rep_index` (0-based): locations per the design spec, then
// y_ij = zeta(x_i) + sqrt(r(x_i)) * z_ij with z iid standard normal, all from
// the substream derive_seed(scenario.seed, rep_index).
ReplicatedDesign generate_dataset(const Scenario& sc, int rep_index);
// Same with the per-location replicate count overridden (> 0).
ReplicatedDesign generate_dataset(const Scenario& sc, int rep_index,
                                  int replicates);

// Deterministic metric grid: equispaced inclusive for d = 1, seeded maximin
// LHS otherwise. `salt` separates the RMSE and score grids.
MatrixXd metric_grid(const Scenario& sc, int count, std::uint64_t salt);

}  // namespace hetcal
