#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetcal/baselines.hpp"
#include "hetcal/dense_check.hpp"
#include "hetcal/fit.hpp"
#include "hetcal/inference.hpp"
#include "hetcal/predict.hpp"
#include "hetcal/scenario.hpp"
#include "hetcal/serialize.hpp"
#include "hetcal/study.hpp"

namespace py = pybind11;
using namespace hetcal;

namespace {

ReplicatedDesign design_from_arrays(const MatrixXd& X, const VectorXd& y,
                                    const MatrixXd& bounds, int rounding) {
  if (X.rows() != y.size())
    throw DataError("x and y must have the same number of rows");
  std::vector<Observation> obs;
  obs.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    obs.push_back({X.row(i).transpose(), y[i]});
  return group_replicates(obs, rounding, bounds);
}

FitResult fit_py(const ReplicatedDesign& design, const ComputerModel& model,
                 const std::string& estimator, int starts, std::uint64_t seed,
                 int m, std::uint64_t basis_seed, bool scale_inputs,
                 double jitter) {
  FitConfig fc;
  fc.estimator = estimator_from_string(estimator);
  fc.starts = starts;
  fc.seed = seed;
  fc.ortho.m = m;
  fc.ortho.seed = basis_seed;
  fc.scale_inputs = scale_inputs;
  fc.jitter = jitter;
  return fit_variant(design, model, fc);
}

py::dict predictions_dict(const std::vector<PredictiveDistribution>& preds) {
  const Eigen::Index k = static_cast<Eigen::Index>(preds.size());
  const Eigen::Index d = k ? preds[0].x.size() : 0;
  MatrixXd X(k, d);
  VectorXd mean(k), total(k), noise(k), model(k), disc(k), disc_var(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    X.row(i) = preds[i].x.transpose();
    mean[i] = preds[i].mean;
    total[i] = preds[i].total_variance;
    noise[i] = preds[i].noise_variance;
    model[i] = preds[i].model_value;
    disc[i] = preds[i].discrepancy_mean;
    disc_var[i] = preds[i].discrepancy_variance;
  }
  py::dict out;
  out["x"] = X;
  out["mean"] = mean;
  out["total_variance"] = total;
  out["noise_variance"] = noise;
  out["model"] = model;
  out["discrepancy"] = disc;
  out["discrepancy_variance"] = disc_var;
  return out;
}

}  // namespace

PYBIND11_MODULE(_hetcal, mod) {
  mod.doc() = "calibration of inexact computer models under "
              "input-dependent noise";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(mod, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError",
                                       PyExc_ArithmeticError);
  py::register_exception<EvalError>(mod, "EvalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(mod, "IoError", PyExc_OSError);

  py::class_<ReplicatedDesign>(mod, "Design")
      .def_readonly("x", &ReplicatedDesign::X)
      .def_readonly("replicates", &ReplicatedDesign::replicates)
      .def_property_readonly("a",
                             [](const ReplicatedDesign& d) { return d.a; })
      .def_readonly("ybar", &ReplicatedDesign::ybar)
      .def_readonly("s2", &ReplicatedDesign::s2)
      .def_readonly("bounds", &ReplicatedDesign::bounds)
      .def_property_readonly("n", &ReplicatedDesign::n)
      .def_property_readonly("d", &ReplicatedDesign::d)
      .def_property_readonly("total", &ReplicatedDesign::N)
      .def("r_hat", &ReplicatedDesign::r_hat)
      .def("__repr__", [](const ReplicatedDesign& d) {
        return "Design(n=" + std::to_string(d.n()) +
               ", N=" + std::to_string(d.N()) +
               ", d=" + std::to_string(d.d()) + ")";
      });

  mod.def("design", &design_from_arrays, py::arg("x"), py::arg("y"),
          py::arg("bounds") = MatrixXd(), py::arg("rounding") = 8,
          "group raw observations (x: N x d, y: N) into a replicated design");
  mod.def(
      "read_design_csv",
      [](const std::string& path, const std::vector<std::string>& x_cols,
         const std::string& y_col, const MatrixXd& bounds) {
        return read_design_csv(path, {x_cols, y_col}, 8, bounds);
      },
      py::arg("path"), py::arg("x_cols"), py::arg("y_col") = "y",
      py::arg("bounds") = MatrixXd());

  py::class_<ComputerModel>(mod, "Model")
      .def(py::init<std::string, int, int, MatrixXd>(), py::arg("source"),
           py::arg("d"), py::arg("q"), py::arg("theta_bounds"))
      .def_property_readonly("d", &ComputerModel::d)
      .def_property_readonly("q", &ComputerModel::q)
      .def_property_readonly("theta_bounds", &ComputerModel::theta_bounds)
      .def_property_readonly("source", &ComputerModel::source)
      .def("__call__", &ComputerModel::eval, py::arg("x"), py::arg("theta"))
      .def("grad_theta", &ComputerModel::grad_theta)
      .def("eval_batch", &ComputerModel::eval_batch);
  mod.def("builtin_model", &builtin_model, py::arg("name"));

  py::class_<HetCalibParams>(mod, "Params")
      .def_readonly("theta", &HetCalibParams::theta)
      .def_readonly("phi", &HetCalibParams::phi)
      .def_readonly("nu", &HetCalibParams::nu)
      .def_readonly("phi_g", &HetCalibParams::phi_g)
      .def_readonly("g", &HetCalibParams::g)
      .def_readonly("nu_g", &HetCalibParams::nu_g)
      .def_readonly("delta", &HetCalibParams::delta);

  py::class_<FitResult>(mod, "Fit")
      .def_property_readonly(
          "estimator",
          [](const FitResult& f) { return estimator_name(f.estimator); })
      .def_readonly("params", &FitResult::params)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("mean_field", &FitResult::mean_field)
      .def_readonly("variance_field", &FitResult::variance_field)
      .def_readonly("degenerate_noise", &FitResult::degenerate_noise)
      .def_readonly("warnings", &FitResult::warnings)
      .def_readonly("best_start", &FitResult::best_start)
      .def_property_readonly("theta",
                             [](const FitResult& f) { return f.params.theta; })
      .def_property_readonly(
          "converged",
          [](const FitResult& f) { return f.starts[f.best_start].converged; })
      .def(
          "predict",
          [](const FitResult& f, const MatrixXd& X) {
            return predictions_dict(predict(f, X));
          },
          py::arg("x"))
      .def(
          "confidence",
          [](const FitResult& f, double alpha) {
            const ConfidenceReport cr = confidence_region(f, alpha);
            py::dict out;
            out["alpha"] = cr.alpha;
            out["theta"] = cr.theta_hat;
            out["se"] = cr.se;
            out["intervals"] = cr.intervals;
            out["theta_cov"] = cr.theta_cov;
            out["chi2_radius"] = cr.chi2_radius;
            out["conditional_on"] = cr.conditional_on;
            return out;
          },
          py::arg("alpha") = 0.05)
      .def("het_test",
           [](const FitResult& f) {
             const HetTestResult ht = het_test(f);
             py::dict out;
             out["statistic"] = ht.statistic;
             out["dof"] = ht.dof;
             out["p_value"] = ht.p_value;
             out["conditional_on"] = ht.conditional_on;
             return out;
           })
      .def("log_likelihood",
           [](const FitResult& f) {
             const LikelihoodResult r =
                 log_likelihood(f.problem(), f.params);
             py::dict out;
             out["value"] = r.value;
             out["mean_field"] = r.mean_field;
             out["variance_field"] = r.variance_field;
             out["nu_hat"] = r.nu_hat;
             out["nu_g_hat"] = r.nu_g_hat;
             return out;
           })
      .def("to_json",
           [](const FitResult& f) { return fit_to_json(f); })
      .def("__repr__", [](const FitResult& f) {
        return std::string("Fit(") + estimator_name(f.estimator) +
               ", loglik=" + format_double(f.loglik) + ")";
      });

  mod.def("fit", &fit_py, py::arg("design"), py::arg("model"),
          py::arg("estimator") = "hetogp", py::arg("starts") = 5,
          py::arg("seed") = 2024, py::arg("m") = 1000,
          py::arg("basis_seed") = 1, py::arg("scale_inputs") = true,
          py::arg("jitter") = 1e-8);
  mod.def("fit_from_json", &fit_from_json, py::arg("text"));

  mod.def(
      "fit_wls",
      [](const ReplicatedDesign& design, const ComputerModel& model,
         const std::string& weights, int starts, std::uint64_t seed) {
        WlsWeights w = WlsWeights::SampleVariance;
        if (weights == "unit") w = WlsWeights::Unit;
        else if (weights == "sample") w = WlsWeights::SampleVariance;
        else throw ConfigError("weights must be 'sample' or 'unit'");
        const WlsResult r = fit_wls(design, model, w, VectorXd(), starts, seed);
        py::dict out;
        out["theta"] = r.theta;
        out["objective"] = r.objective;
        out["weights"] = wls_weights_name(r.weights);
        return out;
      },
      py::arg("design"), py::arg("model"), py::arg("weights") = "sample",
      py::arg("starts") = 5, py::arg("seed") = 2024);

  mod.def(
      "l2_truth_oracle",
      [](const ComputerModel& model, const std::function<double(VectorXd)>& z,
         const MatrixXd& bounds, int nodes) {
        return l2_truth_oracle(
            model, [&z](const VectorXd& x) { return z(x); }, bounds, nodes);
      },
      py::arg("model"), py::arg("zeta"), py::arg("bounds"),
      py::arg("nodes_per_dim") = 200);
  mod.def(
      "wls_limit_oracle",
      [](const ComputerModel& model, const std::function<double(VectorXd)>& z,
         const std::function<double(VectorXd)>& r, const MatrixXd& bounds,
         int nodes) {
        return wls_limit_oracle(
            model, [&z](const VectorXd& x) { return z(x); },
            [&r](const VectorXd& x) { return r(x); }, bounds, nodes);
      },
      py::arg("model"), py::arg("zeta"), py::arg("r"), py::arg("bounds"),
      py::arg("nodes_per_dim") = 200);

  py::class_<Scenario>(mod, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("d", &Scenario::d)
      .def_readonly("bounds", &Scenario::bounds)
      .def_readonly("replications", &Scenario::replications)
      .def_readonly("seed", &Scenario::seed)
      .def_property_readonly(
          "model", [](const Scenario& s) { return *s.model; })
      .def("zeta", &Scenario::zeta_at, py::arg("x"))
      .def("r", &Scenario::r_at, py::arg("x"))
      .def("dataset",
           [](const Scenario& s, int rep) { return generate_dataset(s, rep); },
           py::arg("rep") = 0);
  mod.def("builtin_scenario", &builtin_scenario, py::arg("name"));
  mod.def("load_scenario", &load_scenario, py::arg("path"));

  mod.attr("__version__") = "1.0.0";
}
