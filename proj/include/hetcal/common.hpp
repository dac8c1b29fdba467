#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hetcal {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Error taxonomy. The CLI maps these onto exit codes; the library only throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad options, bounds, or mutually inconsistent settings.
struct ConfigError : Error {
  using Error::Error;
};
// Malformed or insufficient input data (CSV contents, schemas, group structure).
struct DataError : Error {
  using Error::Error;
};
// Factorization failures, non-finite objectives, degenerate bases.
struct NumericError : Error {
  using Error::Error;
};
// Expression evaluation outside a function's domain (log of a negative, ...).
struct EvalError : Error {
  using Error::Error;
};
// Filesystem problems: missing files, unwritable outputs.
struct IoError : Error {
  using Error::Error;
};

// Cholesky with optional jitter escalation.  `rel_start` = 0 means "try the
// matrix as given first"; on failure the diagonal is inflated by
// eps * mean(diag), eps escalating tenfold up to `rel_max`.
struct Chol {
  Eigen::LLT<MatrixXd> llt;
  double jitter = 0.0;  // absolute value that was added to the diagonal
  double log_det() const {
    const auto& L = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
  }
};

Chol chol_with_jitter(const MatrixXd& m, double rel_start, double rel_max,
                      const char* what);

// Scientific-notation-safe shortest formatting used by every writer so that
// serialized numbers round-trip through parsing bit-for-bit.
std::string format_double(double v);

// FNV-1a 64-bit hash used for provenance fingerprints of configs and files.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace hetcal
