#include "hetcal/common.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace hetcal {

Chol chol_with_jitter(const MatrixXd& m, double rel_start, double rel_max,
                      const char* what) {
  const Eigen::Index n = m.rows();
  double scale = m.diagonal().cwiseAbs().mean();
  if (!(scale > 0.0)) scale = 1.0;

  Chol out;
  out.llt.compute(m);
  if (rel_start <= 0.0 && out.llt.info() == Eigen::Success) return out;

  double eps = rel_start > 0.0 ? rel_start : 1e-12;
  for (; eps <= rel_max * 1.0000001; eps *= 10.0) {
    MatrixXd j = m;
    j.diagonal().array() += eps * scale;
    out.llt.compute(j);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = eps * scale;
      return out;
    }
  }
  throw NumericError(std::string(what) +
                     ": Cholesky failed even with maximal jitter " +
                     format_double(rel_max * scale) + " on the diagonal");
  (void)n;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest representation that round-trips: try increasing precision.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::vector<char> buf(1 << 16);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace hetcal
