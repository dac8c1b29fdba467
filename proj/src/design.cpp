#include "hetcal/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetcal/csvio.hpp"

namespace hetcal {

namespace {

// Decimal rounding with a guard against scaling overflow: values too large
// for the scaled representation are already spaced coarser than the rounding
// grid and pass through unchanged.
double round_decimals(double v, int places) {
  const double scale = std::pow(10.0, places);
  if (!std::isfinite(v * scale) || std::abs(v) > 1e15 / scale) return v;
  return std::round(v * scale) / scale;
}

bool lex_less(const VectorXd& a, const VectorXd& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

}  // namespace

bool ReplicatedDesign::fully_replicated() const {
  return (a.array() >= 2).all();
}

VectorXd ReplicatedDesign::r_hat() const {
  VectorXd r(n());
  for (int i = 0; i < n(); ++i)
    r[i] = a[i] >= 2 ? s2[i] * static_cast<double>(a[i]) /
                           (static_cast<double>(a[i]) - 1.0)
                     : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<Observation> ReplicatedDesign::expand() const {
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(N()));
  for (int i = 0; i < n(); ++i)
    for (double y : replicates[static_cast<std::size_t>(i)])
      out.push_back({X.row(i).transpose(), y});
  return out;
}

ReplicatedDesign group_replicates(const std::vector<Observation>& obs,
                                  int rounding, const MatrixXd& bounds) {
  if (obs.empty()) throw DataError("group_replicates: no observations");
  if (rounding < 0 || rounding > 15)
    throw ConfigError("group_replicates: rounding must lie in [0, 15]");
  const int d = static_cast<int>(obs.front().x.size());
  if (d < 1) throw DataError("group_replicates: empty input coordinates");

  struct Rec {
    VectorXd key;
    double y;
  };
  std::vector<Rec> recs;
  recs.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    if (o.x.size() != d)
      throw DataError("group_replicates: observation " + std::to_string(i + 1) +
                      " has dimension " + std::to_string(o.x.size()) +
                      ", expected " + std::to_string(d));
    if (!std::isfinite(o.y) || !o.x.allFinite())
      throw DataError("group_replicates: observation " + std::to_string(i + 1) +
                      " is not finite");
    VectorXd key(d);
    for (int k = 0; k < d; ++k) key[k] = round_decimals(o.x[k], rounding);
    recs.push_back({std::move(key), o.y});
  }

  std::stable_sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) {
    if (lex_less(a.key, b.key)) return true;
    if (lex_less(b.key, a.key)) return false;
    return a.y < b.y;
  });

  ReplicatedDesign out;
  out.rounding = rounding;
  std::vector<VectorXd> locs;
  std::vector<std::vector<double>> groups;
  for (const auto& r : recs) {
    if (locs.empty() || lex_less(locs.back(), r.key)) {
      locs.push_back(r.key);
      groups.emplace_back();
    }
    groups.back().push_back(r.y);
  }

  const int n = static_cast<int>(locs.size());
  out.X.resize(n, d);
  out.a.resize(n);
  out.ybar.resize(n);
  out.s2.resize(n);
  out.replicates = std::move(groups);
  for (int i = 0; i < n; ++i) {
    out.X.row(i) = locs[static_cast<std::size_t>(i)];
    const auto& ys = out.replicates[static_cast<std::size_t>(i)];
    const double ai = static_cast<double>(ys.size());
    out.a[i] = static_cast<int>(ys.size());
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= ai;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    out.ybar[i] = mean;
    out.s2[i] = ss / ai;
  }

  if (bounds.rows() == 0) {
    out.bounds.resize(d, 2);
    for (int k = 0; k < d; ++k) {
      out.bounds(k, 0) = out.X.col(k).minCoeff();
      out.bounds(k, 1) = out.X.col(k).maxCoeff();
    }
  } else {
    if (bounds.rows() != d || bounds.cols() != 2)
      throw ConfigError("group_replicates: bounds must be d x 2");
    for (int k = 0; k < d; ++k)
      if (!(bounds(k, 0) < bounds(k, 1)))
        throw ConfigError("group_replicates: bounds row " +
                          std::to_string(k + 1) + " must satisfy lo < hi");
    out.bounds = bounds;
  }
  return out;
}

ReplicatedDesign read_design_csv(const std::string& path,
                                 const DesignSchema& schema, int rounding,
                                 const MatrixXd& bounds) {
  if (schema.x_columns.empty())
    throw ConfigError("read_design_csv: no input columns given");
  const CsvTable t = read_csv(path);
  std::vector<int> xi;
  xi.reserve(schema.x_columns.size());
  for (const auto& c : schema.x_columns) xi.push_back(t.require_column(c));
  const int yi = t.require_column(schema.y_column);

  std::vector<Observation> obs;
  obs.reserve(t.rows.size());
  const int d = static_cast<int>(xi.size());
  for (const auto& row : t.rows) {
    Observation o;
    o.x.resize(d);
    for (int k = 0; k < d; ++k)
      o.x[k] = row[static_cast<std::size_t>(xi[static_cast<std::size_t>(k)])];
    o.y = row[static_cast<std::size_t>(yi)];
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw DataError(path + ": no data rows");
  return group_replicates(obs, rounding, bounds);
}

void write_design_csv(const ReplicatedDesign& design, const std::string& path,
                      const DesignSchema& schema) {
  if (static_cast<int>(schema.x_columns.size()) != design.d())
    throw ConfigError("write_design_csv: schema/x dimension mismatch");
  CsvTable t;
  t.columns = schema.x_columns;
  t.columns.push_back(schema.y_column);
  for (const auto& o : design.expand()) {
    std::vector<double> row(static_cast<std::size_t>(design.d()) + 1);
    for (int k = 0; k < design.d(); ++k)
      row[static_cast<std::size_t>(k)] = o.x[k];
    row.back() = o.y;
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

}  // namespace hetcal
