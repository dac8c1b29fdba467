#include "hetcal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "hetcal/common.hpp"

namespace hetcal {

namespace {

constexpr int kItMax = 1000;
constexpr double kEps = 1e-16;
constexpr double kFpMin = 1e-300;

// Lower regularized gamma by series: P(a,x) = e^{-x} x^a / Gamma(a) *
// sum_{k>=0} x^k / (a (a+1) ... (a+k)).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kItMax; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by modified Lentz continued fraction.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kItMax; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(x)) {
    if (std::isinf(x) && x > 0.0) return 1.0;
    throw ConfigError("gamma_p: need a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(x)) {
    if (std::isinf(x) && x > 0.0) return 0.0;
    throw ConfigError("gamma_q: need a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0) || dof > 1000.0)
    throw ConfigError("chi2: dof must lie in (0, 1000]");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0) || dof > 1000.0)
    throw ConfigError("chi2: dof must lie in (0, 1000]");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, double dof) {
  if (!(dof > 0.0) || dof > 1000.0)
    throw ConfigError("chi2: dof must lie in (0, 1000]");
  if (!(p >= 0.0 && p < 1.0))
    throw ConfigError("chi2_quantile: p must lie in [0, 1)");
  if (p == 0.0) return 0.0;

  // Bracket the root of cdf(x) = p, then bisect + Newton polish.
  double lo = 0.0, hi = std::max(dof, 1.0);
  while (chi2_cdf(hi, dof) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) break;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, dof) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-9 * (1.0 + hi)) break;
  }
  double x = 0.5 * (lo + hi);
  // Newton refinement on cdf(x) - p with the chi2 density as derivative.
  const double a = 0.5 * dof;
  for (int i = 0; i < 60; ++i) {
    const double f = chi2_cdf(x, dof) - p;
    const double logpdf =
        (a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 - std::lgamma(a);
    const double pdf = std::exp(logpdf);
    if (pdf <= 0.0) break;
    const double step = f / pdf;
    const double xn = x - step;
    if (!(xn > lo && xn < hi)) break;
    x = xn;
    if (std::abs(step) < 1e-14 * (1.0 + x)) break;
  }
  return x;
}

double normal_two_sided_z(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("normal_two_sided_z: alpha must lie in (0, 1)");
  return std::sqrt(chi2_quantile(1.0 - alpha, 1.0));
}

namespace {

// Exact null distribution of the Mann-Whitney U statistic by dynamic
// programming over the number of rank assignments; valid without ties.
double exact_u_p_greater(double u_hi, std::size_t n_hi, std::size_t n_lo) {
  const std::size_t umax = n_hi * n_lo;
  // f[u] = number of arrangements with U == u, built by adding lo-sample items.
  std::vector<double> f(umax + 1, 0.0);
  f[0] = 1.0;
  // Count partitions: iterate the standard recurrence for the Mann-Whitney
  // distribution, equivalent to a bounded-parts partition count.
  for (std::size_t i = 1; i <= n_lo; ++i) {
    std::vector<double> g(umax + 1, 0.0);
    for (std::size_t u = 0; u <= umax; ++u) {
      if (f[u] == 0.0) continue;
      for (std::size_t add = 0; add <= n_hi; ++add) {
        if (u + add > umax) break;
        g[u + add] += f[u];
      }
    }
    f.swap(g);
  }
  double total = 0.0, tail = 0.0;
  for (std::size_t u = 0; u <= umax; ++u) total += f[u];
  for (std::size_t u = 0; u <= umax; ++u)
    if (static_cast<double>(u) >= u_hi) tail += f[u];
  return tail / total;
}

}  // namespace

double rank_sum_p_greater(const std::vector<double>& hi,
                          const std::vector<double>& lo) {
  const std::size_t n1 = hi.size(), n2 = lo.size();
  if (n1 == 0 || n2 == 0)
    throw ConfigError("rank_sum: both samples must be non-empty");

  struct Item {
    double v;
    int grp;  // 1 = hi, 0 = lo
  };
  std::vector<Item> all;
  all.reserve(n1 + n2);
  for (double v : hi) all.push_back({v, 1});
  for (double v : lo) all.push_back({v, 0});
  std::sort(all.begin(), all.end(),
            [](const Item& a, const Item& b) { return a.v < b.v; });

  // Midranks with tie bookkeeping.
  const std::size_t n = all.size();
  std::vector<double> rank(n);
  bool ties = false;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && all[j + 1].v == all[i].v) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) rank[k] = r;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j + 1;
  }

  double r_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (all[i].grp == 1) r_hi += rank[i];
  const double u_hi =
      r_hi - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);

  if (!ties && std::min(n1, n2) <= 10 && n1 * n2 <= 4000)
    return exact_u_p_greater(u_hi, n1, n2);

  const double nn1 = static_cast<double>(n1), nn2 = static_cast<double>(n2);
  const double nn = nn1 + nn2;
  const double mean_u = 0.5 * nn1 * nn2;
  double var_u = nn1 * nn2 * (nn + 1.0) / 12.0;
  if (ties) var_u -= nn1 * nn2 * tie_term / (12.0 * nn * (nn - 1.0));
  if (var_u <= 0.0) return 1.0;  // all observations identical
  const double z = (u_hi - mean_u - 0.5) / std::sqrt(var_u);
  // One-sided upper tail of the standard normal via chi-squared sf.
  const double tail = 0.5 * chi2_sf(z * z, 1.0);
  return z >= 0.0 ? tail : 1.0 - tail;
}

double sample_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ConfigError("sample_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("sample_quantile: p must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * (static_cast<double>(v.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

}  // namespace hetcal
