#pragma once

// Independent reference computations used only by the tests. Nothing here calls into
// the library's numerical routines.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

inline double xlogx(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

/// Two-basis objective in λ? (bits), written out term by term.
inline double objective_2mub(int d, double q, double l) {
  const double dm = d - 1.0;
  const double edge = (q - dm * dm * l) / dm;
  return std::log2(static_cast<double>(d)) + xlogx(1.0 - 2.0 * q + dm * dm * l) + 2.0 * dm * xlogx(edge) +
         dm * dm * xlogx(l);
}

/// Three-basis objective in λ? (bits), for d > 2.
inline double objective_3mub(int d, double q, double l) {
  const double dm = d - 1.0;
  const double mass = q - 2.0 * dm * l;
  const double off = mass > 0 ? mass * std::log2(mass / ((d - 2.0) * dm)) : 0.0;
  return std::log2(static_cast<double>(d)) + off + 3.0 * dm * xlogx(l) + xlogx(1.0 - q - dm * l);
}

struct GridMin {
  double arg;
  double value;
  double step;
};

template <class F>
GridMin grid_argmin(F&& f, double lo, double hi, int points) {
  GridMin best{lo, std::numeric_limits<double>::infinity(), (hi - lo) / (points - 1)};
  for (int i = 0; i < points; ++i) {
    const double x = lo + best.step * i;
    const double v = f(x);
    if (v < best.value) best = {x, v, best.step};
  }
  return best;
}

/// Φ(x) in long double via erfc.
inline long double normal_cdf(long double x) { return 0.5L * std::erfc(-x / std::numbers::sqrt2_v<long double>); }

/// Φ⁻¹(p) by bisection on the long-double CDF; works on log p in the far tail.
inline double normal_quantile_bisect(double p) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 400; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double c = normal_cdf(mid);
    bool below;
    if (p < 1e-3)
      below = std::log(c) < std::log(static_cast<long double>(p));
    else
      below = c < p;
    (below ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline double shannon(const std::vector<double>& p) {
  double h = 0;
  for (double v : p) h -= xlogx(v);
  return h;
}

/// Classical relative entropy and its variance in bits.
inline std::pair<double, double> kl_and_variance(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0, m2 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    const double t = std::log2(p[i] / q[i]);
    d += p[i] * t;
    m2 += p[i] * t * t;
  }
  return {d, m2 - d * d};
}

inline std::int64_t hamming(const std::vector<int>& x, const std::vector<int>& y) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] != y[i];
  return n;
}

/// Serfling-type penalty written directly from its definition.
inline double nu(double n, double k, double eps) { return std::sqrt(n * (k + 1) * std::log(2 / eps) / (k * k * (n - k))); }

/// h(Q) + Q log2(d-1).
inline double leak(int d, double q) {
  return -xlogx(q) - xlogx(1 - q) + q * std::log2(d - 1.0);
}

}  // namespace oracle
