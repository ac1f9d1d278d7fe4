#pragma once

// Asymptotic (one-shot coherent information) key rates and their zero crossings.

#include <qkdrates/channel_model.hpp>
#include <qkdrates/entropy.hpp>
#include <qkdrates/errors.hpp>
#include <qkdrates/parallel.hpp>

#include <cmath>
#include <vector>

namespace qkdrates {

struct RatePoint {
  int d = 0;
  int mubs = 0;
  double q = 0.0;
  double rate = 0.0;
  double lambda_q = 0.0;
};

/// log d + 2[Q log Q + (1−Q) log(1−Q) − Q log(d−1)]
inline double rate_2mub(int d, double q) {
  validate_family(d, 2);
  if (!(q >= 0.0 && q <= max_q_2mub(d)))
    throw DomainError("Q=" + std::to_string(q) + " is outside [0, (d-1)/d] for the 2-basis protocol");
  return std::log2(static_cast<double>(d)) - 2.0 * d_ary_leak(d, q);
}

inline double rate_3mub(int d, double q) {
  validate_family(d, 3);
  const ChannelCoefficients c = solve_3mub(d, q);
  if (d == 2) return 1.0 - shannon(c.lambda);
  return three_mub_objective(d, q, c.lambda_q);
}

inline double asymptotic_rate(int d, int mubs, double q) {
  validate_family(d, mubs);
  return mubs == 2 ? rate_2mub(d, q) : rate_3mub(d, q);
}

/// Zero crossing of the rate curve, by bisection on [1e-6, 0.5] down to a 1e-12 bracket.
inline double threshold(int d, int mubs) {
  validate_family(d, mubs);
  double lo = 1e-6;
  double hi = 0.5;
  if (mubs == 2) hi = std::min(hi, max_q_2mub(d));
  const double f_lo = asymptotic_rate(d, mubs, lo);
  const double f_hi = asymptotic_rate(d, mubs, hi);
  if (!(f_lo > 0.0 && f_hi < 0.0))
    throw DomainError("rate curve has no sign change on [1e-6, 0.5] for d=" + std::to_string(d));
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double f = asymptotic_rate(d, mubs, mid);
    if (f > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// 0, step, 2·step, … up to qmax (inclusive within 1e-9 relative).
inline std::vector<double> make_q_grid(double qmax, double step) {
  detail::require(step > 0.0, "step must be positive");
  detail::require(qmax >= 0.0, "qmax must be non-negative");
  std::vector<double> grid;
  const auto count = static_cast<long long>(std::floor(qmax / step * (1.0 + 1e-9)));
  grid.reserve(count + 1);
  for (long long i = 0; i <= count; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

/// One row per (d, Q) inside the channel domain; rates are clipped at zero.
inline std::vector<RatePoint> sweep_asymptotic(const std::vector<int>& d_list, int mubs, const std::vector<double>& q_grid,
                                               unsigned threads = 1) {
  for (int d : d_list) validate_family(d, mubs);
  std::vector<std::pair<int, double>> jobs;
  for (int d : d_list)
    for (double q : q_grid)
      if (in_channel_domain(d, mubs, q)) jobs.emplace_back(d, q);

  std::vector<RatePoint> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto [d, q] = jobs[i];
    const ChannelCoefficients c = solve_channel(d, mubs, q);
    const double r = asymptotic_rate(d, mubs, q);
    rows[i] = {d, mubs, q, std::max(r, 0.0), c.lambda_q};
  });
  return rows;
}

}  // namespace qkdrates
