#pragma once

// Integer maximization for the sacrificed-sample size k.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace qkdrates {

struct IntArgmax {
  std::int64_t arg = 0;
  double value = -std::numeric_limits<double>::infinity();

  bool found() const { return std::isfinite(value); }
};

namespace detail {

template <class F>
class CachedObjective {
 public:
  explicit CachedObjective(F& f) : f_(f) {}

  double operator()(std::int64_t k) {
    if (auto it = cache_.find(k); it != cache_.end()) return it->second;
    const double v = f_(k);
    cache_.emplace(k, v);
    if (v > best_.value) best_ = {k, v};
    return v;
  }

  const IntArgmax& best() const { return best_; }

 private:
  F& f_;
  std::map<std::int64_t, double> cache_;
  IntArgmax best_;
};

/// `count` integers spread logarithmically over [lo, hi], deduplicated.
inline std::vector<std::int64_t> log_spaced(std::int64_t lo, std::int64_t hi, int count) {
  std::vector<std::int64_t> out;
  if (hi - lo + 1 <= count) {
    for (std::int64_t k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (int i = 0; i < count; ++i) {
    auto k = static_cast<std::int64_t>(std::llround(std::exp(a + (b - a) * i / (count - 1))));
    k = std::max(lo, std::min(hi, k));
    if (out.empty() || k > out.back()) out.push_back(k);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

template <class Obj>
void golden_refine(Obj& f, std::int64_t lo, std::int64_t hi, std::int64_t anchor) {
  constexpr double kInvPhi2 = 0.3819660112501051;  // 2 - φ
  while (hi - lo > 3) {
    const auto span = static_cast<double>(hi - lo);
    std::int64_t m1 = lo + static_cast<std::int64_t>(std::floor(kInvPhi2 * span));
    std::int64_t m2 = hi - static_cast<std::int64_t>(std::floor(kInvPhi2 * span));
    if (m2 <= m1) m2 = m1 + 1;
    const double f1 = f(m1);
    const double f2 = f(m2);
    if (f1 < f2) {
      lo = m1;
    } else if (f1 > f2) {
      hi = m2;
    } else if (!std::isfinite(f1)) {
      // both infeasible: move toward the known feasible anchor
      if (anchor < m1)
        hi = m1;
      else if (anchor > m2)
        lo = m2;
      else {
        lo = m1;
        hi = m2;
      }
    } else {
      lo = m1;
      hi = m2;
    }
  }
  for (std::int64_t k = lo; k <= hi; ++k) f(k);
}

}  // namespace detail

/// Maximizes f over integers in [lo, hi]. f returns -inf where k is infeasible.
///
/// A 21-point logarithmic scan brackets the maximum and a golden-section search on the
/// integers refines it. If the scan shows more than one local maximum the scan is redone
/// densely (every integer when the range has at most 4096 points, else 2001 log-spaced
/// points) before refining around the best point.
template <class F>
IntArgmax maximize_integer(F&& f, std::int64_t lo, std::int64_t hi, int coarse_points = 21) {
  if (hi < lo) return {};
  detail::CachedObjective obj(f);

  auto scan = [&](const std::vector<std::int64_t>& ks) {
    std::vector<double> vals;
    vals.reserve(ks.size());
    for (auto k : ks) vals.push_back(obj(k));
    return vals;
  };
  auto local_maxima = [](const std::vector<double>& v) {
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) continue;
      const bool left = i == 0 || v[i] >= v[i - 1];
      const bool right = i + 1 == v.size() || v[i] > v[i + 1];
      if (left && right) peaks.push_back(i);
    }
    return peaks;
  };

  std::vector<std::int64_t> ks = detail::log_spaced(lo, hi, coarse_points);
  std::vector<double> vals = scan(ks);
  if (local_maxima(vals).size() > 1) {
    ks = hi - lo + 1 <= 4096 ? detail::log_spaced(lo, hi, 4096) : detail::log_spaced(lo, hi, 2001);
    vals = scan(ks);
  }
  if (!obj.best().found()) return {};

  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[best]) best = i;
  const std::int64_t left = ks[best == 0 ? 0 : best - 1];
  const std::int64_t right = ks[best + 1 == ks.size() ? best : best + 1];
  detail::golden_refine(obj, left, right, ks[best]);
  return obj.best();
}

}  // namespace qkdrates
