#pragma once

// Conditional reward distributions on [0,1] with a prescribed mean: exact
// Bernoulli, and a gaussian truncated to [0,1] whose location parameter is
// re-solved at load time so the post-truncation mean matches the prescribed
// mean to 1e-9.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfb/rng.hpp"

namespace cfb {

inline double normal_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865476);
}

// Inverse standard-normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, giving ~1e-15 relative accuracy on (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

enum class RewardKind { bernoulli, truncated_gaussian };

class RewardModel {
 public:
  RewardModel() = default;

  static RewardModel bernoulli() {
    RewardModel m;
    m.kind_ = RewardKind::bernoulli;
    return m;
  }

  static RewardModel truncated_gaussian(double sigma) {
    if (!(sigma > 0.0 && sigma <= 0.25))
      throw std::invalid_argument(
          "truncated-gaussian sigma must lie in (0, 0.25], got " +
          std::to_string(sigma));
    RewardModel m;
    m.kind_ = RewardKind::truncated_gaussian;
    m.sigma_ = sigma;
    return m;
  }

  RewardKind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  // Mean of N(mu, sigma^2) conditioned on [0,1].
  double truncated_mean(double mu) const {
    const double alpha = (0.0 - mu) / sigma_;
    const double beta = (1.0 - mu) / sigma_;
    const double z = normal_cdf(beta) - normal_cdf(alpha);
    if (!(z > 0.0))
      throw std::runtime_error("truncated-gaussian: truncation mass underflow");
    return mu + sigma_ * (normal_pdf(alpha) - normal_pdf(beta)) / z;
  }

  // Pre-truncation location whose truncated mean equals `mean` within 1e-9.
  // The truncated mean is strictly increasing in the location, so bisection
  // over a numerically safe bracket either converges or the target is
  // unattainable at this sigma and the load fails.
  double location_for(double mean) const {
    for (const auto& [m, loc] : cache_)
      if (m == mean) return loc;
    return solve_location(mean);
  }

  // Precompute and verify locations for every mean the problem can attain.
  void prepare(const std::vector<double>& means) {
    if (kind_ != RewardKind::truncated_gaussian) return;
    cache_.clear();
    for (double m : means) {
      bool seen = false;
      for (const auto& [mm, loc] : cache_)
        if (mm == m) { seen = true; break; }
      if (seen) continue;
      cache_.emplace_back(m, solve_location(m));
    }
  }

  double sample(double mean, RngStream& rng) const {
    if (!(mean >= 0.0 && mean <= 1.0))
      throw std::invalid_argument("sample_reward: mean " +
                                  std::to_string(mean) + " outside [0,1]");
    const double u = rng.next_uniform();
    if (kind_ == RewardKind::bernoulli) return u < mean ? 1.0 : 0.0;
    const double mu = location_for(mean);
    const double lo = normal_cdf((0.0 - mu) / sigma_);
    const double hi = normal_cdf((1.0 - mu) / sigma_);
    double p = lo + u * (hi - lo);
    p = std::min(std::max(p, 1e-300), 1.0 - 1e-16);
    const double x = mu + sigma_ * normal_quantile(p);
    return std::min(1.0, std::max(0.0, x));
  }

 private:
  double solve_location(double mean) const {
    // Locations beyond ~7 sigma outside the interval drive the truncated
    // mean through tail ratios whose cdf differences underflow in doubles
    // (the analytic formula stops being monotone there), so the bracket is
    // capped where the formula is still trustworthy; targets outside the
    // bracket's mean range are reported as unattainable.
    double lo = -7.0 * sigma_;
    double hi = 1.0 + 7.0 * sigma_;
    if (!(mean > truncated_mean(lo) && mean < truncated_mean(hi)))
      throw std::invalid_argument(
          "truncated-gaussian: mean " + std::to_string(mean) +
          " not attainable within 1e-9 at sigma " + std::to_string(sigma_) +
          " (location would diverge); use means further inside (0,1) or a "
          "larger sigma");
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (truncated_mean(mid) < mean ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    if (std::fabs(truncated_mean(mu) - mean) > 1e-9)
      throw std::runtime_error(
          "truncated-gaussian: mean correction failed to converge for mean " +
          std::to_string(mean));
    return mu;
  }

  RewardKind kind_ = RewardKind::bernoulli;
  double sigma_ = 0.1;
  std::vector<std::pair<double, double>> cache_;
};

}  // namespace cfb
