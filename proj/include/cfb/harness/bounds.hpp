#pragma once

// Exact evaluation of the three cumulative-regret guarantees, as functions
// of the horizon and problem parameters. Natural logarithms throughout.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace cfb {

// 2 sqrt(17 K T ln(2|F|T^3/delta)) (ln(T/K) + 1) + sqrt(2 T ln(2/delta)) + K
inline double bound_finite(std::int64_t horizon, int k, std::int64_t cardinality,
                           double delta) {
  if (horizon < 1 || k < 1 || cardinality < 1 || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bound_finite: invalid parameters");
  const double t = static_cast<double>(horizon);
  const double kd = static_cast<double>(k);
  const double lg = std::log(2.0 * static_cast<double>(cardinality) * t * t * t / delta);
  return 2.0 * std::sqrt(17.0 * kd * t * lg) * (std::log(t / kd) + 1.0) +
         std::sqrt(2.0 * t * std::log(2.0 / delta)) + kd;
}

// 2 sqrt(17 E T ln(2|F|T^3/delta)) (3 ln T + 1) + sqrt(2 T ln(2/delta)) + E
inline double bound_infinite(std::int64_t horizon, double entropy,
                             std::int64_t cardinality, double delta) {
  if (horizon < 1 || !(entropy > 0.0) || cardinality < 1 ||
      !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bound_infinite: invalid parameters");
  const double t = static_cast<double>(horizon);
  const double lg = std::log(2.0 * static_cast<double>(cardinality) * t * t * t / delta);
  return 2.0 * std::sqrt(17.0 * entropy * t * lg) * (3.0 * std::log(t) + 1.0) +
         std::sqrt(2.0 * t * std::log(2.0 / delta)) + entropy;
}

// 608.5 sqrt(2 d T ln(|F|T/delta)) + 2 sqrt(2 T ln(2/delta)) + 2
inline double bound_falcon(std::int64_t horizon, int d, std::int64_t cardinality,
                           double delta) {
  if (horizon < 1 || d < 1 || cardinality < 1 || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bound_falcon: invalid parameters");
  const double t = static_cast<double>(horizon);
  const double dd = static_cast<double>(d);
  return 608.5 * std::sqrt(2.0 * dd * t *
                           std::log(static_cast<double>(cardinality) * t / delta)) +
         2.0 * std::sqrt(2.0 * t * std::log(2.0 / delta)) + 2.0;
}

}  // namespace cfb
