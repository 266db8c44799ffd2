#pragma once

// Link function registry for GLM / heterogeneous reward models. Restricted to
// links with analytically known derivatives, because the curvature constant
// kappa is the max/min ratio of the derivative over the attained dot products.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cfb {

enum class LinkKind { logistic, identity_clipped, probit };

inline LinkKind link_from_name(const std::string& name) {
  if (name == "logistic") return LinkKind::logistic;
  if (name == "identity-clipped") return LinkKind::identity_clipped;
  if (name == "probit") return LinkKind::probit;
  throw std::invalid_argument("unknown link '" + name + "'");
}

inline const char* link_name(LinkKind k) {
  switch (k) {
    case LinkKind::logistic: return "logistic";
    case LinkKind::identity_clipped: return "identity-clipped";
    case LinkKind::probit: return "probit";
  }
  return "?";
}

inline double link_value(LinkKind k, double z) {
  switch (k) {
    case LinkKind::logistic:
      return 1.0 / (1.0 + std::exp(-z));
    case LinkKind::identity_clipped:
      return z < 0.0 ? 0.0 : (z > 1.0 ? 1.0 : z);
    case LinkKind::probit:
      return 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return 0.0;
}

// Derivative of the link. For identity-clipped it is 1 on [0,1] and 0
// outside; a zero derivative on the attained set means the link is not
// strictly increasing there and kappa computation rejects the model.
inline double link_deriv(LinkKind k, double z) {
  switch (k) {
    case LinkKind::logistic: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case LinkKind::identity_clipped:
      return (z >= 0.0 && z <= 1.0) ? 1.0 : 0.0;
    case LinkKind::probit:
      return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

}  // namespace cfb
