#pragma once

// Counterfactual action divergences V_x(a || history): how much the logged
// history at a context pins down the reward of a query action. Four kernels:
//   finite   1 / (times a was played); 0 plays -> +inf
//   linear   a' G^{-1} a over the Gram of played vectors; singular -> +inf
//   glm      kappa^2 * linear kernel on feature vectors phi(x, a)
//   hetero   kappa^2 * linear kernel on coefficients of a in a per-context
//            basis spanning the admissible set
// plus the tight curvature constant kappa for a link function over a grid,
// and the exhaustive action-maximization oracle used for optimistic choice.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/core/link.hpp"
#include "cfb/geometry/spanner.hpp"
#include "cfb/linalg.hpp"

namespace cfb {

enum class DivergenceKind { finite, linear, glm, hetero };

inline DivergenceKind divergence_from_name(const std::string& name) {
  if (name == "finite") return DivergenceKind::finite;
  if (name == "linear") return DivergenceKind::linear;
  if (name == "glm") return DivergenceKind::glm;
  if (name == "hetero") return DivergenceKind::hetero;
  throw std::invalid_argument("unknown divergence kind '" + name + "'");
}

inline const char* divergence_name(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::finite: return "finite";
    case DivergenceKind::linear: return "linear";
    case DivergenceKind::glm: return "glm";
    case DivergenceKind::hetero: return "hetero";
  }
  return "?";
}

// Running Gram matrix G = sum_i v_i v_i' for one context.
class GramAccumulator {
 public:
  GramAccumulator() = default;
  explicit GramAccumulator(int dim)
      : dim_(dim), g_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  void add(const std::vector<double>& v, double weight = 1.0) {
    if (static_cast<int>(v.size()) != dim_)
      throw std::invalid_argument("gram accumulator: dimension mismatch");
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        g_[static_cast<std::size_t>(i) * dim_ + j] += weight * v[i] * v[j];
  }

  int dim() const { return dim_; }
  const std::vector<double>& matrix() const { return g_; }

 private:
  int dim_ = 0;
  std::vector<double> g_;
};

inline double divergence_finite(std::int64_t count) {
  if (count < 0)
    throw std::invalid_argument("finite divergence: negative count");
  if (count == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / static_cast<double>(count);
}

inline double divergence_finite(int action, const std::vector<std::int64_t>& counts) {
  return divergence_finite(counts.at(static_cast<std::size_t>(action)));
}

inline double divergence_linear(const std::vector<double>& a,
                                const GramAccumulator& gram) {
  return quad_form_inverse(gram.matrix(), gram.dim(), a);
}

inline double divergence_glm(const std::vector<double>& phi,
                             const GramAccumulator& phi_gram, double kappa) {
  if (!(kappa >= 1.0))
    throw std::invalid_argument("glm divergence: kappa must be >= 1, got " +
                                std::to_string(kappa));
  return kappa * kappa * divergence_linear(phi, phi_gram);
}

inline double divergence_hetero(const std::vector<double>& a,
                                const GramAccumulator& coeff_gram,
                                double kappa,
                                const std::vector<std::vector<double>>& basis) {
  if (!(kappa >= 1.0))
    throw std::invalid_argument("hetero divergence: kappa must be >= 1, got " +
                                std::to_string(kappa));
  const std::vector<double> b = coefficients_in_basis(a, basis);
  return kappa * kappa * divergence_linear(b, coeff_gram);
}

// Tightest curvature ratio max sigma' / min sigma' over the dot products a
// weight vector attains on a feature grid. Rejects links that are not
// strictly increasing on the attained set.
inline double kappa(LinkKind link, const std::vector<double>& g_star,
                    const std::vector<std::vector<double>>& features) {
  if (features.empty())
    throw std::invalid_argument("kappa: empty feature grid");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const std::vector<double>& phi : features) {
    if (phi.size() != g_star.size())
      throw std::invalid_argument("kappa: weight/feature dimension mismatch");
    double z = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) z += g_star[i] * phi[i];
    const double d = link_deriv(link, z);
    if (!(d > 0.0))
      throw std::invalid_argument(
          "kappa: link derivative is " + std::to_string(d) + " at z = " +
          std::to_string(z) + "; link not strictly increasing there");
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi / lo;
}

// Smallest index attaining the maximum; +inf dominates every finite value.
inline int action_maximize(const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("action_maximize: empty value list");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

}  // namespace cfb
