#pragma once

// Divergence-based upper-counterfactual-confidence-bound agent for large or
// structured action sets. Per context, the first d_x counterfactual slots
// play a barycentric spanner of the (possibly feature-mapped) admissible
// set; later slots replay stored estimates with an exploration bonus
// beta_i * V_x(a || earlier slots), where V is one of the four divergence
// kernels. Also: the beta schedule normalized by average decision entropy,
// and the decision-entropy computation itself. The geometry construction and
// slot recursion are free functions so trace audits replay the exact code
// path the agent runs.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfb/agents/uccb.hpp"
#include "cfb/core/action_space.hpp"
#include "cfb/core/context_space.hpp"
#include "cfb/core/function_class.hpp"
#include "cfb/core/trajectory.hpp"
#include "cfb/environment/episode.hpp"
#include "cfb/geometry/divergence.hpp"
#include "cfb/geometry/spanner.hpp"
#include "cfb/oracle/sse_table.hpp"

namespace cfb {

// beta_t = sqrt(17 t ln(2 |F| t^3 / delta) / E)
inline double beta_infinite(std::int64_t t, double entropy,
                            std::int64_t cardinality, double delta) {
  check_delta(delta);
  if (t < 1 || cardinality < 1 || !(entropy > 0.0))
    throw std::invalid_argument("beta_infinite: need t >= 1, |F| >= 1, E > 0");
  const double td = static_cast<double>(t);
  const double lg =
      std::log(2.0 * static_cast<double>(cardinality) * td * td * td / delta);
  return std::sqrt(17.0 * td * lg / entropy);
}

// Average decision entropy E = E_x[kappa_x^2 * dim_x] with kappa == 1 for the
// count and raw-vector kernels. dim_x is |A(x)| for the count kernel, the
// action-span rank for raw vectors and coefficients, and the feature-grid
// rank for the feature kernel.
inline double decision_entropy(DivergenceKind kind,
                               const ContextSpace& contexts,
                               const std::vector<double>& kappas,
                               const std::vector<int>& dims) {
  if (static_cast<int>(dims.size()) != contexts.size())
    throw std::invalid_argument("decision_entropy: one dim per context required");
  const bool curved =
      kind == DivergenceKind::glm || kind == DivergenceKind::hetero;
  if (curved && static_cast<int>(kappas.size()) != contexts.size())
    throw std::invalid_argument(
        "decision_entropy: one kappa per context required");
  double e = 0.0;
  for (int x = 0; x < contexts.size(); ++x) {
    const double k2 = curved ? kappas[static_cast<std::size_t>(x)] *
                                   kappas[static_cast<std::size_t>(x)]
                             : 1.0;
    e += contexts.probabilities[static_cast<std::size_t>(x)] * k2 *
         static_cast<double>(dims[static_cast<std::size_t>(x)]);
  }
  return e;
}

// Per-context initialization data for the slot recursion.
struct ContextGeometry {
  std::vector<int> adm;           // admissible action ids, ascending
  std::vector<int> pos;           // action id -> position in adm (-1 = n/a)
  std::vector<int> init_actions;  // the d_x initialization slots, in order
  int dim = 0;                    // d_x
  double kappa = 1.0;
  int gram_dim = 0;
  // per adm position: the vector entering the Gram (raw action, feature
  // vector, or spanner-basis coefficients; empty for the count kernel)
  std::vector<std::vector<double>> gram_vectors;
  std::vector<std::vector<double>> basis;  // spanner vectors (coeff kernel)
};

inline ContextGeometry build_context_geometry(const Problem& problem,
                                              DivergenceKind kind,
                                              double kappa_x, int context) {
  ContextGeometry geo;
  geo.adm = problem.actions.admissible(context);
  if (geo.adm.empty())
    throw std::invalid_argument("divergence agent: empty admissible set at context " +
                                std::to_string(context));
  geo.pos.assign(static_cast<std::size_t>(problem.actions.total_count()), -1);
  for (int j = 0; j < static_cast<int>(geo.adm.size()); ++j)
    geo.pos[static_cast<std::size_t>(geo.adm[static_cast<std::size_t>(j)])] = j;
  geo.kappa = kappa_x;

  if (kind == DivergenceKind::finite) {
    geo.init_actions = geo.adm;
    geo.dim = static_cast<int>(geo.adm.size());
    return geo;
  }

  std::vector<std::vector<double>> raw;
  raw.reserve(geo.adm.size());
  for (int a : geo.adm) {
    if (kind == DivergenceKind::glm)
      raw.push_back(problem.fclass.feature(problem.actions, context, a));
    else
      raw.push_back(problem.actions.vector(a));
  }
  const Spanner sp = barycentric_spanner(raw);
  for (int i : sp.indices)
    geo.init_actions.push_back(geo.adm[static_cast<std::size_t>(i)]);
  geo.dim = sp.dim;

  if (kind == DivergenceKind::hetero) {
    geo.basis = sp.vectors;
    geo.gram_dim = sp.dim;
    for (const std::vector<double>& v : raw)
      geo.gram_vectors.push_back(coefficients_in_basis(v, geo.basis));
  } else {
    geo.gram_dim = static_cast<int>(raw[0].size());
    geo.gram_vectors = raw;
  }
  return geo;
}

// Divergence of a query action against the slot actions accumulated so far.
struct DivergenceHistory {
  DivergenceKind kind = DivergenceKind::finite;
  std::vector<std::int64_t> counts;
  GramAccumulator gram;

  void add(const ContextGeometry& geo, int action) {
    if (kind == DivergenceKind::finite) {
      ++counts[static_cast<std::size_t>(action)];
      return;
    }
    gram.add(geo.gram_vectors[static_cast<std::size_t>(
        geo.pos[static_cast<std::size_t>(action)])]);
  }

  double value(const ContextGeometry& geo, int action) const {
    if (kind == DivergenceKind::finite)
      return divergence_finite(counts[static_cast<std::size_t>(action)]);
    const std::vector<double>& v = geo.gram_vectors[static_cast<std::size_t>(
        geo.pos[static_cast<std::size_t>(action)])];
    const double base = divergence_linear(v, gram);
    const double k2 = geo.kappa * geo.kappa;
    return kind == DivergenceKind::linear ? base : k2 * base;
  }
};

inline DivergenceHistory fresh_divergence_history(const Problem& problem,
                                                  DivergenceKind kind,
                                                  const ContextGeometry& geo) {
  DivergenceHistory h;
  h.kind = kind;
  if (kind == DivergenceKind::finite)
    h.counts.assign(static_cast<std::size_t>(problem.actions.total_count()), 0);
  else
    h.gram = GramAccumulator(geo.gram_dim);
  return h;
}

// One argmax slot: estimate plus beta * divergence over the admissible set;
// +inf dominates, ties break to the smallest action id.
inline int ia_optimistic_argmax(const Problem& problem,
                                const ContextGeometry& geo,
                                const DivergenceHistory& hist, int context,
                                const EstimatorSnapshot& snap) {
  std::vector<double> values;
  values.reserve(geo.adm.size());
  for (int a : geo.adm)
    values.push_back(
        problem.fclass.evaluate(snap.fhat, context, a, problem.actions) +
        snap.beta * hist.value(geo, a));
  return geo.adm[static_cast<std::size_t>(action_maximize(values))];
}

// The full slot sequence at one context for rounds 1..t: spanner slots, then
// argmax slots replaying snapshot i at slot i.
inline std::vector<int> ia_slot_sequence(
    const Problem& problem, DivergenceKind kind, const ContextGeometry& geo,
    int context, const std::vector<EstimatorSnapshot>& snapshots,
    std::int64_t t) {
  std::vector<int> slots;
  slots.reserve(static_cast<std::size_t>(t));
  DivergenceHistory hist = fresh_divergence_history(problem, kind, geo);
  for (std::int64_t i = 1; i <= t; ++i) {
    int a;
    if (i <= geo.dim) {
      a = geo.init_actions[static_cast<std::size_t>(i - 1)];
    } else {
      a = ia_optimistic_argmax(problem, geo, hist, context,
                               snapshots.at(static_cast<std::size_t>(i - 1)));
    }
    slots.push_back(a);
    hist.add(geo, a);
  }
  return slots;
}

class UccbIaAgent : public Agent {
 public:
  UccbIaAgent(const Problem* problem, DivergenceKind kind,
              std::vector<double> kappas, double entropy,
              BetaSchedule schedule)
      : problem_(problem),
        kind_(kind),
        kappas_(std::move(kappas)),
        entropy_(entropy),
        schedule_(schedule),
        oracle_(&problem->fclass, &problem->actions) {
    if (!(entropy_ > 0.0))
      throw std::invalid_argument("uccb-ia: decision entropy must be > 0");
    current_ = EstimatorSnapshot{0, schedule_.value(1, entropy_)};
  }

  int select_action(int context, RngStream&) override {
    const ContextGeometry& geo = geometry_for(context);
    if (t_ <= geo.dim)
      return geo.init_actions[static_cast<std::size_t>(t_ - 1)];

    DivergenceHistory hist = fresh_divergence_history(*problem_, kind_, geo);
    for (int a : geo.init_actions) hist.add(geo, a);
    int chosen = geo.adm[0];
    for (std::int64_t i = geo.dim + 1; i <= t_; ++i) {
      const EstimatorSnapshot& snap =
          i <= static_cast<std::int64_t>(snapshots_.size())
              ? snapshots_[static_cast<std::size_t>(i - 1)]
              : *current_;
      chosen = ia_optimistic_argmax(*problem_, geo, hist, context, snap);
      if (i < t_) hist.add(geo, chosen);
    }
    return chosen;
  }

  void observe(int context, int action, double reward) override {
    oracle_.update(context, action, reward);
    snapshots_.push_back(*current_);
    current_ = EstimatorSnapshot{oracle_.least_squares(),
                                 schedule_.value(t_ + 1, entropy_)};
    ++t_;
  }

  std::optional<EstimatorSnapshot> current_snapshot() const override {
    return current_;
  }

  const ContextGeometry& geometry_for(int context) {
    auto it = geo_.find(context);
    if (it != geo_.end()) return it->second;
    const double kx = kappas_.empty()
                          ? 1.0
                          : kappas_.at(static_cast<std::size_t>(context));
    return geo_.emplace(context, build_context_geometry(*problem_, kind_, kx,
                                                        context))
        .first->second;
  }

  const std::vector<EstimatorSnapshot>& snapshots() const { return snapshots_; }
  double entropy() const { return entropy_; }
  DivergenceKind kind() const { return kind_; }
  std::int64_t round() const { return t_; }

 private:
  const Problem* problem_;
  DivergenceKind kind_;
  std::vector<double> kappas_;
  double entropy_;
  BetaSchedule schedule_;
  SseTable oracle_;
  std::int64_t t_ = 1;
  std::vector<EstimatorSnapshot> snapshots_;
  std::optional<EstimatorSnapshot> current_;
  std::unordered_map<int, ContextGeometry> geo_;
};

}  // namespace cfb
