#pragma once

// Finite-action upper-counterfactual-confidence-bound agent: K forced
// initialization pulls, then at each round a least-squares estimate with a
// confidence radius beta drives a counterfactual action recursion — replay
// every past estimate at the current context, award each candidate action a
// bonus beta_i / (1 + times it was chosen earlier in the replay), and play
// the final choice. Includes the three beta schedules (finite class,
// parametric class, covering-number class) plus a constant override.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfb/core/action_space.hpp"
#include "cfb/core/function_class.hpp"
#include "cfb/core/trajectory.hpp"
#include "cfb/environment/episode.hpp"
#include "cfb/oracle/sse_table.hpp"

namespace cfb {

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("confidence level delta must lie in (0,1), got " +
                                std::to_string(delta));
}

// beta_t = sqrt(17 t ln(2 |F| t^3 / delta) / K)
inline double beta_finite(std::int64_t t, int k, std::int64_t cardinality,
                          double delta) {
  check_delta(delta);
  if (t < 1 || k < 1 || cardinality < 1)
    throw std::invalid_argument("beta_finite: t, K, |F| must be >= 1");
  const double td = static_cast<double>(t);
  const double lg =
      std::log(2.0 * static_cast<double>(cardinality) * td * td * td / delta);
  return std::sqrt(17.0 * td * lg / static_cast<double>(k));
}

// beta_t = sqrt(34 t / K) * sqrt(d ln(2 + Delta L t) + ln(2 t^3 / delta) + 1)
inline double beta_parametric(std::int64_t t, int k, int d, double diameter,
                              double lipschitz, double delta) {
  check_delta(delta);
  if (t < 1 || k < 1 || d < 1)
    throw std::invalid_argument("beta_parametric: t, K, d must be >= 1");
  if (!(diameter >= 0.0) || !(lipschitz >= 0.0))
    throw std::invalid_argument(
        "beta_parametric: diameter and Lipschitz constant must be >= 0");
  const double td = static_cast<double>(t);
  const double inner = static_cast<double>(d) *
                           std::log(2.0 + diameter * lipschitz * td) +
                       std::log(2.0 * td * td * td / delta) + 1.0;
  return std::sqrt(34.0 * td / static_cast<double>(k)) * std::sqrt(inner);
}

// Constant over rounds: beta = sqrt(T K) * B, where B is the user-supplied
// covering-number bracket value.
inline double beta_covering(std::int64_t horizon, int k, double /*delta*/,
                            double covering_bound) {
  if (horizon < 1 || k < 1)
    throw std::invalid_argument("beta_covering: T and K must be >= 1");
  if (!(covering_bound > 0.0))
    throw std::invalid_argument("beta_covering: bound must be > 0");
  return std::sqrt(static_cast<double>(horizon) * static_cast<double>(k)) *
         covering_bound;
}

struct BetaSchedule {
  enum class Kind { finite, parametric, covering, constant };

  Kind kind = Kind::finite;
  double delta = 0.05;
  std::int64_t cardinality = 1;   // finite
  int dim = 1;                    // parametric
  double diameter = 1.0;          // parametric
  double lipschitz = 1.0;         // parametric
  std::int64_t horizon = 1;       // covering
  double covering_bound = 1.0;    // covering
  double constant_value = 1.0;    // constant

  static BetaSchedule finite_class(std::int64_t cardinality, double delta) {
    BetaSchedule s;
    s.kind = Kind::finite;
    s.cardinality = cardinality;
    s.delta = delta;
    return s;
  }

  static BetaSchedule parametric_class(int dim, double diameter,
                                       double lipschitz, double delta) {
    BetaSchedule s;
    s.kind = Kind::parametric;
    s.dim = dim;
    s.diameter = diameter;
    s.lipschitz = lipschitz;
    s.delta = delta;
    return s;
  }

  static BetaSchedule covering_class(std::int64_t horizon,
                                     double covering_bound, double delta) {
    BetaSchedule s;
    s.kind = Kind::covering;
    s.horizon = horizon;
    s.covering_bound = covering_bound;
    s.delta = delta;
    return s;
  }

  static BetaSchedule constant(double value) {
    BetaSchedule s;
    s.kind = Kind::constant;
    s.constant_value = value;
    return s;
  }

  // `denominator` is the schedule's normalizer: the number of actions for
  // the finite-action agent, the average decision entropy for the
  // divergence-based agent.
  double value(std::int64_t t, double denominator) const {
    switch (kind) {
      case Kind::finite: {
        check_delta(delta);
        if (t < 1 || !(denominator >= 1.0))
          throw std::invalid_argument("beta schedule: t and normalizer must be >= 1");
        const double td = static_cast<double>(t);
        const double lg = std::log(2.0 * static_cast<double>(cardinality) *
                                   td * td * td / delta);
        return std::sqrt(17.0 * td * lg / denominator);
      }
      case Kind::parametric:
        return beta_parametric(t, static_cast<int>(denominator), dim, diameter,
                               lipschitz, delta);
      case Kind::covering:
        return std::sqrt(static_cast<double>(horizon) * denominator) *
               covering_bound;
      case Kind::constant:
        return constant_value;
    }
    return 0.0;
  }
};

// Replays the estimate sequence at one context: for each snapshot in round
// order, pick the admissible action maximizing estimate + beta/(count+1),
// where count is the number of earlier replay steps that picked that same
// action. Ties break to the smallest action index.
inline std::vector<int> counterfactual_trajectory(
    const FunctionClass& fclass, const ActionSpace& actions, int context,
    const std::vector<EstimatorSnapshot>& snapshots) {
  std::vector<int> trajectory;
  trajectory.reserve(snapshots.size());
  const std::vector<int> adm = actions.admissible(context);
  if (adm.empty())
    throw std::invalid_argument("counterfactual trajectory: empty action set");
  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(actions.total_count()), 0);
  for (const EstimatorSnapshot& snap : snapshots) {
    int best = adm[0];
    double best_v = -std::numeric_limits<double>::infinity();
    for (int a : adm) {
      const double v =
          fclass.evaluate(snap.fhat, context, a, actions) +
          snap.beta /
              static_cast<double>(counts[static_cast<std::size_t>(a)] + 1);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    trajectory.push_back(best);
    ++counts[static_cast<std::size_t>(best)];
  }
  return trajectory;
}

class UccbAgent : public Agent {
 public:
  UccbAgent(const Problem* problem, BetaSchedule schedule,
            bool memoize_trajectories = false)
      : problem_(problem),
        schedule_(schedule),
        oracle_(&problem->fclass, &problem->actions),
        k_(problem->actions.total_count()),
        memoize_(memoize_trajectories) {}

  int select_action(int context, RngStream&) override {
    if (t_ <= k_) return static_cast<int>(t_ - 1);
    if (!memoize_) {
      std::vector<EstimatorSnapshot> all = snapshots_;
      all.push_back(*current_);
      return counterfactual_trajectory(problem_->fclass, problem_->actions,
                                       context, all)
          .back();
    }
    Memo& memo = memo_[context];
    extend_memo(memo, context);
    // The round's own snapshot is not persisted yet, so its replay step must
    // not touch the cached counts — it will be replayed again once persisted.
    std::vector<std::int64_t> scratch = memo.counts;
    return replay_step(scratch, context, *current_);
  }

  void observe(int context, int action, double reward) override {
    oracle_.update(context, action, reward);
    if (t_ > k_) snapshots_.push_back(*current_);
    if (t_ >= k_)
      current_ = EstimatorSnapshot{
          oracle_.least_squares(),
          schedule_.value(t_ + 1, static_cast<double>(k_))};
    ++t_;
  }

  std::optional<EstimatorSnapshot> current_snapshot() const override {
    return t_ <= k_ ? std::nullopt : current_;
  }

  const std::vector<EstimatorSnapshot>& snapshots() const { return snapshots_; }
  std::int64_t round() const { return t_; }

 private:
  struct Memo {
    std::size_t consumed = 0;  // persisted snapshots already replayed
    std::vector<std::int64_t> counts;
  };

  // One replay step against mutable counts; returns the chosen action and
  // increments its count.
  int replay_step(std::vector<std::int64_t>& counts, int context,
                  const EstimatorSnapshot& snap) const {
    const std::vector<int> adm = problem_->actions.admissible(context);
    int best = adm[0];
    double best_v = -std::numeric_limits<double>::infinity();
    for (int a : adm) {
      const double v =
          problem_->fclass.evaluate(snap.fhat, context, a, problem_->actions) +
          snap.beta /
              static_cast<double>(counts[static_cast<std::size_t>(a)] + 1);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    ++counts[static_cast<std::size_t>(best)];
    return best;
  }

  // Valid because the replay at a context depends only on the snapshot
  // prefix: earlier steps never change when new snapshots arrive.
  void extend_memo(Memo& memo, int context) {
    if (memo.counts.empty())
      memo.counts.assign(static_cast<std::size_t>(problem_->actions.total_count()),
                         0);
    while (memo.consumed < snapshots_.size()) {
      replay_step(memo.counts, context, snapshots_[memo.consumed]);
      ++memo.consumed;
    }
  }

  const Problem* problem_;
  BetaSchedule schedule_;
  SseTable oracle_;
  std::int64_t k_;
  bool memoize_;
  std::int64_t t_ = 1;
  std::vector<EstimatorSnapshot> snapshots_;
  std::optional<EstimatorSnapshot> current_;
  std::unordered_map<int, Memo> memo_;
};

}  // namespace cfb
