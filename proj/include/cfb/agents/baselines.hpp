#pragma once

// Control agents, not part of the studied algorithm family: greedy plays the
// argmax of the current least-squares fit with no exploration bonus, and
// epsilon-greedy mixes in a uniform random action with fixed probability.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/core/trajectory.hpp"
#include "cfb/environment/episode.hpp"
#include "cfb/oracle/sse_table.hpp"

namespace cfb {

class GreedyAgent : public Agent {
 public:
  explicit GreedyAgent(const Problem* problem, double epsilon = 0.0)
      : problem_(problem),
        epsilon_(epsilon),
        oracle_(&problem->fclass, &problem->actions) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("epsilon must lie in [0,1], got " +
                                  std::to_string(epsilon));
  }

  int select_action(int context, RngStream& rng) override {
    const std::vector<int> adm = problem_->actions.admissible(context);
    if (epsilon_ > 0.0 && rng.next_uniform() < epsilon_) {
      const std::size_t pick = static_cast<std::size_t>(
          rng.next_uniform() * static_cast<double>(adm.size()));
      return adm[pick < adm.size() ? pick : adm.size() - 1];
    }
    return optimal_action(problem_->fclass, fhat_, context, problem_->actions);
  }

  void observe(int context, int action, double reward) override {
    oracle_.update(context, action, reward);
    fhat_ = oracle_.least_squares();
  }

  std::optional<EstimatorSnapshot> current_snapshot() const override {
    return EstimatorSnapshot{fhat_, 0.0};
  }

 private:
  const Problem* problem_;
  double epsilon_;
  SseTable oracle_;
  int fhat_ = 0;
};

}  // namespace cfb
