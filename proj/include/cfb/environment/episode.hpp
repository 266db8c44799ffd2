#pragma once

// The interaction loop: i.i.d. context draws, agent action choice, reward
// draw with prescribed conditional mean, and regret accounting against the
// per-round optimal action. All randomness flows through counter-based
// substreams keyed by (master seed, round, purpose), so the comparator
// reward at the optimal arm is well defined whether or not that arm was
// played, and playing it yields a pathwise increment of exactly zero.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/core/action_space.hpp"
#include "cfb/core/context_space.hpp"
#include "cfb/core/function_class.hpp"
#include "cfb/core/trajectory.hpp"
#include "cfb/environment/reward_model.hpp"
#include "cfb/rng.hpp"

namespace cfb {

struct Problem {
  ContextSpace contexts;
  ActionSpace actions;
  FunctionClass fclass;
  GroundTruth truth;
  RewardModel rewards;

  double mean_reward(int member, int context, int action) const {
    return fclass.evaluate(member, context, action, actions);
  }

  double true_mean(int context, int action) const {
    return mean_reward(truth.f_star_index, context, action);
  }

  int best_action(int context) const {
    return optimal_action(fclass, truth.f_star_index, context, actions);
  }

  void validate() {
    contexts.validate();
    fclass.validate(contexts, actions);
    truth.validate(fclass);
    std::vector<double> means;
    for (int x = 0; x < contexts.size(); ++x)
      for (int a : actions.admissible(x)) means.push_back(true_mean(x, a));
    rewards.prepare(means);
  }
};

struct EpisodeConfig {
  std::int64_t horizon = 1;
  std::uint64_t master_seed = 0;
  std::string agent_id;
  bool record_diagnostics = false;

  void validate() const {
    if (horizon < 1)
      throw std::invalid_argument("episode horizon must be >= 1");
  }
};

// Anything that can play: selection may draw from the supplied per-round
// stream; observe() feeds back the realized reward. current_snapshot()
// reports the regression estimate in force for the round just selected
// (absent during forced-exploration rounds before any estimate exists).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual int select_action(int context, RngStream& rng) = 0;
  virtual void observe(int context, int action, double reward) = 0;
  virtual std::optional<EstimatorSnapshot> current_snapshot() const {
    return std::nullopt;
  }
};

inline int sample_context(const ContextSpace& contexts, RngStream& rng) {
  return categorical(rng, contexts.probabilities);
}

inline double sample_reward(const RewardModel& model, double mean,
                            RngStream& rng) {
  return model.sample(mean, rng);
}

struct EpisodeResult {
  std::vector<Record> records;
  std::vector<RegretRecord> regret;
};

// Executes `horizon` rounds. The optional sink is invoked once per round
// after the agent has been updated (used for streaming trace output).
inline EpisodeResult run_episode(
    const EpisodeConfig& config, Agent& agent, const Problem& problem,
    const std::function<void(const Record&)>& sink = nullptr) {
  config.validate();
  EpisodeResult out;
  out.records.reserve(static_cast<std::size_t>(config.horizon));
  std::vector<double> path_inc, pseudo_inc;
  path_inc.reserve(out.records.capacity());
  pseudo_inc.reserve(out.records.capacity());

  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    RngStream ctx_rng(config.master_seed, static_cast<std::uint64_t>(t),
                      purpose::context);
    const int x = sample_context(problem.contexts, ctx_rng);

    RngStream agent_rng(config.master_seed, static_cast<std::uint64_t>(t),
                        purpose::agent);
    const int a = agent.select_action(x, agent_rng);
    if (!problem.actions.is_admissible(x, a))
      throw std::runtime_error(
          "run aborted at round " + std::to_string(t) + ": agent '" +
          config.agent_id + "' returned action " + std::to_string(a) +
          ", inadmissible for context " + std::to_string(x));

    RngStream reward_rng(config.master_seed, static_cast<std::uint64_t>(t),
                         purpose::reward_arm(static_cast<std::uint64_t>(a)));
    const double r =
        sample_reward(problem.rewards, problem.true_mean(x, a), reward_rng);

    const int a_star = problem.best_action(x);
    double r_star = r;
    if (a_star != a) {
      RngStream star_rng(
          config.master_seed, static_cast<std::uint64_t>(t),
          purpose::reward_arm(static_cast<std::uint64_t>(a_star)));
      r_star = sample_reward(problem.rewards, problem.true_mean(x, a_star),
                             star_rng);
    }
    path_inc.push_back(r_star - r);
    pseudo_inc.push_back(problem.true_mean(x, a_star) - problem.true_mean(x, a));

    Record rec;
    rec.t = t;
    rec.context = x;
    rec.action = a;
    rec.reward = r;
    rec.snapshot = agent.current_snapshot();
    out.records.push_back(rec);

    agent.observe(x, a, r);
    if (sink) sink(out.records.back());
  }
  out.regret = accumulate_regret(path_inc, pseudo_inc);
  return out;
}

}  // namespace cfb
