// Reward models (Bernoulli and mean-corrected truncated Gaussian) and the
// episode loop: seeding, comparator coupling, admissibility enforcement.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfb/environment/episode.hpp"
#include "cfb/environment/reward_model.hpp"
#include "oracles.hpp"

using namespace cfb;

TEST_CASE("normal quantile and cdf agree at reference points", "[environment]") {
  REQUIRE(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-9));
  REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5));
  for (double p : {0.01, 0.2, 0.5, 0.77, 0.999})
    REQUIRE(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-9));
  REQUIRE_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("truncated mean matches the analytic value", "[environment]") {
  const RewardModel m = RewardModel::truncated_gaussian(0.2);
  // mu + sigma (phi(alpha) - phi(beta)) / (Phi(beta) - Phi(alpha)) at mu=0.3
  REQUIRE(m.truncated_mean(0.3) == Catch::Approx(0.32757779316963054).epsilon(1e-12));
  REQUIRE(m.truncated_mean(0.5) == Catch::Approx(0.5));  // symmetry
}

TEST_CASE("location solving hits the target mean within 1e-9", "[environment]") {
  const RewardModel m = RewardModel::truncated_gaussian(0.2);
  for (double target : {0.05, 0.3, 0.5, 0.7, 0.97}) {
    const double loc = m.location_for(target);
    REQUIRE(std::fabs(m.truncated_mean(loc) - target) <= 1e-9);
  }
  REQUIRE(m.location_for(0.5) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("unattainable truncated-gaussian targets are rejected", "[environment]") {
  const RewardModel m = RewardModel::truncated_gaussian(0.2);
  REQUIRE_THROWS_AS(m.location_for(1e-4), std::invalid_argument);
  REQUIRE_THROWS_AS(m.location_for(1.0 - 1e-4), std::invalid_argument);
}

TEST_CASE("sigma outside (0, 0.25] is rejected", "[environment]") {
  REQUIRE_THROWS_AS(RewardModel::truncated_gaussian(0.3), std::invalid_argument);
  REQUIRE_THROWS_AS(RewardModel::truncated_gaussian(0.0), std::invalid_argument);
}

TEST_CASE("bernoulli sampling is 0/1 with the right frequency", "[environment]") {
  const RewardModel m = RewardModel::bernoulli();
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    RngStream rng(3, static_cast<std::uint64_t>(i), purpose::reward_arm(0));
    const double r = m.sample(0.3, rng);
    REQUIRE((r == 0.0 || r == 1.0));
    sum += r;
  }
  REQUIRE(sum / n == Catch::Approx(0.3).margin(0.02));
}

TEST_CASE("truncated-gaussian samples stay in [0,1] and match the mean",
          "[environment]") {
  const RewardModel m = RewardModel::truncated_gaussian(0.1);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    RngStream rng(4, static_cast<std::uint64_t>(i), purpose::reward_arm(1));
    const double r = m.sample(0.7, rng);
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 1.0);
    sum += r;
  }
  REQUIRE(sum / n == Catch::Approx(0.7).margin(0.01));
}

TEST_CASE("reward draws are a pure function of the stream key", "[environment]") {
  const RewardModel m = RewardModel::truncated_gaussian(0.15);
  RngStream a(11, 22, purpose::reward_arm(2));
  RngStream b(11, 22, purpose::reward_arm(2));
  REQUIRE(m.sample(0.4, a) == m.sample(0.4, b));
}

namespace {

// Plays a fixed action regardless of context; no estimator snapshot.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(int action) : action_(action) {}
  int select_action(int, RngStream&) override { return action_; }
  void observe(int, int, double) override {}

 private:
  int action_;
};

// Always plays the ground-truth optimal action for the observed context.
class OmniscientAgent : public Agent {
 public:
  explicit OmniscientAgent(const Problem* p) : p_(p) {}
  int select_action(int context, RngStream&) override {
    return p_->best_action(context);
  }
  void observe(int, int, double) override {}

 private:
  const Problem* p_;
};

}  // namespace

TEST_CASE("episode pseudo-regret increments equal the true gaps", "[environment]") {
  Problem p = test::tabular_problem();
  p.validate();
  ScriptedAgent agent(0);  // optimal at context 0 (gap 0), gap 0.6 at context 1
  EpisodeConfig ec;
  ec.horizon = 400;
  ec.master_seed = 17;
  const EpisodeResult res = run_episode(ec, agent, p);
  double expected = 0.0;
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    expected += res.records[i].context == 1 ? 0.6 : 0.0;
    REQUIRE(res.regret[i].cum_pseudo == Catch::Approx(expected).margin(1e-12));
    REQUIRE(res.records[i].t == static_cast<std::int64_t>(i + 1));
    REQUIRE_FALSE(res.records[i].snapshot.has_value());
  }
}

TEST_CASE("playing the comparator arm gives exactly zero pathwise regret",
          "[environment]") {
  Problem p = test::tabular_problem();
  p.validate();
  OmniscientAgent agent(&p);
  EpisodeConfig ec;
  ec.horizon = 500;
  ec.master_seed = 23;
  const EpisodeResult res = run_episode(ec, agent, p);
  REQUIRE(res.regret.back().cum_pathwise == 0.0);
  REQUIRE(res.regret.back().cum_pseudo == 0.0);
}

TEST_CASE("identical seeds give identical episodes", "[environment]") {
  Problem p = test::tabular_problem();
  p.validate();
  EpisodeConfig ec;
  ec.horizon = 100;
  ec.master_seed = 99;
  ScriptedAgent a1(1), a2(1);
  const EpisodeResult r1 = run_episode(ec, a1, p);
  const EpisodeResult r2 = run_episode(ec, a2, p);
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    REQUIRE(r1.records[i].context == r2.records[i].context);
    REQUIRE(r1.records[i].reward == r2.records[i].reward);
  }
}

TEST_CASE("inadmissible selections abort the episode", "[environment]") {
  Problem p = test::tabular_problem();
  p.validate();
  ScriptedAgent agent(7);
  EpisodeConfig ec;
  ec.horizon = 10;
  ec.master_seed = 1;
  REQUIRE_THROWS_AS(run_episode(ec, agent, p), std::runtime_error);
}

TEST_CASE("context draws follow the configured distribution", "[environment]") {
  Problem p = test::tabular_problem();
  p.validate();
  ScriptedAgent agent(0);
  EpisodeConfig ec;
  ec.horizon = 20000;
  ec.master_seed = 5;
  const EpisodeResult res = run_episode(ec, agent, p);
  int c1 = 0;
  for (const Record& r : res.records) c1 += r.context;
  REQUIRE(static_cast<double>(c1) / static_cast<double>(ec.horizon) ==
          Catch::Approx(0.4).margin(0.02));
}
