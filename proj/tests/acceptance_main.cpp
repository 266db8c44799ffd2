// Acceptance gate: ten empirical criteria covering the finite-action agent's
// regret guarantee and visitation audit, replay determinism, the divergence
// kernels' defining dominance property, the gram-potential budget, the
// infinite-action and epoch agents' regret guarantees, and the allocation
// subroutine's halting/verification behavior. Prints exactly one
// "PASS criterion N: ..." / "FAIL criterion N: ..." line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cfb/agents/baselines.hpp"
#include "cfb/geometry/divergence.hpp"
#include "cfb/geometry/spanner.hpp"
#include "cfb/harness/runner.hpp"
#include "cfb/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace cfb;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 1) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Gate {
  bool all_pass = true;

  void line(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": "
              << detail << std::endl;
    if (!pass) all_pass = false;
  }
};

// 5 contexts (uniform), 3 arms, 10 random tabular members on [0,1]; the
// environment draws rewards from member 0, so the class realizes the truth.
Problem random_tabular_problem(std::uint64_t gen_seed) {
  RngStream rng(gen_seed, 0, 5);
  const int contexts = 5, arms = 3, members = 10;
  std::vector<std::vector<std::vector<double>>> values(
      members, std::vector<std::vector<double>>(contexts,
                                                std::vector<double>(arms)));
  for (auto& member : values)
    for (auto& row : member)
      for (double& v : row) v = rng.next_uniform();
  std::vector<std::string> names;
  for (int x = 0; x < contexts; ++x) names.push_back("x" + std::to_string(x));
  Problem p;
  p.contexts = ContextSpace(std::move(names),
                            std::vector<double>(contexts, 1.0 / contexts));
  p.actions = ActionSpace::finite(arms);
  p.fclass = FunctionClass::tabular(std::move(values));
  p.truth.f_star_index = 0;
  p.rewards = RewardModel::bernoulli();
  p.validate();
  return p;
}

// 2 contexts, a 12-action planar grid containing the coordinate spanner
// {(1,0),(0,1)}, 16 random linear members with values inside [0,1].
Problem random_linear_problem(std::uint64_t gen_seed) {
  RngStream rng(gen_seed, 0, 6);
  Problem p;
  p.contexts = ContextSpace({"x0", "x1"}, {0.5, 0.5});
  p.actions = ActionSpace::grid(
      {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.9, 0.1}, {0.1, 0.9},
       {0.75, 0.25}, {0.25, 0.75}, {0.6, 0.2}, {0.2, 0.6}, {0.4, 0.4},
       {0.3, 0.1}, {0.1, 0.3}});
  std::vector<std::vector<std::vector<double>>> g(
      16, std::vector<std::vector<double>>(2));
  for (auto& member : g)
    for (auto& w : member) w = {rng.next_uniform(), rng.next_uniform()};
  p.fclass = FunctionClass::linear(std::move(g));
  p.truth.f_star_index = 0;
  p.rewards = RewardModel::bernoulli();
  p.validate();
  return p;
}

json run_config(const std::string& kind, const Problem& p, std::int64_t horizon,
                std::uint64_t seed, int replications) {
  json j;
  j["agent"] = {{"kind", kind}};
  j["delta"] = 0.05;
  j["horizon"] = horizon;
  j["seed"] = seed;
  j["replications"] = replications;
  j["problem"] = json::parse(problem_to_json(p).dump());
  return j;
}

int audit_passes(const RunSummary& s, const std::string& check) {
  int n = 0;
  for (const RunOutcome& r : s.runs)
    for (const AuditOutcome& o : r.audit.outcomes)
      if (o.check == check && o.applicable && o.pass) ++n;
  return n;
}

// Exact range of the logistic derivative over an interval hull [lo, hi]: the
// derivative is unimodal with its peak at 0, so the extrema sit at the clamp
// of 0 and at the endpoints.
double hull_kappa_logistic(double lo, double hi) {
  const double peak = link_deriv(LinkKind::logistic, std::clamp(0.0, lo, hi));
  const double tail = std::min(link_deriv(LinkKind::logistic, lo),
                               link_deriv(LinkKind::logistic, hi));
  return peak / tail;
}

double dot(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

// Quarter-step coordinate in [-1, 1]; keeps gram determinants either exactly
// zero or bounded away from zero at the check tolerance.
double coarse(RngStream& rng) {
  return -1.0 + 0.25 * test::uniform_int(rng, 0, 8);
}

struct PairCheck {
  long checked = 0;
  long violations = 0;

  // rhs <= V * sum up to tolerance; infinite V is vacuously satisfied.
  void check(double v, double sum, double rhs) {
    ++checked;
    if (std::isinf(v)) return;
    if (rhs - v * sum > 1e-9) ++violations;
  }
};

}  // namespace

int main(int argc, char** argv) try {
  const fs::path base = argc > 1 ? fs::path(argv[1])
                                 : fs::temp_directory_path() / "cfb-acceptance";
  fs::create_directories(base);
  Gate gate;

  // ---- shared finite-action block (criteria 1-4) ---------------------------
  const Problem tabular = random_tabular_problem(20240815);
  json c1json = run_config("uccb", tabular, 3000, 1000, 40);
  c1json["agent"]["memoize"] = true;
  const ExperimentConfig c1cfg = config_from_json(c1json);

  const auto c1_start = Clock::now();
  const RunSummary uccb = run(c1cfg, base / "uccb");
  const double c1_elapsed = seconds_since(c1_start);

  // Criterion 1: pathwise regret at the horizon under the finite-class
  // guarantee in at least 95% of seeds, within the wall-clock budget.
  {
    const bool ok =
        uccb.within_bound >= 38 && c1_elapsed < 300.0;
    gate.line(1, ok,
              "pathwise regret at T=3000 under " +
                  fmt(uccb.bound_at_horizon) + " in " +
                  std::to_string(uccb.within_bound) +
                  "/40 runs (need 38); elapsed " + fmt(c1_elapsed) +
                  "s (cap 300s)");
  }

  // Criterion 2: sqrt-normalized mean pseudo-regret grows by less than 1.5x
  // from T=750 to T=3000, while the greedy baseline on a deceptive instance
  // pays linear pseudo-regret.
  {
    double m750 = 0.0, m3000 = 0.0;
    bool rows_ok = true;
    for (const RunOutcome& r : uccb.runs) {
      const RegretRecord& a = r.regret.at(749);
      const RegretRecord& b = r.regret.at(2999);
      rows_ok = rows_ok && a.t == 750 && b.t == 3000;
      m750 += a.cum_pseudo;
      m3000 += b.cum_pseudo;
    }
    m750 /= 40.0;
    m3000 /= 40.0;
    const double n750 = m750 / std::sqrt(750.0);
    const double n3000 = m3000 / std::sqrt(3000.0);

    const Problem deceptive = test::deceptive_problem();
    int exceeded = 0;
    for (int s = 0; s < 40; ++s) {
      GreedyAgent agent(&deceptive, 0.0);
      EpisodeConfig ec;
      ec.horizon = 3000;
      ec.master_seed = 5000 + static_cast<std::uint64_t>(s);
      ec.agent_id = "greedy";
      const EpisodeResult res = run_episode(ec, agent, deceptive);
      if (res.regret.back().cum_pseudo > 0.05 * 3000.0) ++exceeded;
    }
    const bool ok = rows_ok && n3000 < 1.5 * n750 && exceeded >= 20;
    gate.line(2, ok,
              "normalized pseudo-regret " + fmt(n3000, 3) + " at T=3000 vs " +
                  fmt(n750, 3) + " at T=750 (ratio " + fmt(n3000 / n750, 3) +
                  ", need < 1.5); greedy pseudo-regret exceeded 150 in " +
                  std::to_string(exceeded) + "/40 runs (need 20)");
  }

  // Criterion 3: the visitation-potential audit holds on every logged run.
  {
    const int passes = audit_passes(uccb, "lemma2");
    double worst = -std::numeric_limits<double>::infinity();
    for (const RunOutcome& r : uccb.runs)
      for (const AuditOutcome& o : r.audit.outcomes)
        if (o.check == "lemma2") worst = std::max(worst, o.worst);
    gate.line(3, passes == 40,
              "visitation-potential audit passed in " +
                  std::to_string(passes) + "/40 runs (worst margin " +
                  fmt(worst, 4) + " <= 0)");
  }

  // Criterion 4: replay reproduces every logged action after initialization
  // and counterfactual prefixes agree on repeated contexts, on every run.
  {
    const int passes = audit_passes(uccb, "replay");
    gate.line(4, passes == 40,
              "replay reproduced all logged actions with stable "
              "counterfactual prefixes in " +
                  std::to_string(passes) + "/40 runs");
  }

  // Criterion 5: kernel dominance. For each kernel, 500 random instances
  // (dimension <= 3, class size <= 20, history length <= 10): for every
  // ordered member pair, (f-g)^2 at the query is at most V times the
  // history sum of (f-g)^2, with infinite V vacuous.
  {
    RngStream rng(20260815, 0, 11);
    PairCheck finite_k, linear_k, glm_k, hetero_k;

    for (int trial = 0; trial < 500; ++trial) {
      const int k = test::uniform_int(rng, 2, 6);
      const int n = test::uniform_int(rng, 2, 20);
      std::vector<std::vector<double>> values(
          static_cast<std::size_t>(n), std::vector<double>(k));
      for (auto& row : values)
        for (double& v : row) v = rng.next_uniform();
      const int len = test::uniform_int(rng, 1, 10);
      std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
      std::vector<int> hist;
      for (int j = 0; j < len; ++j) {
        const int a = test::uniform_int(rng, 0, k - 1);
        hist.push_back(a);
        ++counts[static_cast<std::size_t>(a)];
      }
      const int q = test::uniform_int(rng, 0, k - 1);
      const double v = divergence_finite(q, counts);
      for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g) {
          if (f == g) continue;
          double sum = 0.0;
          for (int a : hist) {
            const double dgap = values[f][a] - values[g][a];
            sum += dgap * dgap;
          }
          const double gap = values[f][q] - values[g][q];
          finite_k.check(v, sum, gap * gap);
        }
    }

    for (int trial = 0; trial < 500; ++trial) {
      const int d = test::uniform_int(rng, 1, 3);
      const int m = test::uniform_int(rng, d, 8);
      std::vector<std::vector<double>> grid(static_cast<std::size_t>(m),
                                            std::vector<double>(d));
      for (auto& row : grid)
        for (double& c : row) c = coarse(rng);
      const int n = test::uniform_int(rng, 2, 20);
      std::vector<std::vector<double>> weights(static_cast<std::size_t>(n),
                                               std::vector<double>(d));
      for (auto& w : weights)
        for (double& c : w) c = test::uniform_in(rng, -1.0, 1.0);
      const int len = test::uniform_int(rng, 1, 10);
      GramAccumulator gram(d);
      std::vector<int> hist;
      for (int j = 0; j < len; ++j) {
        const int a = test::uniform_int(rng, 0, m - 1);
        hist.push_back(a);
        gram.add(grid[static_cast<std::size_t>(a)]);
      }
      const int q = test::uniform_int(rng, 0, m - 1);
      const double v = divergence_linear(grid[static_cast<std::size_t>(q)], gram);
      for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g) {
          if (f == g) continue;
          std::vector<double> diff(static_cast<std::size_t>(d));
          for (int i = 0; i < d; ++i) diff[i] = weights[f][i] - weights[g][i];
          double sum = 0.0;
          for (int a : hist) {
            const double dgap = dot(diff, grid[static_cast<std::size_t>(a)]);
            sum += dgap * dgap;
          }
          const double gap = dot(diff, grid[static_cast<std::size_t>(q)]);
          linear_k.check(v, sum, gap * gap);
        }
    }

    for (int trial = 0; trial < 500; ++trial) {
      const int d = test::uniform_int(rng, 1, 3);
      const int m = test::uniform_int(rng, std::max(2, d), 8);
      std::vector<std::vector<double>> feats(static_cast<std::size_t>(m),
                                             std::vector<double>(d));
      for (auto& row : feats)
        for (double& c : row) c = coarse(rng);
      const int n = test::uniform_int(rng, 2, 20);
      std::vector<std::vector<double>> weights(static_cast<std::size_t>(n),
                                               std::vector<double>(d));
      for (auto& w : weights)
        for (double& c : w) c = coarse(rng);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::vector<std::vector<double>> fx(
          static_cast<std::size_t>(n), std::vector<double>(m));
      for (int f = 0; f < n; ++f)
        for (int a = 0; a < m; ++a) {
          const double z = dot(weights[f], feats[static_cast<std::size_t>(a)]);
          lo = std::min(lo, z);
          hi = std::max(hi, z);
          fx[f][a] = link_value(LinkKind::logistic, z);
        }
      const double hull_kappa = hull_kappa_logistic(lo, hi);
      const int len = test::uniform_int(rng, 1, 10);
      GramAccumulator gram(d);
      std::vector<int> hist;
      for (int j = 0; j < len; ++j) {
        const int a = test::uniform_int(rng, 0, m - 1);
        hist.push_back(a);
        gram.add(feats[static_cast<std::size_t>(a)]);
      }
      const int q = test::uniform_int(rng, 0, m - 1);
      const double v = divergence_glm(feats[static_cast<std::size_t>(q)], gram,
                                      std::max(1.0, hull_kappa));
      for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g) {
          if (f == g) continue;
          double sum = 0.0;
          for (int a : hist) {
            const double dgap = fx[f][a] - fx[g][a];
            sum += dgap * dgap;
          }
          const double gap = fx[f][q] - fx[g][q];
          glm_k.check(v, sum, gap * gap);
        }
    }

    for (int trial = 0; trial < 500; ++trial) {
      const int d = test::uniform_int(rng, 1, 3);
      const int ambient = 3;
      const int shift = test::uniform_int(rng, 0, 2);
      std::vector<std::vector<double>> basis;
      for (int i = 0; i < d; ++i) {
        std::vector<double> b(static_cast<std::size_t>(ambient), 0.0);
        b[static_cast<std::size_t>((i + shift) % ambient)] =
            0.25 * test::uniform_int(rng, 1, 4);
        basis.push_back(std::move(b));
      }
      const int m = test::uniform_int(rng, d, 8);
      std::vector<std::vector<double>> actions;
      for (int a = 0; a < m; ++a) {
        std::vector<double> v(static_cast<std::size_t>(ambient), 0.0);
        for (int i = 0; i < d; ++i) {
          const double lambda = coarse(rng);
          for (int c = 0; c < ambient; ++c)
            v[static_cast<std::size_t>(c)] +=
                lambda * basis[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(c)];
        }
        actions.push_back(std::move(v));
      }
      const int n = test::uniform_int(rng, 2, 12);
      std::vector<std::vector<double>> weights(static_cast<std::size_t>(n),
                                               std::vector<double>(ambient));
      for (auto& w : weights)
        for (double& c : w) c = coarse(rng);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::vector<std::vector<double>> fx(
          static_cast<std::size_t>(n), std::vector<double>(m));
      for (int f = 0; f < n; ++f)
        for (int a = 0; a < m; ++a) {
          const double z = dot(weights[f], actions[static_cast<std::size_t>(a)]);
          lo = std::min(lo, z);
          hi = std::max(hi, z);
          fx[f][a] = link_value(LinkKind::logistic, z);
        }
      const double hull_kappa = hull_kappa_logistic(lo, hi);
      const int len = test::uniform_int(rng, 1, 10);
      GramAccumulator gram(d);
      std::vector<int> hist;
      for (int j = 0; j < len; ++j) {
        const int a = test::uniform_int(rng, 0, m - 1);
        hist.push_back(a);
        gram.add(coefficients_in_basis(actions[static_cast<std::size_t>(a)],
                                       basis));
      }
      const int q = test::uniform_int(rng, 0, m - 1);
      const double v =
          divergence_hetero(actions[static_cast<std::size_t>(q)], gram,
                            std::max(1.0, hull_kappa), basis);
      for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g) {
          if (f == g) continue;
          double sum = 0.0;
          for (int a : hist) {
            const double dgap = fx[f][a] - fx[g][a];
            sum += dgap * dgap;
          }
          const double gap = fx[f][q] - fx[g][q];
          hetero_k.check(v, sum, gap * gap);
        }
    }

    const long violations = finite_k.violations + linear_k.violations +
                            glm_k.violations + hetero_k.violations;
    const long checked =
        finite_k.checked + linear_k.checked + glm_k.checked + hetero_k.checked;
    gate.line(5, violations == 0,
              "divergence dominance held in " +
                  std::to_string(checked - violations) + "/" +
                  std::to_string(checked) +
                  " member-pair checks across 4 kernels x 500 instances (" +
                  std::to_string(violations) + " violations)");
  }

  // ---- infinite-action block (criteria 6-7) ---------------------------------
  const Problem linear = random_linear_problem(911);
  json c7json = run_config("uccb-ia", linear, 2048, 3000, 40);
  c7json["agent"]["divergence"] = "linear";
  c7json["audit"] = {{"enabled", true}, {"checks", {"elliptical"}}};
  const ExperimentConfig c7cfg = config_from_json(c7json);
  const RunSummary ia = run(c7cfg, base / "uccb-ia");

  // Criterion 6: the capped gram-potential sum stays within 3 d ln T on every
  // logged run and on 1000 random spanner-initialized action sequences.
  {
    RngStream rng(20260815, 1, 17);
    int sequence_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int d = test::uniform_int(rng, 1, 4);
      const int m = test::uniform_int(rng, d, 12);
      std::vector<std::vector<double>> grid(static_cast<std::size_t>(m),
                                            std::vector<double>(d, 0.0));
      for (int i = 0; i < d; ++i)
        grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] =
            test::uniform_in(rng, 0.4, 1.0);
      for (int i = d; i < m; ++i)
        for (double& c : grid[static_cast<std::size_t>(i)])
          c = test::uniform_in(rng, -1.0, 1.0);
      const Spanner sp = barycentric_spanner(grid);
      GramAccumulator gram(sp.dim);
      for (const std::vector<double>& v : sp.vectors) gram.add(v);
      const std::int64_t horizon = test::uniform_int(rng, 2, 2048);
      double sum = 0.0;
      for (std::int64_t t = 0; t < horizon; ++t) {
        const std::vector<double>& a =
            grid[static_cast<std::size_t>(test::uniform_int(rng, 0, m - 1))];
        sum += std::min(1.0, divergence_linear(a, gram));
        gram.add(a);
      }
      if (sum > 3.0 * d * std::log(static_cast<double>(horizon)) + 1e-9)
        ++sequence_failures;
    }
    const int run_passes = audit_passes(ia, "elliptical");
    const bool ok = sequence_failures == 0 && run_passes == 40;
    gate.line(6, ok,
              "gram-potential budget held on " +
                  std::to_string(1000 - sequence_failures) +
                  "/1000 random spanner-initialized sequences and " +
                  std::to_string(run_passes) + "/40 logged runs");
  }

  // Criterion 7: infinite-action pathwise regret at the horizon under the
  // entropy-based guarantee (entropy resolves to the grid dimension) in at
  // least 95% of seeds.
  {
    const bool ok = ia.within_bound >= 38 && c7cfg.entropy == 2.0;
    gate.line(7, ok,
              "pathwise regret at T=2048 under " + fmt(ia.bound_at_horizon) +
                  " in " + std::to_string(ia.within_bound) +
                  "/40 runs (need 38, entropy " + fmt(c7cfg.entropy, 1) + ")");
  }

  // Criterion 8: randomized allocation-subroutine instances halt within the
  // iteration cap, verify, drop the potential by >= 1/4 per descent step, and
  // never fire the mass guard.
  {
    RngStream rng(20260815, 2, 13);
    const std::vector<double> betas = {0.05, 0.2, 1.0};
    int instances = 0, cap_failures = 0, alloc_failures = 0, drop_failures = 0,
        guard_fires = 0, negative_atoms = 0;
    double min_drop_seen = std::numeric_limits<double>::infinity();
    std::int64_t max_iterations = 0;
    for (int d = 1; d <= 4; ++d) {
      for (int rep = 0; rep < 105; ++rep) {
        const double beta = betas[static_cast<std::size_t>(rep % 3)];
        const int m = test::uniform_int(rng, d, 50);
        std::vector<std::vector<double>> grid(static_cast<std::size_t>(m),
                                              std::vector<double>(d, 0.0));
        for (int i = 0; i < d; ++i)
          grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] =
              test::uniform_in(rng, 0.4, 1.0);
        for (int i = d; i < m; ++i)
          for (double& c : grid[static_cast<std::size_t>(i)])
            c = test::uniform_in(rng, -1.0, 1.0);
        std::vector<double> h(static_cast<std::size_t>(m));
        for (double& v : h) v = rng.next_uniform();
        const int a_hat = action_maximize(h);
        const Spanner sp = barycentric_spanner(grid);
        ++instances;
        try {
          const SubroutineResult res =
              optimistic_subroutine(grid, a_hat, h, beta, sp);
          max_iterations = std::max(max_iterations, res.diag.iterations);
          if (res.diag.iterations > subroutine_iteration_cap(beta, sp.dim))
            ++cap_failures;
          const AllocationCheck chk =
              verify_allocation(res.p, h, a_hat, beta, sp.dim, grid);
          if (!chk.pass) ++alloc_failures;
          if (res.diag.iterations > 0) {
            min_drop_seen = std::min(min_drop_seen, res.diag.min_descent_drop);
            if (res.diag.min_descent_drop < 0.25 - 1e-9) ++drop_failures;
          }
          if (res.diag.guard_fired) ++guard_fires;
          for (const auto& [a, w] : res.p.atoms)
            if (w < -1e-12) ++negative_atoms;
        } catch (const std::exception&) {
          ++cap_failures;  // non-halting (or invalid) instance
        }
      }
    }
    const bool ok = cap_failures == 0 && alloc_failures == 0 &&
                    drop_failures == 0 && guard_fires == 0 &&
                    negative_atoms == 0;
    gate.line(
        8, ok,
        std::to_string(instances) +
            " subroutine instances: all halted within cap (max iterations " +
            std::to_string(max_iterations) + "), allocations verified (" +
            std::to_string(alloc_failures) + " failures), min descent drop " +
            (std::isfinite(min_drop_seen) ? fmt(min_drop_seen, 6) : "n/a") +
            " >= 0.25, mass guard fired " + std::to_string(guard_fires) +
            " times");
  }

  // Criterion 9: epoch-agent pathwise regret at the horizon under its
  // guarantee in at least 95% of seeds, with at most ceil(log2 T) + 1
  // regression-oracle refits per run.
  json c9json = run_config("falcon", linear, 4096, 4000, 40);
  c9json["diagnostics"] = true;
  const ExperimentConfig c9cfg = config_from_json(c9json);
  const RunSummary falcon = run(c9cfg, base / "falcon");
  {
    std::int64_t max_calls = 0;
    for (const RunOutcome& r : falcon.runs)
      max_calls = std::max(max_calls, r.oracle_calls);
    const bool ok = falcon.within_bound >= 38 && max_calls <= 13;
    gate.line(9, ok,
              "pathwise regret at T=4096 under " +
                  fmt(falcon.bound_at_horizon) + " in " +
                  std::to_string(falcon.within_bound) +
                  "/40 runs (need 38); oracle refits at most " +
                  std::to_string(max_calls) + " <= 13 per run");
  }

  // Criterion 10: re-running one seed per agent kind reproduces the trace
  // files byte for byte.
  {
    const auto rerun_identical = [&](const ExperimentConfig& cfg,
                                     const fs::path& main_dir,
                                     const std::string& tag) {
      const fs::path rerun_dir = base / ("rerun-" + tag);
      run(cfg, rerun_dir, 1, 1);
      const std::string name =
          "trace-" + std::to_string(cfg.seed_base) + ".jsonl";
      return slurp(main_dir / name) == slurp(rerun_dir / name);
    };
    const bool u = rerun_identical(c1cfg, base / "uccb", "uccb");
    const bool i = rerun_identical(c7cfg, base / "uccb-ia", "uccb-ia");
    const bool f = rerun_identical(c9cfg, base / "falcon", "falcon");
    gate.line(10, u && i && f,
              std::string("same-seed reruns byte-identical: uccb ") +
                  (u ? "yes" : "NO") + ", uccb-ia " + (i ? "yes" : "NO") +
                  ", falcon " + (f ? "yes" : "NO"));
  }

  return gate.all_pass ? 0 : 1;
} catch (const std::exception& e) {
  std::cerr << "acceptance harness aborted: " << e.what() << std::endl;
  return 2;
}
