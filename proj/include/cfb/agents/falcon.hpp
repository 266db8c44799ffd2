#pragma once

// Epoch-based optimistic-allocation agent for the linear action model:
// doubling epochs tau_m = 2^m, a least-squares refit at each epoch boundary,
// and per-round sparse action distributions produced by a coordinate-descent
// subroutine that minimizes the potential
//   Phi(q) = -2 log det(E_q[b_a b_a']) + E_q[2d + (h(a_hat) - h(a))/beta]
// over improper atom measures q (b_a = coefficients in a barycentric-spanner
// basis). Each iteration rescales q, finds the action maximizing
// h(a) + beta * a' (E_q[aa'])^{-1} a, halts when that value is at most
// h(a_hat) + 2 beta d, and otherwise adds mass at the maximizer.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/agents/uccb.hpp"
#include "cfb/core/action_space.hpp"
#include "cfb/core/function_class.hpp"
#include "cfb/core/trajectory.hpp"
#include "cfb/environment/episode.hpp"
#include "cfb/geometry/divergence.hpp"
#include "cfb/geometry/spanner.hpp"
#include "cfb/oracle/sse_table.hpp"

namespace cfb {

// beta_1 = 1; beta_m = 30 sqrt(ln(|F| tau_{m-1} / delta) / (2 d tau_{m-1}))
// with tau_m = 2^m.
inline double beta_falcon(int m, std::int64_t cardinality, double delta,
                          int d) {
  if (m < 1) throw std::invalid_argument("beta_falcon: epoch index must be >= 1");
  if (m == 1) return 1.0;
  check_delta(delta);
  if (cardinality < 1 || d < 1)
    throw std::invalid_argument("beta_falcon: |F| and d must be >= 1");
  const double tau_prev = std::pow(2.0, m - 1);
  const double lg =
      std::log(static_cast<double>(cardinality) * tau_prev / delta);
  return 30.0 * std::sqrt(lg / (2.0 * static_cast<double>(d) * tau_prev));
}

// Nonnegative atom measure over grid actions; total mass need not be 1 while
// the subroutine iterates. Atoms are unique per action and keep
// first-insertion order, which fixes the sampling walk deterministically.
struct SparseActionDistribution {
  std::vector<std::pair<int, double>> atoms;  // (grid action index, weight)

  double mass() const {
    double s = 0.0;
    for (const auto& [a, w] : atoms) s += w;
    return s;
  }

  double weight(int action) const {
    for (const auto& [a, w] : atoms)
      if (a == action) return w;
    return 0.0;
  }

  void add(int action, double w) {
    for (auto& [a, weight] : atoms)
      if (a == action) {
        weight += w;
        return;
      }
    atoms.emplace_back(action, w);
  }

  void scale(double c) {
    for (auto& [a, w] : atoms) w *= c;
  }

  // Cumulative walk over atoms in order; numerical remainder goes to the
  // last atom. Requires total mass 1 (the subroutine output guarantees it).
  int sample(RngStream& rng) const {
    if (atoms.empty())
      throw std::logic_error("sparse distribution: sampling from empty support");
    const double u = rng.next_uniform();
    double c = 0.0;
    for (const auto& [a, w] : atoms) {
      c += w;
      if (u < c) return a;
    }
    return atoms.back().first;
  }
};

// Exact potential evaluation over the atom measure; rejects a singular
// coefficient Gram (log det undefined).
inline double potential_phi(const SparseActionDistribution& q,
                            const std::vector<std::vector<double>>& grid,
                            const std::vector<double>& h, int a_hat,
                            double beta, const Spanner& spanner) {
  if (!(beta > 0.0))
    throw std::invalid_argument("potential: beta must be > 0");
  const int d = spanner.dim;
  GramAccumulator gram(d);
  double linear = 0.0;
  for (const auto& [a, w] : q.atoms) {
    const std::vector<double> b =
        coefficients_in_basis(grid.at(static_cast<std::size_t>(a)),
                              spanner.vectors);
    gram.add(b, w);
    linear += w * (2.0 * d + (h[static_cast<std::size_t>(a_hat)] -
                              h[static_cast<std::size_t>(a)]) /
                                 beta);
  }
  const double det = determinant(gram.matrix(), d);
  if (!(det > 0.0))
    throw std::invalid_argument(
        "potential: coefficient Gram is singular (det = " +
        std::to_string(det) + ")");
  return -2.0 * std::log(det) + linear;
}

// Corrected coordinate-descent step: the maximizer of the potential-drop
// model g(delta) = 2 V delta - V^2 delta^2 - delta (2d + w), positive
// whenever the halting test fails (V > 2d + w).
inline double descent_step(double v, int d, double w) {
  return (2.0 * v - 2.0 * d - w) / (2.0 * v * v);
}

// The uncorrected step form kept for demonstration purposes; negative
// under halting failure. Kept only so the discrepancy is demonstrable.
inline double descent_step_printed(double v, int d, double w) {
  return (-2.0 * v + 2.0 * d + w) / (v * v);
}

inline std::int64_t subroutine_iteration_cap(double beta, int d) {
  return static_cast<std::int64_t>(
      std::ceil(4.0 / beta + 8.0 * d * (std::log(static_cast<double>(d)) + 1.0)));
}

struct SubroutineOptions {
  bool use_printed_step = false;  // demonstration switch, never in production
  bool record_phi_trace = true;
};

struct SubroutineDiagnostics {
  std::int64_t iterations = 0;      // non-halting descent steps performed
  double final_mass = 0.0;          // mass at halt, before deficit/normalize
  double worst_slack = 0.0;         // worst allocation-condition violation
  bool guard_fired = false;         // halt mass exceeded 1 + 1e-9
  double min_descent_drop =
      std::numeric_limits<double>::infinity();   // min per-step Phi drop
  double max_rescale_increase =
      -std::numeric_limits<double>::infinity();  // max per-step rescale rise
  std::vector<double> phi_trace;    // Phi(q0), then after each rescale/descent
};

struct SubroutineResult {
  SparseActionDistribution p;
  SubroutineDiagnostics diag;
};

inline constexpr double kMassGuardTol = 1e-9;

// Checks the two allocation inequalities at tolerance 1e-9 and reports the
// worst slack (positive = violation):
//   E_p[h(a_hat) - h(a)] <= 2 beta d
//   h(a) + beta a' (E_p[aa'])^{-1} a <= h(a_hat) + 2 beta d   for every a
struct AllocationCheck {
  bool pass = false;
  double worst_slack = 0.0;
};

inline AllocationCheck verify_allocation(
    const SparseActionDistribution& p, const std::vector<double>& h, int a_hat,
    double beta, int d, const std::vector<std::vector<double>>& grid) {
  if (std::fabs(p.mass() - 1.0) > 1e-9)
    throw std::invalid_argument("verify_allocation: total mass " +
                                std::to_string(p.mass()) + " is not 1");
  const double rhs = h[static_cast<std::size_t>(a_hat)] + 2.0 * beta * d;
  GramAccumulator gram(static_cast<int>(grid[0].size()));
  double gap = 0.0;
  for (const auto& [a, w] : p.atoms) {
    gram.add(grid.at(static_cast<std::size_t>(a)), w);
    gap += w * (h[static_cast<std::size_t>(a_hat)] -
                h[static_cast<std::size_t>(a)]);
  }
  AllocationCheck out;
  out.worst_slack = gap - 2.0 * beta * d;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double v = divergence_linear(grid[a], gram);
    const double slack = h[a] + beta * v - rhs;
    if (slack > out.worst_slack || std::isnan(slack))
      out.worst_slack = std::isnan(slack)
                            ? std::numeric_limits<double>::infinity()
                            : slack;
  }
  out.pass = out.worst_slack <= 1e-9;
  return out;
}

// The coordinate-descent allocation search. `a_hat` must be the index of a
// maximizer of h over the grid; the spanner must span the grid.
inline SubroutineResult optimistic_subroutine(
    const std::vector<std::vector<double>>& grid, int a_hat,
    const std::vector<double>& h, double beta, const Spanner& spanner,
    const SubroutineOptions& opts = {}) {
  if (!(beta > 0.0))
    throw std::invalid_argument("subroutine: beta must be > 0");
  if (a_hat < 0 || a_hat >= static_cast<int>(grid.size()))
    throw std::invalid_argument("subroutine: a_hat outside grid");
  const int d = spanner.dim;
  const int ambient = static_cast<int>(grid[0].size());
  const std::int64_t cap = subroutine_iteration_cap(beta, d);

  // w(a) = (h(a_hat) - h(a)) / beta, nonnegative when a_hat maximizes h.
  std::vector<double> w(grid.size());
  for (std::size_t a = 0; a < grid.size(); ++a) {
    w[a] = (h[static_cast<std::size_t>(a_hat)] - h[a]) / beta;
    if (w[a] < 0.0)
      throw std::invalid_argument(
          "subroutine: a_hat does not maximize the estimates (w(" +
          std::to_string(a) + ") = " + std::to_string(w[a]) + ")");
  }

  SparseActionDistribution q;
  for (int i : spanner.indices) q.add(i, 1.0 / static_cast<double>(d));

  SubroutineDiagnostics diag;
  const auto phi = [&]() {
    return potential_phi(q, grid, h, a_hat, beta, spanner);
  };
  double phi_now = 0.0;
  if (opts.record_phi_trace) {
    phi_now = phi();
    diag.phi_trace.push_back(phi_now);
  }

  for (;;) {
    // Rescale by the c in (0, 1] minimizing Phi(c q). Since
    // d/dc Phi(c q) = -2d/c + E_q[2d + w] with E_q the mass-weighted sum,
    // the minimizer is 2d / (2d mass(q) + E_q[w]); the mass term matters
    // because mass(q) drifts below 1 after the first rescale, and a factor
    // computed as if mass were 1 would overshoot the minimum and can
    // increase Phi, stalling the descent.
    double ew = 0.0;
    for (const auto& [a, wt] : q.atoms) ew += wt * w[static_cast<std::size_t>(a)];
    const double factor =
        std::min(2.0 * d / (2.0 * d * q.mass() + ew), 1.0);
    q.scale(factor);
    if (opts.record_phi_trace) {
      const double phi_rescaled = phi();
      diag.max_rescale_increase =
          std::max(diag.max_rescale_increase, phi_rescaled - phi_now);
      diag.phi_trace.push_back(phi_rescaled);
      phi_now = phi_rescaled;
    }

    // Optimistic argmax over the grid against the raw-action Gram.
    GramAccumulator gram(ambient);
    for (const auto& [a, wt] : q.atoms)
      gram.add(grid[static_cast<std::size_t>(a)], wt);
    std::vector<double> values(grid.size());
    std::vector<double> quad(grid.size());
    for (std::size_t a = 0; a < grid.size(); ++a) {
      quad[a] = divergence_linear(grid[a], gram);
      values[a] = h[a] + beta * quad[a];
    }
    const int a_t = action_maximize(values);
    const double v_t = quad[static_cast<std::size_t>(a_t)];

    // Halting test.
    if (!(values[static_cast<std::size_t>(a_t)] >
          h[static_cast<std::size_t>(a_hat)] + 2.0 * beta * d)) {
      diag.final_mass = q.mass();
      if (diag.final_mass > 1.0 + kMassGuardTol) {
        diag.guard_fired = true;
        q.scale(1.0 / diag.final_mass);
      } else if (diag.final_mass > 1.0) {
        q.scale(1.0 / diag.final_mass);
      } else {
        const double deficit = 1.0 - diag.final_mass;
        if (deficit > 0.0) q.add(a_hat, deficit);
      }
      SubroutineResult out;
      out.p = q;
      const AllocationCheck check =
          verify_allocation(out.p, h, a_hat, beta, d, grid);
      diag.worst_slack = check.worst_slack;
      out.diag = diag;
      return out;
    }

    // Descent; a pass that would exceed the cap of non-halting steps is the
    // non-recoverable failure mode.
    if (diag.iterations >= cap) {
      std::string trace = "[";
      for (std::size_t i = 0; i < diag.phi_trace.size(); ++i)
        trace += (i ? ", " : "") + std::to_string(diag.phi_trace[i]);
      trace += "]";
      throw std::runtime_error(
          "subroutine failed to halt within the iteration cap " +
          std::to_string(cap) + " (beta = " + std::to_string(beta) +
          ", d = " + std::to_string(d) + "); potential trace " + trace);
    }
    const double step =
        opts.use_printed_step
            ? descent_step_printed(v_t, d, w[static_cast<std::size_t>(a_t)])
            : descent_step(v_t, d, w[static_cast<std::size_t>(a_t)]);
    q.add(a_t, step);
    ++diag.iterations;
    if (opts.record_phi_trace) {
      const double phi_desc = phi();
      diag.min_descent_drop =
          std::min(diag.min_descent_drop, phi_now - phi_desc);
      diag.phi_trace.push_back(phi_desc);
      phi_now = phi_desc;
    }
  }
}

class FalconAgent : public Agent {
 public:
  FalconAgent(const Problem* problem, double delta,
              SubroutineOptions opts = {})
      : problem_(problem),
        delta_(delta),
        opts_(opts),
        oracle_(&problem->fclass, &problem->actions) {
    check_delta(delta);
    if (problem->actions.kind() != ActionKind::grid)
      throw std::invalid_argument(
          "falcon: requires a vector action grid (linear action model)");
    if (problem->actions.has_restrictions())
      throw std::invalid_argument(
          "falcon: per-context admissibility restrictions are not supported");
    d_ = problem->actions.dim();
    grid_ = problem->actions.vectors();
    spanner_ = barycentric_spanner(grid_);
    if (spanner_.dim != d_)
      throw std::invalid_argument("falcon: action grid does not span R^d");
    beta_ = beta_falcon(1, problem->fclass.size(), delta_, d_);
  }

  int select_action(int context, RngStream& rng) override {
    std::vector<double> h(grid_.size());
    for (std::size_t a = 0; a < grid_.size(); ++a)
      h[a] = problem_->fclass.evaluate(fhat_, context, static_cast<int>(a),
                                       problem_->actions);
    int a_hat = 0;
    for (std::size_t a = 1; a < grid_.size(); ++a)
      if (h[a] > h[static_cast<std::size_t>(a_hat)]) a_hat = static_cast<int>(a);
    SubroutineResult res =
        optimistic_subroutine(grid_, a_hat, h, beta_, spanner_, opts_);
    last_diag_ = std::move(res.diag);
    guard_fires_ += last_diag_->guard_fired ? 1 : 0;
    return res.p.sample(rng);
  }

  void observe(int context, int action, double reward) override {
    oracle_.update(context, action, reward);
    if (t_ == epoch_end_) {
      ++m_;
      fhat_ = oracle_.least_squares();
      ++oracle_calls_;
      beta_ = beta_falcon(m_, problem_->fclass.size(), delta_, d_);
      epoch_end_ *= 2;
    }
    ++t_;
  }

  std::optional<EstimatorSnapshot> current_snapshot() const override {
    return EstimatorSnapshot{fhat_, beta_};
  }

  int epoch() const { return m_; }
  std::int64_t oracle_calls() const { return oracle_calls_; }
  std::int64_t guard_fires() const { return guard_fires_; }
  const Spanner& spanner() const { return spanner_; }
  const std::optional<SubroutineDiagnostics>& last_diagnostics() const {
    return last_diag_;
  }

 private:
  const Problem* problem_;
  double delta_;
  SubroutineOptions opts_;
  SseTable oracle_;
  int d_ = 0;
  std::vector<std::vector<double>> grid_;
  Spanner spanner_;
  int m_ = 1;
  std::int64_t t_ = 1;
  std::int64_t epoch_end_ = 2;
  int fhat_ = 0;
  double beta_ = 1.0;
  std::int64_t oracle_calls_ = 0;
  std::int64_t guard_fires_ = 0;
  std::optional<SubroutineDiagnostics> last_diag_;
};

}  // namespace cfb
