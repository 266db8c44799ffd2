#pragma once

// Audit engine: re-derives what a logged run should have done using only the
// trace file (problem description + per-round estimator snapshots) and checks
// the potential-sum guarantees the agents are designed to satisfy.
//
//   replay     - rebuild every counterfactual trajectory from scratch and
//                verify the logged action, plus exact prefix agreement across
//                repeated contexts (path independence).
//   lemma2     - exact-expectation contextual potential sum for the finite
//                agent, reconstructed with its own counts (initialization
//                policies included, no smoothing), against K + K ln(T/K).
//   elliptical - per-context divergence potential sums for the divergence
//                agent against E_x * 3 ln T (T >= 2).
//   prop1      - allocation-subroutine diagnostics: iteration cap, allocation
//                slack, per-iteration potential drop, rescale monotonicity,
//                and the mass-normalization guard counter.
//
// Checks that do not apply to a trace's agent kind report pass with a note.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/agents/falcon.hpp"
#include "cfb/agents/uccb.hpp"
#include "cfb/agents/uccb_ia.hpp"
#include "cfb/harness/trace.hpp"

namespace cfb {

inline constexpr double kAuditSlack = 1e-9;

struct AuditOutcome {
  std::string check;
  bool pass = false;
  bool applicable = true;
  double worst = 0.0;  // worst margin observed (value - bound); <= 0 is good
  std::string detail;
};

struct AuditReport {
  std::vector<AuditOutcome> outcomes;

  bool all_pass() const {
    return std::all_of(outcomes.begin(), outcomes.end(),
                       [](const AuditOutcome& o) { return o.pass; });
  }
};

namespace detail {

inline AuditOutcome not_applicable(const std::string& check,
                                   const std::string& agent) {
  return AuditOutcome{check, true, false, 0.0,
                      "check does not apply to agent '" + agent + "'"};
}

inline const EstimatorSnapshot& snapshot_at(const ParsedTrace& trace,
                                            std::size_t index) {
  const TraceRecord& rec = trace.records.at(index);
  if (!rec.snapshot.has_value())
    throw std::runtime_error("audit: record for round " +
                             std::to_string(rec.t) +
                             " is missing its estimator snapshot");
  return *rec.snapshot;
}

}  // namespace detail

// Contextual potential sum (finite agent). The counts here follow the
// potential bound's own convention: one occurrence per initialization policy,
// then one per replayed policy, with the summand read before the increment.
inline AuditOutcome audit_lemma2(const ParsedTrace& trace) {
  AuditOutcome out;
  out.check = "lemma2";
  if (trace.meta.agent != "uccb")
    return detail::not_applicable("lemma2", trace.meta.agent);

  const Problem& p = trace.problem;
  const int k = p.actions.total_count();
  const auto horizon = static_cast<std::int64_t>(trace.records.size());
  if (horizon <= k) {
    out.pass = true;
    out.detail = "vacuous: T <= K";
    return out;
  }

  const double bound =
      static_cast<double>(k) +
      static_cast<double>(k) *
          std::log(static_cast<double>(horizon) / static_cast<double>(k));
  double sum = 0.0;
  for (int x = 0; x < p.contexts.size(); ++x) {
    const double px = p.contexts.probabilities[static_cast<std::size_t>(x)];
    const std::vector<int> adm = p.actions.admissible(x);
    std::vector<std::int64_t> count(static_cast<std::size_t>(k), 1);
    for (std::int64_t t = k + 1; t <= horizon; ++t) {
      const EstimatorSnapshot& snap =
          detail::snapshot_at(trace, static_cast<std::size_t>(t - 1));
      int best = adm.front();
      double best_v = -std::numeric_limits<double>::infinity();
      for (int a : adm) {
        const double v =
            p.fclass.evaluate(snap.fhat, x, a, p.actions) +
            snap.beta / static_cast<double>(count[static_cast<std::size_t>(a)]);
        if (v > best_v) {
          best_v = v;
          best = a;
        }
      }
      sum += px / static_cast<double>(count[static_cast<std::size_t>(best)]);
      ++count[static_cast<std::size_t>(best)];
    }
  }

  out.worst = sum - bound;
  out.pass = sum <= bound + kAuditSlack;
  std::ostringstream os;
  os << "potential sum " << sum << " vs bound " << bound;
  out.detail = os.str();
  return out;
}

namespace detail {

// Shared skeleton for both replay audits: `expected(t, snapshots_prefix)`
// returns the rebuilt trajectory for round t's context (last entry = action).
template <typename TrajectoryFn>
inline AuditOutcome replay_core(const ParsedTrace& trace, std::int64_t warmup,
                                TrajectoryFn&& trajectory_for_round) {
  AuditOutcome out;
  out.check = "replay";
  std::int64_t mismatches = 0;
  std::int64_t prefix_breaks = 0;
  std::ostringstream first_fail;

  std::map<int, std::vector<int>> previous;  // context -> last trajectory
  std::vector<EstimatorSnapshot> snapshots;
  snapshots.reserve(trace.records.size());

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& rec = trace.records[i];
    const std::int64_t t = static_cast<std::int64_t>(i) + 1;
    if (rec.t != t)
      throw std::runtime_error("audit: trace rounds are not contiguous at line " +
                               std::to_string(i + 2));
    if (t <= warmup) {
      // Initialization rounds: the agent plays action t-1 unconditionally.
      if (rec.a != static_cast<int>(t - 1)) {
        ++mismatches;
        if (first_fail.tellp() == 0)
          first_fail << "round " << t << ": logged action " << rec.a
                     << ", expected initialization action " << (t - 1);
      }
      continue;
    }
    snapshots.push_back(snapshot_at(trace, i));
    const std::vector<int> traj = trajectory_for_round(rec, snapshots);
    if (traj.back() != rec.a) {
      ++mismatches;
      if (first_fail.tellp() == 0)
        first_fail << "round " << t << ": logged action " << rec.a
                   << ", replay produced " << traj.back();
    }
    auto [it, inserted] = previous.try_emplace(rec.x);
    if (!inserted) {
      const std::vector<int>& prev = it->second;
      const bool agree =
          prev.size() <= traj.size() &&
          std::equal(prev.begin(), prev.end(), traj.begin());
      if (!agree) {
        ++prefix_breaks;
        if (first_fail.tellp() == 0)
          first_fail << "round " << t << ": trajectory prefix diverges from the"
                     << " previous visit of context " << rec.x;
      }
    }
    it->second = traj;
  }

  out.worst = static_cast<double>(mismatches + prefix_breaks);
  out.pass = mismatches == 0 && prefix_breaks == 0;
  std::ostringstream os;
  os << mismatches << " action mismatch(es), " << prefix_breaks
     << " prefix disagreement(s) over " << trace.records.size() << " rounds";
  if (first_fail.tellp() != 0) os << "; first: " << first_fail.str();
  out.detail = os.str();
  return out;
}

}  // namespace detail

// Replay soundness + path independence, rebuilt from scratch every round.
inline AuditOutcome audit_replay(const ParsedTrace& trace) {
  const Problem& p = trace.problem;
  if (trace.meta.agent == "uccb") {
    return detail::replay_core(
        trace, p.actions.total_count(),
        [&p](const TraceRecord& rec,
             const std::vector<EstimatorSnapshot>& snaps) {
          return counterfactual_trajectory(p.fclass, p.actions, rec.x, snaps);
        });
  }
  if (trace.meta.agent == "uccb-ia") {
    std::map<int, ContextGeometry> geos;
    for (int x = 0; x < p.contexts.size(); ++x)
      geos.emplace(x, build_context_geometry(
                          p, trace.divergence,
                          trace.meta.kappas.at(static_cast<std::size_t>(x)), x));
    return detail::replay_core(
        trace, 0,
        [&p, &trace, &geos](const TraceRecord& rec,
                            const std::vector<EstimatorSnapshot>& snaps) {
          return ia_slot_sequence(p, trace.divergence, geos.at(rec.x), rec.x,
                                  snaps, static_cast<std::int64_t>(snaps.size()));
        });
  }
  return detail::not_applicable("replay", trace.meta.agent);
}

// Per-context divergence potential sums for the divergence agent.
inline AuditOutcome audit_elliptical(const ParsedTrace& trace) {
  AuditOutcome out;
  out.check = "elliptical";
  if (trace.meta.agent != "uccb-ia")
    return detail::not_applicable("elliptical", trace.meta.agent);

  const Problem& p = trace.problem;
  const auto horizon = static_cast<std::int64_t>(trace.records.size());
  if (horizon < 2) {
    out.pass = true;
    out.detail = "vacuous: potential bound stated for T >= 2";
    return out;
  }

  std::vector<EstimatorSnapshot> snapshots;
  snapshots.reserve(trace.records.size());
  for (std::size_t i = 0; i < trace.records.size(); ++i)
    snapshots.push_back(detail::snapshot_at(trace, i));

  out.pass = true;
  out.worst = -std::numeric_limits<double>::infinity();
  std::ostringstream os;
  for (int x = 0; x < p.contexts.size(); ++x) {
    const double kx = trace.meta.kappas.at(static_cast<std::size_t>(x));
    const ContextGeometry geo =
        build_context_geometry(p, trace.divergence, kx, x);
    const std::vector<int> slots =
        ia_slot_sequence(p, trace.divergence, geo, x, snapshots, horizon);
    DivergenceHistory hist = fresh_divergence_history(p, trace.divergence, geo);
    double sum = 0.0;
    for (int a : slots) {
      sum += std::min(1.0, hist.value(geo, a));
      hist.add(geo, a);
    }
    const double ex =
        kx * kx *
        static_cast<double>(trace.meta.dims.at(static_cast<std::size_t>(x)));
    const double bound = ex * 3.0 * std::log(static_cast<double>(horizon));
    out.worst = std::max(out.worst, sum - bound);
    if (sum > bound + kAuditSlack) {
      out.pass = false;
      if (os.tellp() != 0) os << "; ";
      os << "context " << x << ": potential " << sum << " > bound " << bound;
    }
  }
  if (out.pass) {
    os << "worst margin " << out.worst << " over " << p.contexts.size()
       << " context(s)";
  }
  out.detail = os.str();
  return out;
}

// Allocation-subroutine diagnostics recorded in the trace's "sub" objects.
inline AuditOutcome audit_prop1(const ParsedTrace& trace) {
  AuditOutcome out;
  out.check = "prop1";
  if (trace.meta.agent != "falcon")
    return detail::not_applicable("prop1", trace.meta.agent);

  const int d = trace.problem.actions.dim();
  std::int64_t invocations = 0;
  std::int64_t guard_fires = 0;
  std::int64_t cap_breaks = 0;
  double worst_slack = -std::numeric_limits<double>::infinity();
  double min_drop = std::numeric_limits<double>::infinity();
  double max_rescale_rise = -std::numeric_limits<double>::infinity();

  for (const TraceRecord& rec : trace.records) {
    if (!rec.sub.has_value()) continue;
    ++invocations;
    const ordered_json& sub = *rec.sub;
    if (!rec.snapshot.has_value())
      throw std::runtime_error(
          "audit: subroutine record without estimator snapshot at round " +
          std::to_string(rec.t));
    const double beta = rec.snapshot->beta;
    const std::int64_t cap = subroutine_iteration_cap(beta, d);
    const auto iters = sub.at("iterations").get<std::int64_t>();
    if (iters > cap) ++cap_breaks;
    worst_slack = std::max(worst_slack, sub.at("worst_slack").get<double>());
    if (sub.at("guard_fired").get<bool>()) ++guard_fires;
    if (!sub.at("min_drop").is_null())
      min_drop = std::min(min_drop, sub.at("min_drop").get<double>());
    if (!sub.at("max_rescale_increase").is_null())
      max_rescale_rise =
          std::max(max_rescale_rise, sub.at("max_rescale_increase").get<double>());
  }

  if (invocations == 0) {
    out.pass = true;
    out.detail = "no subroutine diagnostics recorded";
    return out;
  }

  const bool slack_ok = worst_slack <= kAuditSlack;
  const bool drop_ok =
      !std::isfinite(min_drop) || min_drop >= 0.25 - kAuditSlack;
  const bool rescale_ok =
      !std::isfinite(max_rescale_rise) || max_rescale_rise <= kAuditSlack;
  out.pass = cap_breaks == 0 && slack_ok && drop_ok && rescale_ok &&
             guard_fires == 0;
  out.worst = worst_slack;
  std::ostringstream os;
  os << invocations << " invocation(s): " << cap_breaks
     << " over iteration cap, worst allocation slack " << worst_slack
     << ", min potential drop "
     << (std::isfinite(min_drop) ? std::to_string(min_drop) : "n/a")
     << ", max rescale rise "
     << (std::isfinite(max_rescale_rise) ? std::to_string(max_rescale_rise)
                                         : "n/a")
     << ", guard fired " << guard_fires << " time(s)";
  out.detail = os.str();
  return out;
}

inline const std::vector<std::string>& default_checks(const std::string& agent) {
  static const std::vector<std::string> uccb = {"replay", "lemma2"};
  static const std::vector<std::string> ia = {"replay", "elliptical"};
  static const std::vector<std::string> falcon = {"prop1"};
  static const std::vector<std::string> none;
  if (agent == "uccb") return uccb;
  if (agent == "uccb-ia") return ia;
  if (agent == "falcon") return falcon;
  return none;
}

inline AuditReport audit_trace(const ParsedTrace& trace,
                               std::vector<std::string> checks = {}) {
  if (checks.empty()) checks = default_checks(trace.meta.agent);
  AuditReport report;
  for (const std::string& check : checks) {
    if (check == "lemma2")
      report.outcomes.push_back(audit_lemma2(trace));
    else if (check == "replay")
      report.outcomes.push_back(audit_replay(trace));
    else if (check == "elliptical")
      report.outcomes.push_back(audit_elliptical(trace));
    else if (check == "prop1")
      report.outcomes.push_back(audit_prop1(trace));
    else
      throw std::invalid_argument(
          "unknown audit check '" + check +
          "' (expected lemma2, elliptical, replay, or prop1)");
  }
  return report;
}

}  // namespace cfb
