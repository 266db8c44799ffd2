#pragma once

// Experiment orchestration: runs seeded replications (optionally across a
// thread pool), writes one JSONL trace per seed, re-reads the written files
// to run the requested audits, and persists
//   summary.csv        - seed,t,cum_pathwise_regret,cum_pseudo_regret
//   bound_report.json  - per-run regret at T vs. the applicable bound,
//                        audit outcomes, subroutine guard/oracle counters
// plus an aggregation step that turns a run directory into mean/quantile
// regret curves with a bound overlay column.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cfb/agents/falcon.hpp"
#include "cfb/audit/audit.hpp"
#include "cfb/harness/bounds.hpp"
#include "cfb/harness/config.hpp"
#include "cfb/harness/log.hpp"
#include "cfb/harness/trace.hpp"

namespace cfb {

// Shortest round-trip decimal form, shared by the CSV writers.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

// The regret guarantee matching the configured agent, evaluated at round t.
// Returns NaN when no bound applies.
inline double bound_value(const ExperimentConfig& cfg, std::int64_t t) {
  if (cfg.bound_kind == "finite")
    return bound_finite(t, cfg.problem.actions.total_count(),
                        cfg.problem.fclass.size(), cfg.delta);
  if (cfg.bound_kind == "infinite")
    return bound_infinite(t, cfg.entropy, cfg.problem.fclass.size(), cfg.delta);
  if (cfg.bound_kind == "falcon")
    return bound_falcon(t, cfg.problem.actions.dim(), cfg.problem.fclass.size(),
                        cfg.delta);
  return std::numeric_limits<double>::quiet_NaN();
}

inline ordered_json subroutine_to_json(const SubroutineDiagnostics& d) {
  ordered_json j;
  j["iterations"] = d.iterations;
  j["final_mass"] = d.final_mass;
  j["worst_slack"] = d.worst_slack;
  j["guard_fired"] = d.guard_fired;
  if (std::isfinite(d.min_descent_drop))
    j["min_drop"] = d.min_descent_drop;
  else
    j["min_drop"] = nullptr;
  if (std::isfinite(d.max_rescale_increase))
    j["max_rescale_increase"] = d.max_rescale_increase;
  else
    j["max_rescale_increase"] = nullptr;
  return j;
}

struct RunOutcome {
  std::uint64_t seed = 0;
  std::vector<RegretRecord> regret;
  AuditReport audit;
  std::int64_t oracle_calls = 0;  // regression-oracle refits (epoch agent)
  std::int64_t guard_fires = 0;   // subroutine mass-normalization guard
};

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<RunOutcome> runs;  // ordered by seed
  double bound_at_horizon = std::numeric_limits<double>::quiet_NaN();
  int within_bound = 0;  // runs with pathwise regret at T under the bound
  bool all_audits_pass = true;
};

namespace detail {

inline TraceMeta make_meta(const ExperimentConfig& cfg, std::uint64_t seed,
                           const Agent& agent) {
  TraceMeta m;
  m.agent = cfg.agent.kind;
  m.seed = seed;
  m.horizon = cfg.horizon;
  m.delta = cfg.delta;
  m.k = cfg.problem.actions.total_count();
  m.divergence = divergence_name(cfg.agent.divergence);
  m.kappas = cfg.kappas;
  m.dims = cfg.dims;
  m.entropy = cfg.entropy;
  if (cfg.agent.kind == "uccb-ia") {
    for (int x = 0; x < cfg.problem.contexts.size(); ++x)
      m.init_actions[x] =
          build_context_geometry(cfg.problem, cfg.agent.divergence,
                                 cfg.kappas[static_cast<std::size_t>(x)], x)
              .init_actions;
  } else if (const auto* fal = dynamic_cast<const FalconAgent*>(&agent)) {
    for (int x = 0; x < cfg.problem.contexts.size(); ++x)
      m.init_actions[x] = fal->spanner().indices;
  }
  m.beta = beta_to_json(cfg.agent.beta);
  m.bound_kind = cfg.bound_kind;
  m.memoize = cfg.agent.memoize;
  m.problem = problem_to_json(cfg.problem);
  return m;
}

inline RunOutcome run_one(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir, int index) {
  RunOutcome out;
  out.seed = cfg.seed_base + static_cast<std::uint64_t>(index);

  std::unique_ptr<Agent> agent = make_agent(cfg, cfg.problem);
  auto* fal = dynamic_cast<FalconAgent*>(agent.get());

  std::vector<TraceRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.horizon));
  const auto sink = [&](const Record& r) {
    TraceRecord tr;
    tr.t = r.t;
    tr.x = r.context;
    tr.a = r.action;
    tr.r = r.reward;
    tr.snapshot = r.snapshot;
    if (cfg.diagnostics && fal != nullptr && fal->last_diagnostics())
      tr.sub = subroutine_to_json(*fal->last_diagnostics());
    records.push_back(std::move(tr));
  };

  EpisodeConfig ec;
  ec.horizon = cfg.horizon;
  ec.master_seed = out.seed;
  ec.agent_id = cfg.agent.kind;
  ec.record_diagnostics = cfg.diagnostics;
  EpisodeResult episode = run_episode(ec, *agent, cfg.problem, sink);
  out.regret = std::move(episode.regret);
  if (fal != nullptr) {
    out.oracle_calls = fal->oracle_calls();
    out.guard_fires = fal->guard_fires();
  }

  const std::filesystem::path trace_file =
      out_dir / ("trace-" + std::to_string(out.seed) + ".jsonl");
  write_trace(trace_file, make_meta(cfg, out.seed, *agent), records);
  log_line(1, "run seed " + std::to_string(out.seed) + ": wrote " +
                  trace_file.string());

  if (cfg.audit.enabled) {
    const ParsedTrace parsed = parse_trace(trace_file);
    out.audit = audit_trace(parsed, cfg.audit.checks);
    for (const AuditOutcome& o : out.audit.outcomes)
      log_line(2, "  audit " + o.check + (o.pass ? " pass: " : " FAIL: ") +
                      o.detail);
  }
  return out;
}

}  // namespace detail

inline RunSummary run(const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir, int parallel = 1,
                      int replications_override = 0) {
  const int reps =
      replications_override > 0 ? replications_override : cfg.replications;
  if (out_dir.empty())
    throw std::invalid_argument("run: output directory must be non-empty");
  std::filesystem::create_directories(out_dir);

  RunSummary summary;
  summary.out_dir = out_dir;
  summary.runs.resize(static_cast<std::size_t>(reps));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= reps) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        summary.runs[static_cast<std::size_t>(i)] =
            detail::run_one(cfg, out_dir, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::clamp(parallel, 1, reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // summary.csv, ordered by seed then round.
  {
    std::ofstream csv(out_dir / "summary.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write summary.csv");
    csv << "seed,t,cum_pathwise_regret,cum_pseudo_regret\n";
    for (const RunOutcome& r : summary.runs)
      for (const RegretRecord& row : r.regret)
        csv << r.seed << ',' << row.t << ',' << format_double(row.cum_pathwise)
            << ',' << format_double(row.cum_pseudo) << '\n';
  }

  // bound_report.json.
  summary.bound_at_horizon = bound_value(cfg, cfg.horizon);
  ordered_json report;
  report["bound_kind"] = cfg.bound_kind;
  report["horizon"] = cfg.horizon;
  report["delta"] = cfg.delta;
  report["k"] = cfg.problem.actions.total_count();
  report["cardinality"] = cfg.problem.fclass.size();
  report["entropy"] = cfg.entropy;
  report["dim"] = cfg.problem.actions.dim();
  if (std::isnan(summary.bound_at_horizon))
    report["bound_at_horizon"] = nullptr;
  else
    report["bound_at_horizon"] = summary.bound_at_horizon;
  ordered_json runs = ordered_json::array();
  for (const RunOutcome& r : summary.runs) {
    ordered_json jr;
    jr["seed"] = r.seed;
    const RegretRecord& last = r.regret.back();
    jr["cum_pathwise_regret"] = last.cum_pathwise;
    jr["cum_pseudo_regret"] = last.cum_pseudo;
    if (std::isnan(summary.bound_at_horizon)) {
      jr["within_bound"] = nullptr;
    } else {
      const bool ok = last.cum_pathwise <= summary.bound_at_horizon;
      jr["within_bound"] = ok;
      if (ok) ++summary.within_bound;
    }
    jr["oracle_calls"] = r.oracle_calls;
    jr["guard_fires"] = r.guard_fires;
    ordered_json audits = ordered_json::array();
    for (const AuditOutcome& o : r.audit.outcomes) {
      ordered_json jo;
      jo["check"] = o.check;
      jo["pass"] = o.pass;
      jo["applicable"] = o.applicable;
      jo["worst"] = o.worst;
      jo["detail"] = o.detail;
      audits.push_back(std::move(jo));
      if (!o.pass) summary.all_audits_pass = false;
    }
    jr["audit"] = std::move(audits);
    runs.push_back(std::move(jr));
  }
  report["runs"] = std::move(runs);
  report["all_audits_pass"] = summary.all_audits_pass;
  {
    std::ofstream jf(out_dir / "bound_report.json", std::ios::binary);
    if (!jf) throw std::runtime_error("cannot write bound_report.json");
    jf << report.dump(2) << '\n';
  }
  log_line(1, "run complete: " + std::to_string(reps) + " replication(s) in " +
                  out_dir.string());
  return summary;
}

// --- aggregation ------------------------------------------------------------

namespace detail {

// Interpolated quantile with h = (n-1)p on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

struct BoundParams {
  std::string kind = "none";
  double delta = 0.05;
  int k = 1;
  std::int64_t cardinality = 1;
  double entropy = 0.0;
  int dim = 0;
};

inline double bound_from_params(const BoundParams& bp, std::int64_t t) {
  if (bp.kind == "finite") return bound_finite(t, bp.k, bp.cardinality, bp.delta);
  if (bp.kind == "infinite")
    return bound_infinite(t, bp.entropy, bp.cardinality, bp.delta);
  if (bp.kind == "falcon")
    return bound_falcon(t, bp.dim, bp.cardinality, bp.delta);
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// Aggregates a run directory into per-round mean and 10/90-quantile regret
// curves with the regret guarantee as an overlay column (empty when no bound
// applies).
inline void report(const std::filesystem::path& runs_dir,
                   const std::filesystem::path& out_csv) {
  const std::filesystem::path summary_file = runs_dir / "summary.csv";
  std::ifstream in(summary_file, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + summary_file.string() +
                             " (expected a run directory)");

  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>>
      by_round;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;  // header
    std::array<std::string, 4> cell;
    std::size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t comma = line.find(',', start);
      if (c < 3 && comma == std::string::npos)
        throw std::runtime_error("malformed summary row at " +
                                 summary_file.string() + ":" +
                                 std::to_string(lineno));
      cell[static_cast<std::size_t>(c)] =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      start = comma + 1;
    }
    const std::int64_t t = std::stoll(cell[1]);
    auto& [pathwise, pseudo] = by_round[t];
    pathwise.push_back(std::stod(cell[2]));
    pseudo.push_back(std::stod(cell[3]));
  }
  if (by_round.empty())
    throw std::runtime_error("summary has no data rows: " +
                             summary_file.string());

  detail::BoundParams bp;
  const std::filesystem::path report_file = runs_dir / "bound_report.json";
  if (std::filesystem::exists(report_file)) {
    std::ifstream rf(report_file, std::ios::binary);
    json jr = json::parse(rf);
    bp.kind = jr.value("bound_kind", std::string("none"));
    bp.delta = jr.value("delta", 0.05);
    bp.k = jr.value("k", 1);
    bp.cardinality = jr.value("cardinality", std::int64_t{1});
    bp.entropy = jr.value("entropy", 0.0);
    bp.dim = jr.value("dim", 0);
  }

  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_csv.string());
  out << "t,mean_cum_pathwise_regret,q10_cum_pathwise_regret,"
         "q90_cum_pathwise_regret,mean_cum_pseudo_regret,"
         "q10_cum_pseudo_regret,q90_cum_pseudo_regret,bound\n";
  for (auto& [t, cols] : by_round) {
    auto& [pathwise, pseudo] = cols;
    std::sort(pathwise.begin(), pathwise.end());
    std::sort(pseudo.begin(), pseudo.end());
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    out << t << ',' << format_double(mean(pathwise)) << ','
        << format_double(detail::quantile_sorted(pathwise, 0.10)) << ','
        << format_double(detail::quantile_sorted(pathwise, 0.90)) << ','
        << format_double(mean(pseudo)) << ','
        << format_double(detail::quantile_sorted(pseudo, 0.10)) << ','
        << format_double(detail::quantile_sorted(pseudo, 0.90)) << ',';
    const double b = detail::bound_from_params(bp, t);
    if (!std::isnan(b)) out << format_double(b);
    out << '\n';
  }
  log_line(1, "report written to " + out_csv.string());
}

}  // namespace cfb
