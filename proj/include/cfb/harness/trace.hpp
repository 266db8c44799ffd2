#pragma once

// JSONL trace files. Line 1 is a metadata object that makes the file
// self-contained (full problem description, agent kind, beta schedule,
// divergence geometry); every following line is one round record
// {"t","x","a","r","fhat","beta"} with an optional trailing "sub" object
// carrying per-round allocation-subroutine diagnostics. Field order is fixed
// so identical runs produce byte-identical files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfb/core/trajectory.hpp"
#include "cfb/harness/config.hpp"

namespace cfb {

struct TraceMeta {
  std::string agent;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  double delta = 0.0;
  int k = 0;  // total number of actions in the problem
  std::string divergence;
  std::vector<double> kappas;
  std::vector<int> dims;
  double entropy = 0.0;
  std::map<int, std::vector<int>> init_actions;  // context -> exploration slots
  ordered_json beta;
  std::string bound_kind = "none";
  bool memoize = false;
  ordered_json problem;
};

struct TraceRecord {
  std::int64_t t = 0;
  int x = 0;
  int a = 0;
  double r = 0.0;
  std::optional<EstimatorSnapshot> snapshot;
  std::optional<ordered_json> sub;
};

inline ordered_json meta_to_json(const TraceMeta& m) {
  ordered_json j;
  j["agent"] = m.agent;
  j["seed"] = m.seed;
  j["horizon"] = m.horizon;
  j["delta"] = m.delta;
  j["k"] = m.k;
  j["divergence"] = m.divergence;
  j["kappas"] = m.kappas;
  j["dims"] = m.dims;
  j["entropy"] = m.entropy;
  ordered_json spans = ordered_json::object();
  for (const auto& [x, slots] : m.init_actions)
    spans[std::to_string(x)] = slots;
  j["spanners"] = std::move(spans);
  j["beta"] = m.beta;
  j["bound_kind"] = m.bound_kind;
  j["memoize"] = m.memoize;
  j["problem"] = m.problem;
  return j;
}

inline ordered_json record_to_json(const TraceRecord& rec) {
  ordered_json j;
  j["t"] = rec.t;
  j["x"] = rec.x;
  j["a"] = rec.a;
  j["r"] = rec.r;
  if (rec.snapshot.has_value()) {
    j["fhat"] = rec.snapshot->fhat;
    j["beta"] = rec.snapshot->beta;
  } else {
    j["fhat"] = nullptr;
    j["beta"] = nullptr;
  }
  if (rec.sub.has_value()) j["sub"] = *rec.sub;
  return j;
}

inline void write_trace(const std::filesystem::path& file, const TraceMeta& meta,
                        const std::vector<TraceRecord>& records) {
  std::ofstream out(file, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open trace file for writing: " +
                             file.string());
  out << meta_to_json(meta).dump() << '\n';
  for (const TraceRecord& rec : records) out << record_to_json(rec).dump() << '\n';
  out.flush();
  if (!out)
    throw std::runtime_error("failed while writing trace file: " + file.string());
}

struct ParsedTrace {
  TraceMeta meta;
  Problem problem;          // decoded from meta.problem
  BetaSchedule beta;        // decoded from meta.beta
  DivergenceKind divergence = DivergenceKind::finite;
  std::vector<TraceRecord> records;
};

namespace detail {

[[noreturn]] inline void trace_fail(const std::filesystem::path& file,
                                    std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "trace parse error at " << file.string() << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace detail

inline ParsedTrace parse_trace(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + file.string());

  ParsedTrace out;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      detail::trace_fail(file, lineno, e.what());
    }
    if (!j.is_object()) detail::trace_fail(file, lineno, "expected a JSON object");

    if (!have_meta) {
      // Object-valued fields copied through verbatim (problem, beta) must
      // keep their on-disk key order so a parse/re-write round trip is
      // byte-identical; the plain parse above alphabetizes object keys.
      const ordered_json oj = ordered_json::parse(line);
      try {
        TraceMeta& m = out.meta;
        m.agent = cfg::as_string(cfg::require(j, "agent", "meta"), "meta.agent");
        m.seed = cfg::require(j, "seed", "meta").get<std::uint64_t>();
        m.horizon = cfg::as_int(cfg::require(j, "horizon", "meta"), "meta.horizon");
        m.delta = cfg::as_double(cfg::require(j, "delta", "meta"), "meta.delta");
        m.k = static_cast<int>(cfg::as_int(cfg::require(j, "k", "meta"), "meta.k"));
        m.divergence =
            cfg::as_string(cfg::require(j, "divergence", "meta"), "meta.divergence");
        m.kappas =
            cfg::as_double_vec(cfg::require(j, "kappas", "meta"), "meta.kappas");
        for (const json& d : cfg::require(j, "dims", "meta"))
          m.dims.push_back(static_cast<int>(cfg::as_int(d, "meta.dims")));
        m.entropy = cfg::as_double(cfg::require(j, "entropy", "meta"), "meta.entropy");
        const json& spans = cfg::require(j, "spanners", "meta");
        if (!spans.is_object())
          detail::trace_fail(file, lineno, "meta.spanners must be an object");
        for (const auto& [key, slots] : spans.items()) {
          std::vector<int>& dst = m.init_actions[std::stoi(key)];
          for (const json& s : slots)
            dst.push_back(static_cast<int>(cfg::as_int(s, "meta.spanners")));
        }
        cfg::require(j, "beta", "meta");
        m.beta = oj.at("beta");
        m.bound_kind =
            cfg::as_string(cfg::require(j, "bound_kind", "meta"), "meta.bound_kind");
        m.memoize = cfg::as_bool(cfg::require(j, "memoize", "meta"), "meta.memoize");
        cfg::require(j, "problem", "meta");
        m.problem = oj.at("problem");

        out.problem = problem_from_json(m.problem, "meta.problem");
        out.beta = beta_from_json(m.beta, "meta.beta", m.delta,
                                  out.problem.fclass.size(), m.horizon);
        out.divergence = divergence_from_name(m.divergence);
      } catch (const std::exception& e) {
        detail::trace_fail(file, lineno, e.what());
      }
      have_meta = true;
      continue;
    }

    TraceRecord rec;
    try {
      rec.t = cfg::as_int(cfg::require(j, "t", "record"), "record.t");
      rec.x = static_cast<int>(cfg::as_int(cfg::require(j, "x", "record"), "record.x"));
      rec.a = static_cast<int>(cfg::as_int(cfg::require(j, "a", "record"), "record.a"));
      rec.r = cfg::as_double(cfg::require(j, "r", "record"), "record.r");
      const json& fhat = cfg::require(j, "fhat", "record");
      const json& beta = cfg::require(j, "beta", "record");
      if (fhat.is_null() != beta.is_null())
        detail::trace_fail(file, lineno, "fhat and beta must be null together");
      if (!fhat.is_null())
        rec.snapshot = EstimatorSnapshot{
            static_cast<int>(cfg::as_int(fhat, "record.fhat")),
            cfg::as_double(beta, "record.beta")};
      if (j.contains("sub")) rec.sub = ordered_json::parse(line).at("sub");
    } catch (const std::exception& e) {
      detail::trace_fail(file, lineno, e.what());
    }
    out.records.push_back(std::move(rec));
  }
  if (!have_meta)
    throw std::runtime_error("trace file has no metadata line: " + file.string());
  return out;
}

}  // namespace cfb
