#pragma once

// JSON experiment configuration: problem description, agent selection, beta
// schedule, horizons/seeds/replications, and audit toggles. Validation
// failures name the offending field path. The problem serializers here are
// shared with the trace metadata so audits can rebuild the exact problem.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfb/agents/baselines.hpp"
#include "cfb/agents/falcon.hpp"
#include "cfb/agents/uccb.hpp"
#include "cfb/agents/uccb_ia.hpp"
#include "cfb/environment/episode.hpp"
#include "cfb/environment/reward_model.hpp"
#include "cfb/geometry/divergence.hpp"
#include "cfb/linalg.hpp"

namespace cfb {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace cfg {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config error at " + path + ": " + what);
}

inline const json& require(const json& j, const std::string& key,
                           const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_double_vec(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::vector<double>> as_matrix(const json& j,
                                                  const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_double_vec(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::vector<std::vector<double>>> as_tensor(
    const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a three-level array");
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_matrix(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace cfg

inline Problem problem_from_json(const json& j, const std::string& path) {
  Problem p;

  const json& jc = cfg::require(j, "contexts", path);
  const std::vector<double> probs =
      cfg::as_double_vec(cfg::require(jc, "probabilities", path + ".contexts"),
                         path + ".contexts.probabilities");
  std::vector<std::string> names;
  if (jc.contains("names")) {
    const json& jn = jc["names"];
    if (!jn.is_array()) cfg::fail(path + ".contexts.names", "expected an array");
    for (std::size_t i = 0; i < jn.size(); ++i)
      names.push_back(cfg::as_string(
          jn[i], path + ".contexts.names[" + std::to_string(i) + "]"));
  } else {
    for (std::size_t i = 0; i < probs.size(); ++i)
      names.push_back("x" + std::to_string(i));
  }
  try {
    p.contexts = ContextSpace(std::move(names), probs);
  } catch (const std::exception& e) {
    cfg::fail(path + ".contexts", e.what());
  }

  const json& ja = cfg::require(j, "actions", path);
  const std::string akind =
      cfg::as_string(cfg::require(ja, "kind", path + ".actions"),
                     path + ".actions.kind");
  try {
    if (akind == "finite") {
      p.actions = ActionSpace::finite(static_cast<int>(cfg::as_int(
          cfg::require(ja, "count", path + ".actions"), path + ".actions.count")));
    } else if (akind == "grid") {
      std::map<int, std::vector<int>> restrictions;
      if (ja.contains("restrictions")) {
        const json& jr = ja["restrictions"];
        if (!jr.is_object())
          cfg::fail(path + ".actions.restrictions",
                    "expected an object keyed by context index");
        for (auto it = jr.begin(); it != jr.end(); ++it) {
          int ctx = 0;
          try {
            ctx = std::stoi(it.key());
          } catch (...) {
            cfg::fail(path + ".actions.restrictions",
                      "key '" + it.key() + "' is not a context index");
          }
          std::vector<int> ids;
          const std::string rp =
              path + ".actions.restrictions." + it.key();
          if (!it.value().is_array()) cfg::fail(rp, "expected an array");
          for (std::size_t i = 0; i < it.value().size(); ++i)
            ids.push_back(static_cast<int>(cfg::as_int(
                it.value()[i], rp + "[" + std::to_string(i) + "]")));
          restrictions[ctx] = std::move(ids);
        }
      }
      p.actions = ActionSpace::grid(
          cfg::as_matrix(cfg::require(ja, "vectors", path + ".actions"),
                         path + ".actions.vectors"),
          std::move(restrictions));
    } else {
      cfg::fail(path + ".actions.kind",
                "unknown kind '" + akind + "' (finite | grid)");
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config error", 0) == 0) throw;
    cfg::fail(path + ".actions", msg);
  }

  const json& jf = cfg::require(j, "functions", path);
  const std::string form =
      cfg::as_string(cfg::require(jf, "form", path + ".functions"),
                     path + ".functions.form");
  const std::string fp = path + ".functions";
  try {
    if (form == "tabular") {
      p.fclass = FunctionClass::tabular(
          cfg::as_tensor(cfg::require(jf, "values", fp), fp + ".values"));
    } else if (form == "linear") {
      p.fclass = FunctionClass::linear(
          cfg::as_tensor(cfg::require(jf, "weights", fp), fp + ".weights"));
    } else if (form == "glm" || form == "hetero") {
      const json& jl = cfg::require(jf, "links", fp);
      if (!jl.is_array()) cfg::fail(fp + ".links", "expected an array");
      std::vector<LinkKind> links;
      for (std::size_t i = 0; i < jl.size(); ++i)
        links.push_back(link_from_name(cfg::as_string(
            jl[i], fp + ".links[" + std::to_string(i) + "]")));
      auto weights =
          cfg::as_tensor(cfg::require(jf, "weights", fp), fp + ".weights");
      if (form == "glm") {
        std::vector<std::vector<std::vector<double>>> features;
        if (jf.contains("features"))
          features = cfg::as_tensor(jf["features"], fp + ".features");
        p.fclass = FunctionClass::glm(std::move(weights), std::move(links),
                                      std::move(features));
      } else {
        p.fclass = FunctionClass::hetero(std::move(weights), std::move(links));
      }
    } else {
      cfg::fail(fp + ".form", "unknown form '" + form +
                                  "' (tabular | linear | glm | hetero)");
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config error", 0) == 0) throw;
    cfg::fail(fp, msg);
  }

  p.truth.f_star_index = static_cast<int>(
      cfg::as_int(cfg::require(j, "truth", path), path + ".truth"));

  if (j.contains("rewards")) {
    const json& jr = j["rewards"];
    const std::string rkind = cfg::as_string(
        cfg::require(jr, "kind", path + ".rewards"), path + ".rewards.kind");
    if (rkind == "bernoulli") {
      p.rewards = RewardModel::bernoulli();
    } else if (rkind == "truncated-gaussian") {
      try {
        p.rewards = RewardModel::truncated_gaussian(
            cfg::as_double(cfg::require(jr, "sigma", path + ".rewards"),
                           path + ".rewards.sigma"));
      } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        if (msg.rfind("config error", 0) == 0) throw;
        cfg::fail(path + ".rewards", msg);
      }
    } else {
      cfg::fail(path + ".rewards.kind",
                "unknown kind '" + rkind + "' (bernoulli | truncated-gaussian)");
    }
  }

  try {
    p.validate();
  } catch (const std::exception& e) {
    cfg::fail(path, e.what());
  }
  return p;
}

inline ordered_json problem_to_json(const Problem& p) {
  ordered_json j;
  j["contexts"] = {{"names", p.contexts.descriptors},
                   {"probabilities", p.contexts.probabilities}};
  if (p.actions.kind() == ActionKind::finite) {
    j["actions"] = {{"kind", "finite"}, {"count", p.actions.total_count()}};
  } else {
    j["actions"] = {{"kind", "grid"}, {"vectors", p.actions.vectors()}};
    if (p.actions.has_restrictions()) {
      ordered_json jr = ordered_json::object();
      for (const auto& [ctx, ids] : p.actions.restrictions())
        jr[std::to_string(ctx)] = ids;
      j["actions"]["restrictions"] = jr;
    }
  }
  ordered_json jf;
  jf["form"] = form_name(p.fclass.form());
  if (p.fclass.form() == ModelForm::tabular) {
    jf["values"] = p.fclass.table();
  } else {
    jf["weights"] = p.fclass.weights();
    if (p.fclass.form() != ModelForm::linear) {
      std::vector<std::string> links;
      for (LinkKind k : p.fclass.link_kinds()) links.push_back(link_name(k));
      jf["links"] = links;
      if (p.fclass.form() == ModelForm::glm &&
          !p.fclass.feature_table().empty())
        jf["features"] = p.fclass.feature_table();
    }
  }
  j["functions"] = jf;
  j["truth"] = p.truth.f_star_index;
  if (p.rewards.kind() == RewardKind::bernoulli)
    j["rewards"] = {{"kind", "bernoulli"}};
  else
    j["rewards"] = {{"kind", "truncated-gaussian"}, {"sigma", p.rewards.sigma()}};
  return j;
}

inline BetaSchedule beta_from_json(const json& j, const std::string& path,
                                   double default_delta,
                                   std::int64_t default_cardinality,
                                   std::int64_t horizon) {
  const std::string kind =
      cfg::as_string(cfg::require(j, "kind", path), path + ".kind");
  const double delta = j.contains("delta")
                           ? cfg::as_double(j["delta"], path + ".delta")
                           : default_delta;
  if (kind == "finite") {
    const std::int64_t card =
        j.contains("cardinality")
            ? cfg::as_int(j["cardinality"], path + ".cardinality")
            : default_cardinality;
    return BetaSchedule::finite_class(card, delta);
  }
  if (kind == "parametric") {
    return BetaSchedule::parametric_class(
        static_cast<int>(cfg::as_int(cfg::require(j, "dim", path), path + ".dim")),
        cfg::as_double(cfg::require(j, "diameter", path), path + ".diameter"),
        cfg::as_double(cfg::require(j, "lipschitz", path), path + ".lipschitz"),
        delta);
  }
  if (kind == "covering") {
    return BetaSchedule::covering_class(
        horizon,
        cfg::as_double(cfg::require(j, "bound", path), path + ".bound"), delta);
  }
  if (kind == "constant") {
    return BetaSchedule::constant(
        cfg::as_double(cfg::require(j, "value", path), path + ".value"));
  }
  cfg::fail(path + ".kind", "unknown beta schedule '" + kind +
                                "' (finite | parametric | covering | constant)");
}

inline ordered_json beta_to_json(const BetaSchedule& s) {
  ordered_json j;
  switch (s.kind) {
    case BetaSchedule::Kind::finite:
      j["kind"] = "finite";
      j["cardinality"] = s.cardinality;
      j["delta"] = s.delta;
      break;
    case BetaSchedule::Kind::parametric:
      j["kind"] = "parametric";
      j["dim"] = s.dim;
      j["diameter"] = s.diameter;
      j["lipschitz"] = s.lipschitz;
      j["delta"] = s.delta;
      break;
    case BetaSchedule::Kind::covering:
      j["kind"] = "covering";
      j["bound"] = s.covering_bound;
      j["horizon"] = s.horizon;
      j["delta"] = s.delta;
      break;
    case BetaSchedule::Kind::constant:
      j["kind"] = "constant";
      j["value"] = s.constant_value;
      break;
  }
  return j;
}

struct AgentConfig {
  std::string kind;  // uccb | uccb-ia | falcon | greedy | epsilon-greedy
  double epsilon = 0.1;
  DivergenceKind divergence = DivergenceKind::finite;
  bool memoize = false;
  BetaSchedule beta;
};

struct AuditToggles {
  bool enabled = true;
  std::vector<std::string> checks;  // empty = agent-appropriate defaults
};

struct ExperimentConfig {
  AgentConfig agent;
  Problem problem;
  double delta = 0.05;
  std::int64_t horizon = 1;
  std::uint64_t seed_base = 0;
  int replications = 1;
  bool diagnostics = false;  // per-round subroutine records in traces
  AuditToggles audit;

  // Resolved divergence-agent data (identity values for other agents).
  std::vector<double> kappas;
  std::vector<int> dims;
  double entropy = 0.0;
  std::string bound_kind = "none";  // finite | infinite | falcon | none
};

// Per-context dimension entering the decision-entropy formula.
inline std::vector<int> divergence_dims(const Problem& p, DivergenceKind kind) {
  std::vector<int> dims(static_cast<std::size_t>(p.contexts.size()), 0);
  for (int x = 0; x < p.contexts.size(); ++x) {
    const std::vector<int> adm = p.actions.admissible(x);
    if (kind == DivergenceKind::finite) {
      dims[static_cast<std::size_t>(x)] = static_cast<int>(adm.size());
      continue;
    }
    std::vector<std::vector<double>> vecs;
    vecs.reserve(adm.size());
    for (int a : adm)
      vecs.push_back(kind == DivergenceKind::glm
                         ? p.fclass.feature(p.actions, x, a)
                         : p.actions.vector(a));
    dims[static_cast<std::size_t>(x)] = rank(vecs, kSpanRankTol);
  }
  return dims;
}

// Per-context curvature constants from the ground-truth weights (identity
// link gives exactly 1; count/raw kernels use 1 by convention).
inline std::vector<double> divergence_kappas(const Problem& p,
                                             DivergenceKind kind) {
  std::vector<double> ks(static_cast<std::size_t>(p.contexts.size()), 1.0);
  if (kind != DivergenceKind::glm && kind != DivergenceKind::hetero) return ks;
  for (int x = 0; x < p.contexts.size(); ++x) {
    std::vector<std::vector<double>> feats;
    for (int a : p.actions.admissible(x))
      feats.push_back(kind == DivergenceKind::glm
                          ? p.fclass.feature(p.actions, x, a)
                          : p.actions.vector(a));
    ks[static_cast<std::size_t>(x)] =
        kappa(p.fclass.link(x), p.fclass.weight(p.truth.f_star_index, x), feats);
  }
  return ks;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const std::string root = "config";

  c.problem = problem_from_json(cfg::require(j, "problem", root), root + ".problem");

  if (j.contains("delta")) c.delta = cfg::as_double(j["delta"], root + ".delta");
  if (!(c.delta > 0.0 && c.delta < 1.0))
    cfg::fail(root + ".delta", "must lie in (0,1)");

  c.horizon = cfg::as_int(cfg::require(j, "horizon", root), root + ".horizon");
  if (c.horizon < 1) cfg::fail(root + ".horizon", "must be >= 1");

  if (j.contains("seed"))
    c.seed_base = static_cast<std::uint64_t>(cfg::as_int(j["seed"], root + ".seed"));
  if (j.contains("replications"))
    c.replications =
        static_cast<int>(cfg::as_int(j["replications"], root + ".replications"));
  if (c.replications < 1) cfg::fail(root + ".replications", "must be >= 1");
  if (j.contains("diagnostics"))
    c.diagnostics = cfg::as_bool(j["diagnostics"], root + ".diagnostics");

  const json& ja = cfg::require(j, "agent", root);
  c.agent.kind = cfg::as_string(cfg::require(ja, "kind", root + ".agent"),
                                root + ".agent.kind");
  const bool known = c.agent.kind == "uccb" || c.agent.kind == "uccb-ia" ||
                     c.agent.kind == "falcon" || c.agent.kind == "greedy" ||
                     c.agent.kind == "epsilon-greedy";
  if (!known)
    cfg::fail(root + ".agent.kind",
              "unknown agent '" + c.agent.kind +
                  "' (uccb | uccb-ia | falcon | greedy | epsilon-greedy)");
  if (ja.contains("epsilon"))
    c.agent.epsilon = cfg::as_double(ja["epsilon"], root + ".agent.epsilon");
  if (ja.contains("memoize"))
    c.agent.memoize = cfg::as_bool(ja["memoize"], root + ".agent.memoize");
  if (ja.contains("divergence"))
    c.agent.divergence = divergence_from_name(
        cfg::as_string(ja["divergence"], root + ".agent.divergence"));

  const std::int64_t cardinality = c.problem.fclass.size();
  if (ja.contains("beta"))
    c.agent.beta = beta_from_json(ja["beta"], root + ".agent.beta", c.delta,
                                  cardinality, c.horizon);
  else
    c.agent.beta = BetaSchedule::finite_class(cardinality, c.delta);

  if (j.contains("audit")) {
    const json& jd = j["audit"];
    if (jd.contains("enabled"))
      c.audit.enabled = cfg::as_bool(jd["enabled"], root + ".audit.enabled");
    if (jd.contains("checks")) {
      if (!jd["checks"].is_array())
        cfg::fail(root + ".audit.checks", "expected an array");
      for (std::size_t i = 0; i < jd["checks"].size(); ++i)
        c.audit.checks.push_back(cfg::as_string(
            jd["checks"][i], root + ".audit.checks[" + std::to_string(i) + "]"));
    }
  }

  // Resolve divergence-agent data.
  if (c.agent.kind == "uccb-ia") {
    c.dims = divergence_dims(c.problem, c.agent.divergence);
    if (j.contains("kappas")) {
      c.kappas = cfg::as_double_vec(j["kappas"], root + ".kappas");
      if (static_cast<int>(c.kappas.size()) != c.problem.contexts.size())
        cfg::fail(root + ".kappas", "need one kappa per context");
    } else {
      c.kappas = divergence_kappas(c.problem, c.agent.divergence);
    }
    c.entropy = j.contains("entropy")
                    ? cfg::as_double(j["entropy"], root + ".entropy")
                    : decision_entropy(c.agent.divergence, c.problem.contexts,
                                       c.kappas, c.dims);
    if (!(c.entropy > 0.0)) cfg::fail(root + ".entropy", "must be > 0");
  } else {
    c.kappas.assign(static_cast<std::size_t>(c.problem.contexts.size()), 1.0);
  }

  if (c.agent.kind == "uccb" &&
      c.agent.beta.kind == BetaSchedule::Kind::finite)
    c.bound_kind = "finite";
  else if (c.agent.kind == "uccb-ia")
    c.bound_kind = "infinite";
  else if (c.agent.kind == "falcon")
    c.bound_kind = "falcon";

  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw std::invalid_argument("cannot open config file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config parse failure in " + file.string() +
                                ": " + e.what());
  }
  return config_from_json(j);
}

// The problem must outlive the returned agent.
inline std::unique_ptr<Agent> make_agent(const ExperimentConfig& c,
                                         const Problem& problem) {
  if (c.agent.kind == "uccb")
    return std::make_unique<UccbAgent>(&problem, c.agent.beta, c.agent.memoize);
  if (c.agent.kind == "uccb-ia")
    return std::make_unique<UccbIaAgent>(&problem, c.agent.divergence,
                                         c.kappas, c.entropy, c.agent.beta);
  if (c.agent.kind == "falcon")
    return std::make_unique<FalconAgent>(&problem, c.delta);
  if (c.agent.kind == "greedy")
    return std::make_unique<GreedyAgent>(&problem, 0.0);
  if (c.agent.kind == "epsilon-greedy")
    return std::make_unique<GreedyAgent>(&problem, c.agent.epsilon);
  throw std::invalid_argument("unknown agent kind '" + c.agent.kind + "'");
}

}  // namespace cfb
