#pragma once

// Finite indexed families of mean-reward functions f: X x A -> [0,1], in one
// of four forms:
//   tabular            values[member][context][action index]
//   linear             f(x,a) = g_m(x)' a over grid vectors
//   glm                f(x,a) = sigma_x(g_m(x)' phi(x,a)), phi a feature table
//   hetero             f(x,a) = sigma_x(g_m(x)' a) on the restricted set A(x)
// Member indices are stable and define every deterministic tie-break. All
// values are checked to lie in [0,1] exhaustively at construction.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/core/action_space.hpp"
#include "cfb/core/context_space.hpp"
#include "cfb/core/link.hpp"

namespace cfb {

enum class ModelForm { tabular, linear, glm, hetero };

inline ModelForm form_from_name(const std::string& name) {
  if (name == "tabular") return ModelForm::tabular;
  if (name == "linear") return ModelForm::linear;
  if (name == "glm") return ModelForm::glm;
  if (name == "hetero") return ModelForm::hetero;
  throw std::invalid_argument("unknown function form '" + name + "'");
}

inline const char* form_name(ModelForm f) {
  switch (f) {
    case ModelForm::tabular: return "tabular";
    case ModelForm::linear: return "linear";
    case ModelForm::glm: return "glm";
    case ModelForm::hetero: return "hetero";
  }
  return "?";
}

class FunctionClass {
 public:
  FunctionClass() = default;

  static FunctionClass tabular(
      std::vector<std::vector<std::vector<double>>> values) {
    FunctionClass fc;
    fc.form_ = ModelForm::tabular;
    fc.table_ = std::move(values);
    return fc;
  }

  // g[member][context] is a weight vector of the grid dimension (linear,
  // hetero) or of the feature dimension (glm).
  static FunctionClass linear(std::vector<std::vector<std::vector<double>>> g) {
    FunctionClass fc;
    fc.form_ = ModelForm::linear;
    fc.g_ = std::move(g);
    return fc;
  }

  // features[context][action index] — empty means phi(x,a) = a.
  static FunctionClass glm(
      std::vector<std::vector<std::vector<double>>> g,
      std::vector<LinkKind> links,
      std::vector<std::vector<std::vector<double>>> features = {}) {
    FunctionClass fc;
    fc.form_ = ModelForm::glm;
    fc.g_ = std::move(g);
    fc.links_ = std::move(links);
    fc.features_ = std::move(features);
    return fc;
  }

  static FunctionClass hetero(std::vector<std::vector<std::vector<double>>> g,
                              std::vector<LinkKind> links) {
    FunctionClass fc;
    fc.form_ = ModelForm::hetero;
    fc.g_ = std::move(g);
    fc.links_ = std::move(links);
    return fc;
  }

  ModelForm form() const { return form_; }

  int size() const {
    return static_cast<int>(form_ == ModelForm::tabular ? table_.size()
                                                        : g_.size());
  }

  // Feature vector phi(x, a) for the glm form (identity when no table).
  const std::vector<double>& feature(const ActionSpace& actions, int context,
                                     int action) const {
    if (!features_.empty()) return features_.at(context).at(action);
    return actions.vector(action);
  }

  const std::vector<double>& weight(int member, int context) const {
    return g_.at(member).at(context);
  }

  LinkKind link(int context) const { return links_.at(context); }

  const std::vector<std::vector<std::vector<double>>>& table() const {
    return table_;
  }
  const std::vector<std::vector<std::vector<double>>>& weights() const {
    return g_;
  }
  const std::vector<LinkKind>& link_kinds() const { return links_; }
  const std::vector<std::vector<std::vector<double>>>& feature_table() const {
    return features_;
  }

  double evaluate(int member, int context, int action,
                  const ActionSpace& actions) const {
    if (!actions.is_admissible(context, action))
      throw std::invalid_argument("evaluate: action " + std::to_string(action) +
                                  " inadmissible for context " +
                                  std::to_string(context));
    switch (form_) {
      case ModelForm::tabular:
        return table_.at(member).at(context).at(action);
      case ModelForm::linear:
        return dot(g_.at(member).at(context), actions.vector(action));
      case ModelForm::glm:
        return link_value(links_.at(context),
                          dot(g_.at(member).at(context),
                              feature(actions, context, action)));
      case ModelForm::hetero:
        return link_value(links_.at(context),
                          dot(g_.at(member).at(context), actions.vector(action)));
    }
    return 0.0;
  }

  // Exhaustive [0,1] range check over members x contexts x admissible actions.
  void validate(const ContextSpace& contexts, const ActionSpace& actions) const {
    const int n = size();
    if (n < 1) throw std::invalid_argument("function class: empty");
    if (form_ != ModelForm::tabular &&
        static_cast<int>(g_.size()) != n)
      throw std::invalid_argument("function class: inconsistent member count");
    if ((form_ == ModelForm::glm || form_ == ModelForm::hetero) &&
        static_cast<int>(links_.size()) != contexts.size())
      throw std::invalid_argument("function class: one link per context required");
    for (int m = 0; m < n; ++m) {
      for (int x = 0; x < contexts.size(); ++x) {
        for (int a : actions.admissible(x)) {
          const double v = evaluate(m, x, a, actions);
          if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(
                "function class: member " + std::to_string(m) + " at (x=" +
                std::to_string(x) + ", a=" + std::to_string(a) + ") maps to " +
                std::to_string(v) + ", outside [0,1]");
        }
      }
    }
  }

 private:
  static double dot(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
      throw std::invalid_argument("function class: weight/vector dim mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  }

  ModelForm form_ = ModelForm::tabular;
  std::vector<std::vector<std::vector<double>>> table_;
  std::vector<std::vector<std::vector<double>>> g_;
  std::vector<LinkKind> links_;
  std::vector<std::vector<std::vector<double>>> features_;
};

struct GroundTruth {
  int f_star_index = 0;

  void validate(const FunctionClass& fc) const {
    if (f_star_index < 0 || f_star_index >= fc.size())
      throw std::invalid_argument("ground truth index " +
                                  std::to_string(f_star_index) +
                                  " outside function class");
  }
};

// Admissible action maximizing evaluate; ties break to the smallest index.
inline int optimal_action(const FunctionClass& fc, int member, int context,
                          const ActionSpace& actions) {
  const std::vector<int> adm = actions.admissible(context);
  if (adm.empty())
    throw std::invalid_argument("optimal_action: empty admissible set");
  int best = adm[0];
  double best_v = fc.evaluate(member, context, adm[0], actions);
  for (std::size_t i = 1; i < adm.size(); ++i) {
    const double v = fc.evaluate(member, context, adm[i], actions);
    if (v > best_v) {
      best_v = v;
      best = adm[i];
    }
  }
  return best;
}

}  // namespace cfb
