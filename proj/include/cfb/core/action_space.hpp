#pragma once

// Action spaces: either a plain finite set of K indexed arms, or a finite
// grid of d-dimensional vectors (the exhaustive-scan realization of the
// action maximization oracle). A grid may carry per-context restrictions
// (heterogeneous admissible sets A(x)); actions are always referred to by
// their global index.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfb {

enum class ActionKind { finite, grid };

class ActionSpace {
 public:
  ActionSpace() = default;

  static ActionSpace finite(int k) {
    if (k < 1) throw std::invalid_argument("action space: K must be >= 1");
    ActionSpace s;
    s.kind_ = ActionKind::finite;
    s.count_ = k;
    return s;
  }

  static ActionSpace grid(std::vector<std::vector<double>> vectors,
                          std::map<int, std::vector<int>> restrictions = {}) {
    if (vectors.empty())
      throw std::invalid_argument("action space: empty grid");
    const std::size_t d = vectors[0].size();
    if (d < 1) throw std::invalid_argument("action space: zero-dim vectors");
    for (const auto& v : vectors)
      if (v.size() != d)
        throw std::invalid_argument("action space: mixed vector dimensions");
    for (const auto& [ctx, idxs] : restrictions) {
      if (idxs.empty())
        throw std::invalid_argument("action space: empty restriction for context " +
                                    std::to_string(ctx));
      for (int i : idxs)
        if (i < 0 || i >= static_cast<int>(vectors.size()))
          throw std::invalid_argument("action space: restriction index out of range");
    }
    ActionSpace s;
    s.kind_ = ActionKind::grid;
    s.count_ = static_cast<int>(vectors.size());
    s.vectors_ = std::move(vectors);
    s.restrictions_ = std::move(restrictions);
    return s;
  }

  ActionKind kind() const { return kind_; }
  int total_count() const { return count_; }
  int dim() const {
    return kind_ == ActionKind::grid ? static_cast<int>(vectors_[0].size()) : 0;
  }

  const std::vector<double>& vector(int index) const {
    if (kind_ != ActionKind::grid)
      throw std::invalid_argument("action space: no vectors on finite kind");
    return vectors_.at(index);
  }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }

  // Admissible action indices for a context, in ascending index order.
  std::vector<int> admissible(int context) const {
    auto it = restrictions_.find(context);
    if (kind_ == ActionKind::grid && it != restrictions_.end()) {
      std::vector<int> idxs = it->second;
      std::sort(idxs.begin(), idxs.end());
      return idxs;
    }
    std::vector<int> all(count_);
    for (int i = 0; i < count_; ++i) all[i] = i;
    return all;
  }

  bool is_admissible(int context, int action) const {
    if (action < 0 || action >= count_) return false;
    auto it = restrictions_.find(context);
    if (kind_ == ActionKind::grid && it != restrictions_.end()) {
      for (int i : it->second)
        if (i == action) return true;
      return false;
    }
    return true;
  }

  bool has_restrictions() const { return !restrictions_.empty(); }
  const std::map<int, std::vector<int>>& restrictions() const {
    return restrictions_;
  }

 private:
  ActionKind kind_ = ActionKind::finite;
  int count_ = 0;
  std::vector<std::vector<double>> vectors_;
  std::map<int, std::vector<int>> restrictions_;
};

}  // namespace cfb
