#pragma once

// Offline least-squares over a finite function class, incrementalized: each
// member keeps a running sum of squared errors over the logged history, and
// the fit is the smallest-index member attaining the minimal SSE.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/core/action_space.hpp"
#include "cfb/core/function_class.hpp"

namespace cfb {

inline constexpr double kSseTieTol = 1e-12;

class SseTable {
 public:
  SseTable() = default;

  SseTable(const FunctionClass* fclass, const ActionSpace* actions)
      : fclass_(fclass), actions_(actions), sse_(fclass->size(), 0.0) {}

  void update(int context, int action, double reward) {
    if (!(reward >= 0.0 && reward <= 1.0))
      throw std::invalid_argument("sse update: reward " +
                                  std::to_string(reward) + " outside [0,1]");
    for (int m = 0; m < static_cast<int>(sse_.size()); ++m) {
      const double e = fclass_->evaluate(m, context, action, *actions_) - reward;
      sse_[m] += e * e;
    }
    ++rounds_;
  }

  // Smallest index among members whose SSE is within 1e-12 (absolute) of the
  // minimum, so the tie-break is stable across accumulation orders.
  int least_squares() const {
    double best = sse_[0];
    for (double v : sse_)
      if (v < best) best = v;
    for (int m = 0; m < static_cast<int>(sse_.size()); ++m)
      if (sse_[m] <= best + kSseTieTol) return m;
    return 0;
  }

  double sse(int member) const { return sse_.at(member); }
  std::int64_t rounds() const { return rounds_; }
  int members() const { return static_cast<int>(sse_.size()); }

 private:
  const FunctionClass* fclass_ = nullptr;
  const ActionSpace* actions_ = nullptr;
  std::vector<double> sse_;
  std::int64_t rounds_ = 0;
};

}  // namespace cfb
