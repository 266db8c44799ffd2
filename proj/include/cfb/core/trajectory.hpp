#pragma once

// Interaction records and regret accounting shared by the runner, the trace
// files, and the audit engine.

#include <cstdint>
#include <optional>
#include <vector>

namespace cfb {

// The regression estimate in force when an action was chosen: the index of
// the least-squares member and the confidence radius paired with it. Rounds
// played before any data exists carry no snapshot.
struct EstimatorSnapshot {
  int fhat = 0;
  double beta = 0.0;
};

struct Record {
  std::int64_t t = 0;  // 1-based round number
  int context = 0;
  int action = 0;
  double reward = 0.0;
  std::optional<EstimatorSnapshot> snapshot;
};

struct RegretRecord {
  std::int64_t t = 0;
  double cum_pathwise = 0.0;  // realized reward gap vs. the coupled comparator
  double cum_pseudo = 0.0;    // mean-reward gap under the ground truth
};

// Folds per-round increments into cumulative curves.
inline std::vector<RegretRecord> accumulate_regret(
    const std::vector<double>& pathwise_increments,
    const std::vector<double>& pseudo_increments) {
  std::vector<RegretRecord> out;
  out.reserve(pathwise_increments.size());
  double cp = 0.0, cq = 0.0;
  for (std::size_t i = 0; i < pathwise_increments.size(); ++i) {
    cp += pathwise_increments[i];
    cq += pseudo_increments[i];
    out.push_back({static_cast<std::int64_t>(i + 1), cp, cq});
  }
  return out;
}

}  // namespace cfb
