#pragma once

// Finite context space with explicit draw probabilities. Finite-with-known-
// probabilities is what makes the expectation audits exact (sums over X
// instead of Monte-Carlo).

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace cfb {

struct ContextSpace {
  std::vector<std::string> descriptors;  // unique labels
  std::vector<double> probabilities;     // nonnegative, sums to 1 (1e-12)

  ContextSpace() = default;
  ContextSpace(std::vector<std::string> names, std::vector<double> probs)
      : descriptors(std::move(names)), probabilities(std::move(probs)) {
    validate();
  }

  int size() const { return static_cast<int>(descriptors.size()); }

  void validate() const {
    if (descriptors.empty())
      throw std::invalid_argument("context space: empty");
    if (descriptors.size() != probabilities.size())
      throw std::invalid_argument(
          "context space: descriptor/probability size mismatch");
    std::unordered_set<std::string> seen;
    double sum = 0.0;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
      if (!seen.insert(descriptors[i]).second)
        throw std::invalid_argument("context space: duplicate descriptor '" +
                                    descriptors[i] + "'");
      if (probabilities[i] < 0.0)
        throw std::invalid_argument("context space: negative probability at " +
                                    std::to_string(i));
      sum += probabilities[i];
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("context space: probabilities sum to " +
                                  std::to_string(sum) + ", expected 1");
  }
};

}  // namespace cfb
