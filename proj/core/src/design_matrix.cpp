#include "neyman2k/design_matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace neyman2k {

std::vector<std::vector<int>> subset_order(int factors) {
  std::vector<std::vector<int>> subsets;
  if (factors < 2) {
    return subsets;
  }
  for (unsigned mask = 0; mask < (1u << factors); ++mask) {
    if (__builtin_popcount(mask) < 2) {
      continue;
    }
    std::vector<int> subset;
    for (int k = 1; k <= factors; ++k) {
      if (mask & (1u << (k - 1))) {
        subset.push_back(k);
      }
    }
    subsets.push_back(std::move(subset));
  }
  std::sort(subsets.begin(), subsets.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) {
                return a.size() < b.size();
              }
              return a < b;  // elements are stored sorted ascending
            });
  return subsets;
}

ModelMatrix::ModelMatrix(int factors, int max_factors) : factors_(factors) {
  if (factors < 1) {
    throw std::invalid_argument("factor count must be at least 1");
  }
  if (factors > max_factors) {
    throw std::invalid_argument("factor count exceeds the configured cap of " +
                                std::to_string(max_factors));
  }
  const int arms = 1 << factors;
  columns_.assign(arms, std::vector<std::int8_t>(arms, 1));

  // Main-effect column k: -1 for 2^{K-k} rows, then +1 for as many,
  // repeated 2^{k-1} times.
  for (int k = 1; k <= factors; ++k) {
    const int block = 1 << (factors - k);
    for (int row = 0; row < arms; ++row) {
      columns_[k][row] = ((row / block) % 2 == 0) ? -1 : 1;
    }
  }

  const auto subsets = subset_order(factors);
  for (std::size_t t = 0; t < subsets.size(); ++t) {
    auto& column = columns_[factors + 1 + t];
    for (int row = 0; row < arms; ++row) {
      int product = 1;
      for (int k : subsets[t]) {
        product *= columns_[k][row];
      }
      column[row] = static_cast<std::int8_t>(product);
    }
  }

  labels_.reserve(arms - 1);
  for (int k = 1; k <= factors; ++k) {
    labels_.push_back(std::to_string(k));
  }
  for (const auto& subset : subsets) {
    std::string label;
    for (int k : subset) {
      label += std::to_string(k);
    }
    labels_.push_back(std::move(label));
  }
}

std::vector<TreatmentCombination> ModelMatrix::treatment_combinations() const {
  const int arm_count = arms();
  std::vector<TreatmentCombination> combinations(arm_count);
  for (int row = 0; row < arm_count; ++row) {
    auto& levels = combinations[row].levels;
    levels.resize(factors_);
    for (int k = 1; k <= factors_; ++k) {
      levels[k - 1] = columns_[k][row];
    }
  }
  return combinations;
}

const std::string& ModelMatrix::effect_label(int column) const {
  if (column < 1 || column >= arms()) {
    throw std::invalid_argument("effect column index out of range");
  }
  return labels_[column - 1];
}

}  // namespace neyman2k
