#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace neyman2k {

/// Report and enumeration sizes grow as 4^K, so the factor count is capped
/// by default; callers with patience can raise the cap.
inline constexpr int kMaxFactorsDefault = 8;

/// One treatment combination: K factor levels, each -1 or +1.
struct TreatmentCombination {
  std::vector<std::int8_t> levels;

  bool operator==(const TreatmentCombination&) const = default;
};

/// All subsets of {1..factors} with at least two elements, ordered first by
/// cardinality and then lexicographically. Empty for factors < 2.
std::vector<std::vector<int>> subset_order(int factors);

/// The J x J contrast matrix of a 2^K design, J = 2^K. Column 0 is the
/// all-ones intercept; columns 1..K are the main-effect contrasts; the
/// remaining columns are entry-wise products of main-effect columns, in
/// subset_order. Immutable after construction and safe to share across
/// threads.
class ModelMatrix {
 public:
  explicit ModelMatrix(int factors, int max_factors = kMaxFactorsDefault);

  int factors() const { return factors_; }  // K
  int arms() const { return static_cast<int>(columns_.size()); }  // J
  int effects() const { return arms() - 1; }

  /// Entry of contrast column `column` at (zero-based) row `row`; always
  /// -1 or +1. Rows print one-based as z_1..z_J.
  int entry(int column, int row) const { return columns_[column][row]; }

  const std::vector<std::int8_t>& column(int column) const {
    return columns_[column];
  }

  /// Row j of the (h_1..h_K) sub-matrix, for every j. The J rows are
  /// pairwise distinct and enumerate {-1,+1}^K.
  std::vector<TreatmentCombination> treatment_combinations() const;

  /// Human-readable effect names for columns 1..J-1: "1".."K" for main
  /// effects, concatenated factor ids ("12", "123", ...) for interactions.
  const std::vector<std::string>& effect_labels() const { return labels_; }

  const std::string& effect_label(int column) const;

 private:
  int factors_;
  std::vector<std::vector<std::int8_t>> columns_;
  std::vector<std::string> labels_;
};

}  // namespace neyman2k
