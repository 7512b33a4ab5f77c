#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neyman2k/design_matrix.hpp"
#include "neyman2k/rational.hpp"

namespace neyman2k {

/// The full science table: one binary potential outcome per (unit, arm).
/// Immutable; every derived quantity is a pure function of it, so instances
/// are safe to share across threads.
class PotentialOutcomeTable {
 public:
  /// `outcomes` is row-major with `units` rows and `arms` columns; every
  /// entry must be 0 or 1.
  PotentialOutcomeTable(int units, int arms, std::vector<std::uint8_t> outcomes);

  static PotentialOutcomeTable from_rows(const std::vector<std::vector<int>>& rows);

  int units() const { return units_; }  // N
  int arms() const { return arms_; }    // J

  int outcome(int unit, int arm) const { return outcomes_[unit * arms_ + arm]; }

  std::span<const std::uint8_t> row(int unit) const {
    return {outcomes_.data() + static_cast<std::size_t>(unit) * arms_,
            static_cast<std::size_t>(arms_)};
  }

 private:
  int units_;
  int arms_;
  std::vector<std::uint8_t> outcomes_;
};

/// Success counts identifiable from the science table: per-arm margins and
/// pairwise joint counts, which is all the closed-form variance decomposition
/// consumes. Higher-order counts are available through joint_count.
struct JointCounts {
  int units = 0;
  std::vector<std::int64_t> margins;   // count of ones per arm
  std::vector<std::int64_t> pairwise;  // arms x arms, row-major, symmetric

  std::int64_t pair(int arm_a, int arm_b) const {
    return pairwise[arm_a * static_cast<int>(margins.size()) + arm_b];
  }

  /// p_j = N_j / N.
  Rational proportion(int arm) const;
};

JointCounts compute_joint_counts(const PotentialOutcomeTable& table);

/// Number of units whose outcome is 1 under every arm in `arms`
/// (zero-based indices). Throws std::invalid_argument for an empty subset
/// or an out-of-range index.
std::int64_t joint_count(const PotentialOutcomeTable& table,
                         std::span<const int> arms);

/// Unit-level and average factorial effects, exact. Effect l lives on
/// contrast column l of the model matrix, l in 1..J-1.
class EffectTable {
 public:
  EffectTable(int units, int effects, std::vector<Rational> individual,
              std::vector<Rational> average);

  int units() const { return units_; }
  int effects() const { return effects_; }

  const Rational& tau(int unit, int effect) const {
    return individual_[unit * effects_ + (effect - 1)];
  }
  const Rational& tau_bar(int effect) const { return average_[effect - 1]; }

 private:
  int units_;
  int effects_;
  std::vector<Rational> individual_;
  std::vector<Rational> average_;
};

EffectTable population_effects(const PotentialOutcomeTable& table,
                               const ModelMatrix& matrix);

/// Finite-population variance of the outcomes under one arm:
/// N/(N-1) * p_j (1 - p_j). Requires at least two units.
Rational s2_arm(const PotentialOutcomeTable& table, int arm);

/// Variance of the unit-level effects, straight from its definition:
/// (N-1)^{-1} sum_i (tau_il - tau_bar_l)^2.
Rational s2_effect_direct(const PotentialOutcomeTable& table,
                          const ModelMatrix& matrix, int effect);

/// The same variance evaluated through the margin/pairwise-count closed
/// form; must agree with s2_effect_direct on every table.
Rational s2_effect_counts(const PotentialOutcomeTable& table,
                          const ModelMatrix& matrix, int effect);
Rational s2_effect_counts(const JointCounts& counts, const ModelMatrix& matrix,
                          int effect);

/// Sharp lower bound for the effect variance given only the margins:
/// N/(N-1) * max{ 2^{-(K-1)} |tau_bar| - tau_bar^2, 0 }.
Rational sharp_lower_bound(const Rational& tau_bar, int factors, int units);

/// Support pattern of the unit-level effects that characterises when the
/// sharp bound is attained. `step` is 2^{-(K-1)}, the smallest non-zero
/// effect magnitude.
enum class EffectSupport {
  kNone,            // bound not attained
  kZeroOrMinusStep, // every tau_il in {0, -step}; at K=1, Y(+1) <= Y(-1)
  kZeroOrPlusStep,  // every tau_il in {0, +step}; at K=1, Y(+1) >= Y(-1)
  kAllZero,         // both of the above: all unit effects vanish
};

EffectSupport boundary_condition(const PotentialOutcomeTable& table,
                                 const ModelMatrix& matrix, int effect);

/// Sampling variance of the effect estimator under complete randomization
/// with the given arm sizes:
/// 2^{-2(K-1)} sum_j S_j^2 / n_j  -  S^2(tau_bar_l) / N.
Rational true_sampling_variance(const PotentialOutcomeTable& table,
                                const ModelMatrix& matrix,
                                std::span<const int> arm_sizes, int effect);

}  // namespace neyman2k
