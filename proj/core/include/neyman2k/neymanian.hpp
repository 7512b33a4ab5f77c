#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neyman2k/design_matrix.hpp"
#include "neyman2k/finite_population.hpp"

namespace neyman2k {

/// A complete-randomization design: fixed arm sizes summing to the unit
/// count. The arm count must be a power of two (J = 2^K, K >= 1) and every
/// arm needs at least two units so that within-arm variances exist.
struct Design {
  Design(int units, std::vector<int> arm_sizes);

  int arms() const { return static_cast<int>(arm_sizes.size()); }

  int units;
  std::vector<int> arm_sizes;
};

/// arm_of[i] is the (zero-based) arm unit i is assigned to.
struct Assignment {
  std::vector<std::int32_t> arm_of;

  bool operator==(const Assignment&) const = default;
};

/// Uniform draw over all N!/(prod n_j!) assignments; deterministic given
/// the seed.
Assignment complete_randomization(const Design& design, std::uint64_t seed);

/// Per-arm sufficient statistic of an experiment with binary outcomes.
class ObservedData {
 public:
  struct Arm {
    int assigned = 0;   // n_j
    int successes = 0;  // n_j^obs
  };

  explicit ObservedData(std::vector<Arm> arms);

  int arms() const { return static_cast<int>(arms_.size()); }
  int units() const { return units_; }  // sum of n_j
  const Arm& arm(int index) const { return arms_[index]; }

  double p_hat(int arm) const {
    return static_cast<double>(arms_[arm].successes) / arms_[arm].assigned;
  }

 private:
  std::vector<Arm> arms_;
  int units_ = 0;
};

/// Reveal the observed outcome of each unit under its assigned arm and
/// aggregate to per-arm success counts.
ObservedData observe(const PotentialOutcomeTable& table,
                     const Assignment& assignment);

/// tau_hat_l = 2^{-(K-1)} h_l' p_hat for l = 1..J-1 (index l-1 in the
/// result).
std::vector<double> estimate_effects(const ObservedData& observed,
                                     const ModelMatrix& matrix);

/// The plug-in variance estimator 2^{-2(K-1)} sum_j p_hat_j(1-p_hat_j)/(n_j-1).
/// Identical for every effect index.
double variance_classic(const ObservedData& observed, int factors);

/// Estimated sharp lower bound on the unidentifiable effect-variance term:
/// (N-1)^{-1} max{ 2^{-(K-1)} |tau_hat| - tau_hat^2, 0 }. Non-negative.
double improvement_correction(double tau_hat, int factors, int units);

struct ImprovedVariance {
  double value = 0.0;
  /// True when the correction exceeded the classic estimate and the result
  /// was clamped to zero.
  bool clamped = false;
};

/// Classic estimate minus the correction, clamped at zero.
ImprovedVariance variance_improved(double var_classic, double tau_hat,
                                   int factors, int units);

/// Inverse standard-normal CDF, accurate to about 1e-15 over (0,1).
double normal_quantile(double p);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// estimate +/- z_{(1+level)/2} * sqrt(variance). Requires variance >= 0
/// and level strictly inside (0,1).
Interval wald_interval(double estimate, double variance, double level);

/// One row of an analysis report.
struct EffectAnalysis {
  std::string label;
  double estimate = 0.0;
  double var_classic = 0.0;
  double correction = 0.0;
  double var_improved = 0.0;
  bool clamped = false;
  double level = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

/// Full per-effect analysis; intervals use the improved variance.
std::vector<EffectAnalysis> analyze(const ObservedData& observed,
                                    const ModelMatrix& matrix,
                                    double level = 0.95);

}  // namespace neyman2k
