#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "neyman2k/finite_population.hpp"
#include "neyman2k/neymanian.hpp"
#include "neyman2k/rational.hpp"

namespace neyman2k {

// Exhaustive-enumeration ground truth. Everything in this module is exact
// integer or rational arithmetic; a floating-point comparison here would be
// a defect. Enumerations refuse loudly when they would exceed their cap --
// an oracle that silently samples is not an oracle.

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Thrown when an enumeration would exceed its configured cap. `count` is
/// the exact cardinality when `exact`, otherwise a lower bound establishing
/// the refusal.
class EnumerationCapError : public std::runtime_error {
 public:
  EnumerationCapError(const std::string& what, std::uint64_t count, bool exact)
      : std::runtime_error(what), count_(count), exact_(exact) {}

  std::uint64_t count() const { return count_; }
  bool exact() const { return exact_; }

 private:
  std::uint64_t count_;
  bool exact_;
};

/// N! / prod n_j!, the number of distinct assignments. Throws
/// std::overflow_error beyond 2^64-1.
std::uint64_t count_assignments(const Design& design);

/// Streams every assignment exactly once, in lexicographic order of the
/// arm_of vector.
class AssignmentEnumerator {
 public:
  explicit AssignmentEnumerator(const Design& design,
                                std::uint64_t cap = kDefaultEnumerationCap);

  /// Fills `out` with the next assignment; false when exhausted.
  bool next(Assignment& out);

 private:
  std::vector<std::int32_t> current_;
  bool first_ = true;
  bool done_ = false;
};

struct RandomizationMoments {
  Rational estimate_mean;           // equals tau_bar_l
  Rational estimate_variance;      // the true sampling variance
  Rational classic_estimator_mean;  // exceeds the variance by S^2/N
};

/// Exact first and second moments of the effect estimator, and the exact
/// mean of the classic variance estimator, over the full randomization
/// distribution.
RandomizationMoments exact_randomization_moments(
    const PotentialOutcomeTable& table, const ModelMatrix& matrix,
    const Design& design, int effect,
    std::uint64_t cap = kDefaultEnumerationCap);

/// Per-arm margins a joint table must reproduce.
struct MarginSpec {
  MarginSpec(int units, std::vector<std::int64_t> margins);

  int arms() const { return static_cast<int>(margins.size()); }

  /// The average effect is identified by the margins alone.
  Rational tau_bar(const ModelMatrix& matrix, int effect) const;

  int units;
  std::vector<std::int64_t> margins;
};

/// Number of joint tables (as multisets of unit rows -- every derived
/// quantity is invariant under unit permutation) consistent with the
/// margins.
std::uint64_t count_couplings(const MarginSpec& spec,
                              std::uint64_t cap = kDefaultEnumerationCap);

/// Visits each margin-consistent coupling exactly once. Counts first and
/// refuses if the cap would be exceeded.
void for_each_coupling(const MarginSpec& spec,
                       const std::function<void(const PotentialOutcomeTable&)>& visit,
                       std::uint64_t cap = kDefaultEnumerationCap);

struct SharpnessResult {
  Rational minimum;
  PotentialOutcomeTable witness;
};

/// Minimum of the effect variance over all couplings with the given
/// margins, together with a table attaining it.
SharpnessResult min_s2_over_couplings(const MarginSpec& spec,
                                      const ModelMatrix& matrix, int effect,
                                      std::uint64_t cap = kDefaultEnumerationCap);

/// Success counts of one unit split by the sign of the contrast column:
/// minus_sum counts arms with h = -1, plus_sum arms with h = +1. Both lie
/// in [0, J/2] and plus_sum - minus_sum = 2^{K-1} tau_il.
struct SplitCounts {
  int minus_sum = 0;
  int plus_sum = 0;
};

SplitCounts split_counts(const PotentialOutcomeTable& table,
                         const ModelMatrix& matrix, int unit, int effect);

/// The quadratic count bound behind the sharp lower bound:
///   lhs = sum_j N_j + sum_{j != j'} h_j h_j' N_{jj'}
///   rhs = | sum_j h_j N_j |
/// lhs >= rhs always, with equality exactly when the boundary condition
/// holds; per_unit_ok reports the unit-level inequality
/// 2L- + L-(L- - 1) + L+(L+ - 1) >= 2 L- L+ for every unit.
struct CountInequalityReport {
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;
  bool holds = false;
  bool equality = false;
  bool per_unit_ok = false;
  EffectSupport condition = EffectSupport::kNone;
};

CountInequalityReport verify_count_inequality(const PotentialOutcomeTable& table,
                                              const ModelMatrix& matrix,
                                              int effect);

}  // namespace neyman2k
