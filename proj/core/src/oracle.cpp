#include "neyman2k/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace neyman2k {

namespace {

constexpr unsigned __int128 kUint64Max = std::numeric_limits<std::uint64_t>::max();

struct SaturatingCount {
  std::uint64_t value = 0;
  bool saturated = false;
};

SaturatingCount count_assignments_saturating(const Design& design) {
  // Build the multinomial as a product of binomials; every intermediate
  // division is exact.
  unsigned __int128 total = 1;
  std::int64_t placed = 0;
  for (int size : design.arm_sizes) {
    for (int i = 1; i <= size; ++i) {
      const unsigned __int128 numerator = static_cast<std::uint64_t>(placed + i);
      if (total > (~static_cast<unsigned __int128>(0)) / numerator) {
        return {std::numeric_limits<std::uint64_t>::max(), true};
      }
      total = total * numerator / static_cast<std::uint64_t>(i);
    }
    placed += size;
  }
  if (total > kUint64Max) {
    return {std::numeric_limits<std::uint64_t>::max(), true};
  }
  return {static_cast<std::uint64_t>(total), false};
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  const __int128 product = static_cast<__int128>(a / std::gcd(a, b)) * b;
  if (product > std::numeric_limits<std::int64_t>::max()) {
    throw std::overflow_error("arm-size least common multiple overflows");
  }
  return static_cast<std::int64_t>(product);
}

}  // namespace

std::uint64_t count_assignments(const Design& design) {
  const SaturatingCount count = count_assignments_saturating(design);
  if (count.saturated) {
    throw std::overflow_error("assignment count exceeds 2^64-1");
  }
  return count.value;
}

AssignmentEnumerator::AssignmentEnumerator(const Design& design,
                                           std::uint64_t cap) {
  const SaturatingCount count = count_assignments_saturating(design);
  if (count.saturated || count.value > cap) {
    throw EnumerationCapError(
        "assignment enumeration refused: " +
            (count.saturated ? std::string("more than 2^64-1")
                             : std::to_string(count.value)) +
            " assignments exceed the cap of " + std::to_string(cap),
        count.value, !count.saturated);
  }
  current_.reserve(design.units);
  for (int arm = 0; arm < design.arms(); ++arm) {
    current_.insert(current_.end(), design.arm_sizes[arm], arm);
  }
}

bool AssignmentEnumerator::next(Assignment& out) {
  if (done_) {
    return false;
  }
  if (first_) {
    first_ = false;
  } else if (!std::next_permutation(current_.begin(), current_.end())) {
    done_ = true;
    return false;
  }
  out.arm_of = current_;
  return true;
}

RandomizationMoments exact_randomization_moments(
    const PotentialOutcomeTable& table, const ModelMatrix& matrix,
    const Design& design, int effect, std::uint64_t cap) {
  if (table.arms() != matrix.arms() || table.arms() != design.arms()) {
    throw std::invalid_argument("table, matrix and design arm counts differ");
  }
  if (table.units() != design.units) {
    throw std::invalid_argument("table and design unit counts differ");
  }
  if (effect < 1 || effect >= matrix.arms()) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }

  const int arms = table.arms();
  const auto& column = matrix.column(effect);

  // Common denominators keep the per-assignment statistics integral:
  //   tau_hat        = sum_j h_j nobs_j (L/n_j)          over  2^{K-1} L
  //   classic var.   = sum_j nobs_j (n_j - nobs_j) v_j   over  4^{K-1} M
  // with L = lcm n_j and M = lcm n_j^2 (n_j - 1).
  std::int64_t size_lcm = 1;
  std::int64_t var_lcm = 1;
  for (int arm = 0; arm < arms; ++arm) {
    const std::int64_t n = design.arm_sizes[arm];
    size_lcm = checked_lcm(size_lcm, n);
    var_lcm = checked_lcm(var_lcm, n * n * (n - 1));
  }
  std::vector<std::int64_t> estimate_weight(arms);
  std::vector<std::int64_t> variance_weight(arms);
  for (int arm = 0; arm < arms; ++arm) {
    const std::int64_t n = design.arm_sizes[arm];
    estimate_weight[arm] = column[arm] * (size_lcm / n);
    variance_weight[arm] = var_lcm / (n * n * (n - 1));
  }

  __int128 sum = 0;
  __int128 sum_squares = 0;
  __int128 sum_classic = 0;
  std::uint64_t draws = 0;

  AssignmentEnumerator enumerator(design, cap);
  Assignment assignment;
  std::vector<std::int64_t> successes(arms);
  while (enumerator.next(assignment)) {
    std::fill(successes.begin(), successes.end(), 0);
    for (int unit = 0; unit < table.units(); ++unit) {
      const int arm = assignment.arm_of[unit];
      successes[arm] += table.outcome(unit, arm);
    }
    std::int64_t estimate_numerator = 0;
    std::int64_t classic_numerator = 0;
    for (int arm = 0; arm < arms; ++arm) {
      estimate_numerator += estimate_weight[arm] * successes[arm];
      classic_numerator += variance_weight[arm] * successes[arm] *
                           (design.arm_sizes[arm] - successes[arm]);
    }
    sum += estimate_numerator;
    sum_squares += static_cast<__int128>(estimate_numerator) * estimate_numerator;
    sum_classic += classic_numerator;
    ++draws;
  }

  const __int128 estimate_denominator =
      static_cast<__int128>(size_lcm) << (matrix.factors() - 1);
  const __int128 classic_denominator = static_cast<__int128>(var_lcm)
                                       << (2 * (matrix.factors() - 1));
  const __int128 count = draws;

  RandomizationMoments moments;
  moments.estimate_mean = rational_from_int128(sum) /
                          rational_from_int128(count * estimate_denominator);
  // Var = E[X^2] - E[X]^2, evaluated over the uniform distribution on all
  // assignments.
  moments.estimate_variance =
      rational_from_int128(count * sum_squares - sum * sum) /
      (rational_from_int128(count * estimate_denominator) *
       rational_from_int128(count * estimate_denominator));
  moments.classic_estimator_mean =
      rational_from_int128(sum_classic) /
      rational_from_int128(count * classic_denominator);
  return moments;
}

MarginSpec::MarginSpec(int units, std::vector<std::int64_t> margins)
    : units(units), margins(std::move(margins)) {
  if (units < 1) {
    throw std::invalid_argument("margin spec requires at least one unit");
  }
  if (this->margins.empty()) {
    throw std::invalid_argument("margin spec requires at least one arm");
  }
  for (std::int64_t margin : this->margins) {
    if (margin < 0 || margin > units) {
      throw std::invalid_argument("margins must lie in [0, N]");
    }
  }
}

Rational MarginSpec::tau_bar(const ModelMatrix& matrix, int effect) const {
  if (matrix.arms() != arms()) {
    throw std::invalid_argument("margin spec and model matrix arms differ");
  }
  if (effect < 1 || effect >= matrix.arms()) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }
  const auto& column = matrix.column(effect);
  std::int64_t signed_margin = 0;
  for (int arm = 0; arm < arms(); ++arm) {
    signed_margin += column[arm] * margins[arm];
  }
  return make_rational(signed_margin,
                       static_cast<std::int64_t>(units)
                           << (matrix.factors() - 1));
}

namespace {

// Couplings are multisets of unit rows: counts over the 2^J binary row
// patterns subject to the J margin constraints. The search walks patterns
// from all-ones down; pattern 0 absorbs the remaining units.
class CouplingSearch {
 public:
  CouplingSearch(const MarginSpec& spec, std::uint64_t cap,
                 const std::function<void(const PotentialOutcomeTable&)>* visit)
      : spec_(spec), cap_(cap), visit_(visit), arms_(spec.arms()) {
    if (arms_ > 8) {
      throw std::invalid_argument(
          "coupling enumeration supports at most 8 arms");
    }
    remaining_ = spec.margins;
    pattern_counts_.assign(std::size_t{1} << arms_, 0);
  }

  std::uint64_t run() {
    descend((1 << arms_) - 1, spec_.units);
    return found_;
  }

 private:
  void descend(int pattern, int units_left) {
    for (int arm = 0; arm < arms_; ++arm) {
      if (remaining_[arm] > units_left) {
        return;  // not enough units left to meet this margin
      }
      // Patterns in [1, pattern] cover arm j only if 2^j <= pattern.
      if (remaining_[arm] > 0 && (std::int64_t{1} << arm) > pattern) {
        return;
      }
    }
    if (pattern == 0) {
      pattern_counts_[0] = units_left;
      record();
      return;
    }
    std::int64_t max_count = units_left;
    for (int arm = 0; arm < arms_; ++arm) {
      if (pattern & (1 << arm)) {
        max_count = std::min(max_count, remaining_[arm]);
      }
    }
    for (std::int64_t count = 0; count <= max_count; ++count) {
      pattern_counts_[pattern] = count;
      for (int arm = 0; arm < arms_; ++arm) {
        if (pattern & (1 << arm)) {
          remaining_[arm] -= count;
        }
      }
      descend(pattern - 1, units_left - static_cast<int>(count));
      for (int arm = 0; arm < arms_; ++arm) {
        if (pattern & (1 << arm)) {
          remaining_[arm] += count;
        }
      }
    }
    pattern_counts_[pattern] = 0;
  }

  void record() {
    ++found_;
    if (found_ > cap_) {
      throw EnumerationCapError(
          "coupling enumeration refused: at least " + std::to_string(found_) +
              " couplings exceed the cap of " + std::to_string(cap_),
          found_, false);
    }
    if (visit_ == nullptr) {
      return;
    }
    std::vector<std::uint8_t> outcomes;
    outcomes.reserve(static_cast<std::size_t>(spec_.units) * arms_);
    for (int pattern = (1 << arms_) - 1; pattern >= 0; --pattern) {
      for (std::int64_t copy = 0; copy < pattern_counts_[pattern]; ++copy) {
        for (int arm = 0; arm < arms_; ++arm) {
          outcomes.push_back((pattern >> arm) & 1);
        }
      }
    }
    PotentialOutcomeTable table(spec_.units, arms_, std::move(outcomes));
    (*visit_)(table);
  }

  const MarginSpec& spec_;
  std::uint64_t cap_;
  const std::function<void(const PotentialOutcomeTable&)>* visit_;
  int arms_;
  std::vector<std::int64_t> remaining_;
  std::vector<std::int64_t> pattern_counts_;
  std::uint64_t found_ = 0;
};

}  // namespace

std::uint64_t count_couplings(const MarginSpec& spec, std::uint64_t cap) {
  CouplingSearch search(spec, cap, nullptr);
  return search.run();
}

void for_each_coupling(const MarginSpec& spec,
                       const std::function<void(const PotentialOutcomeTable&)>& visit,
                       std::uint64_t cap) {
  count_couplings(spec, cap);  // refuse before emitting anything
  CouplingSearch search(spec, cap, &visit);
  search.run();
}

SharpnessResult min_s2_over_couplings(const MarginSpec& spec,
                                      const ModelMatrix& matrix, int effect,
                                      std::uint64_t cap) {
  if (spec.units < 2) {
    throw std::invalid_argument("effect variance requires at least two units");
  }
  bool have_result = false;
  Rational minimum;
  std::vector<std::uint8_t> witness_outcomes;
  for_each_coupling(
      spec,
      [&](const PotentialOutcomeTable& table) {
        const Rational value = s2_effect_direct(table, matrix, effect);
        if (!have_result || value < minimum) {
          have_result = true;
          minimum = value;
          witness_outcomes.clear();
          for (int unit = 0; unit < table.units(); ++unit) {
            const auto row = table.row(unit);
            witness_outcomes.insert(witness_outcomes.end(), row.begin(),
                                    row.end());
          }
        }
      },
      cap);
  // Margins always admit at least one coupling, so a result exists.
  return {minimum, PotentialOutcomeTable(spec.units, spec.arms(),
                                         std::move(witness_outcomes))};
}

SplitCounts split_counts(const PotentialOutcomeTable& table,
                         const ModelMatrix& matrix, int unit, int effect) {
  if (table.arms() != matrix.arms()) {
    throw std::invalid_argument("table and model matrix arm counts differ");
  }
  if (unit < 0 || unit >= table.units()) {
    throw std::invalid_argument("unit index out of range");
  }
  if (effect < 1 || effect >= matrix.arms()) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }
  const auto& column = matrix.column(effect);
  SplitCounts counts;
  for (int arm = 0; arm < table.arms(); ++arm) {
    if (column[arm] < 0) {
      counts.minus_sum += table.outcome(unit, arm);
    } else {
      counts.plus_sum += table.outcome(unit, arm);
    }
  }
  return counts;
}

CountInequalityReport verify_count_inequality(const PotentialOutcomeTable& table,
                                              const ModelMatrix& matrix,
                                              int effect) {
  const JointCounts counts = compute_joint_counts(table);
  const auto& column = matrix.column(effect);

  CountInequalityReport report;
  std::int64_t signed_margin = 0;
  for (int a = 0; a < table.arms(); ++a) {
    report.lhs += counts.margins[a];
    signed_margin += column[a] * counts.margins[a];
    for (int b = 0; b < table.arms(); ++b) {
      if (a != b) {
        report.lhs += column[a] * column[b] * counts.pair(a, b);
      }
    }
  }
  report.rhs = std::abs(signed_margin);
  report.holds = report.lhs >= report.rhs;
  report.equality = report.lhs == report.rhs;
  report.condition = boundary_condition(table, matrix, effect);

  report.per_unit_ok = true;
  for (int unit = 0; unit < table.units(); ++unit) {
    const SplitCounts split = split_counts(table, matrix, unit, effect);
    const std::int64_t minus = split.minus_sum;
    const std::int64_t plus = split.plus_sum;
    if (2 * minus + minus * (minus - 1) + plus * (plus - 1) <
        2 * minus * plus) {
      report.per_unit_ok = false;
      break;
    }
  }
  return report;
}

}  // namespace neyman2k
