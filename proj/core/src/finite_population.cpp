#include "neyman2k/finite_population.hpp"

#include <stdexcept>
#include <string>

namespace neyman2k {

namespace {

void check_effect_index(const ModelMatrix& matrix, int effect) {
  if (effect < 1 || effect >= matrix.arms()) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }
}

void check_same_arms(const PotentialOutcomeTable& table,
                     const ModelMatrix& matrix) {
  if (table.arms() != matrix.arms()) {
    throw std::invalid_argument("table and model matrix arm counts differ");
  }
}

/// h_l' Y_i as an integer; tau_il equals this over 2^{K-1}.
int effect_dot(const PotentialOutcomeTable& table, const ModelMatrix& matrix,
               int unit, int effect) {
  const auto& column = matrix.column(effect);
  int dot = 0;
  for (int arm = 0; arm < table.arms(); ++arm) {
    dot += column[arm] * table.outcome(unit, arm);
  }
  return dot;
}

}  // namespace

PotentialOutcomeTable::PotentialOutcomeTable(int units, int arms,
                                             std::vector<std::uint8_t> outcomes)
    : units_(units), arms_(arms), outcomes_(std::move(outcomes)) {
  if (units < 1 || arms < 1) {
    throw std::invalid_argument("table dimensions must be positive");
  }
  if (outcomes_.size() != static_cast<std::size_t>(units) * arms) {
    throw std::invalid_argument("outcome buffer does not match dimensions");
  }
  for (std::uint8_t value : outcomes_) {
    if (value > 1) {
      throw std::invalid_argument("potential outcomes must be 0 or 1");
    }
  }
}

PotentialOutcomeTable PotentialOutcomeTable::from_rows(
    const std::vector<std::vector<int>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("table requires at least one unit and arm");
  }
  const int units = static_cast<int>(rows.size());
  const int arms = static_cast<int>(rows.front().size());
  std::vector<std::uint8_t> outcomes;
  outcomes.reserve(static_cast<std::size_t>(units) * arms);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != arms) {
      throw std::invalid_argument("ragged outcome rows");
    }
    for (int value : row) {
      if (value != 0 && value != 1) {
        throw std::invalid_argument("potential outcomes must be 0 or 1");
      }
      outcomes.push_back(static_cast<std::uint8_t>(value));
    }
  }
  return {units, arms, std::move(outcomes)};
}

Rational JointCounts::proportion(int arm) const {
  return make_rational(margins[arm], units);
}

JointCounts compute_joint_counts(const PotentialOutcomeTable& table) {
  const int arms = table.arms();
  JointCounts counts;
  counts.units = table.units();
  counts.margins.assign(arms, 0);
  counts.pairwise.assign(static_cast<std::size_t>(arms) * arms, 0);
  for (int unit = 0; unit < table.units(); ++unit) {
    const auto row = table.row(unit);
    for (int a = 0; a < arms; ++a) {
      if (!row[a]) {
        continue;
      }
      counts.margins[a] += 1;
      for (int b = 0; b < arms; ++b) {
        counts.pairwise[a * arms + b] += row[b];
      }
    }
  }
  return counts;
}

std::int64_t joint_count(const PotentialOutcomeTable& table,
                         std::span<const int> arms) {
  if (arms.empty()) {
    throw std::invalid_argument("joint count requires a non-empty arm subset");
  }
  for (int arm : arms) {
    if (arm < 0 || arm >= table.arms()) {
      throw std::invalid_argument("arm index out of range");
    }
  }
  std::int64_t count = 0;
  for (int unit = 0; unit < table.units(); ++unit) {
    bool all_one = true;
    for (int arm : arms) {
      if (!table.outcome(unit, arm)) {
        all_one = false;
        break;
      }
    }
    count += all_one;
  }
  return count;
}

EffectTable::EffectTable(int units, int effects,
                         std::vector<Rational> individual,
                         std::vector<Rational> average)
    : units_(units),
      effects_(effects),
      individual_(std::move(individual)),
      average_(std::move(average)) {}

EffectTable population_effects(const PotentialOutcomeTable& table,
                               const ModelMatrix& matrix) {
  check_same_arms(table, matrix);
  const int units = table.units();
  const int effects = matrix.effects();
  const std::int64_t half_scale = std::int64_t{1} << (matrix.factors() - 1);

  std::vector<Rational> individual;
  individual.reserve(static_cast<std::size_t>(units) * effects);
  std::vector<std::int64_t> dot_sums(effects, 0);
  for (int unit = 0; unit < units; ++unit) {
    for (int effect = 1; effect <= effects; ++effect) {
      const int dot = effect_dot(table, matrix, unit, effect);
      dot_sums[effect - 1] += dot;
      individual.push_back(make_rational(dot, half_scale));
    }
  }
  std::vector<Rational> average;
  average.reserve(effects);
  for (int effect = 1; effect <= effects; ++effect) {
    average.push_back(make_rational(dot_sums[effect - 1], half_scale * units));
  }
  return {units, effects, std::move(individual), std::move(average)};
}

Rational s2_arm(const PotentialOutcomeTable& table, int arm) {
  if (table.units() < 2) {
    throw std::invalid_argument("arm variance requires at least two units");
  }
  if (arm < 0 || arm >= table.arms()) {
    throw std::invalid_argument("arm index out of range");
  }
  std::int64_t ones = 0;
  for (int unit = 0; unit < table.units(); ++unit) {
    ones += table.outcome(unit, arm);
  }
  const std::int64_t n = table.units();
  // N/(N-1) * p (1-p) with p = ones/N.
  return make_rational(ones * (n - ones), n * (n - 1));
}

Rational s2_effect_direct(const PotentialOutcomeTable& table,
                          const ModelMatrix& matrix, int effect) {
  check_same_arms(table, matrix);
  check_effect_index(matrix, effect);
  if (table.units() < 2) {
    throw std::invalid_argument("effect variance requires at least two units");
  }
  const int units = table.units();
  const std::int64_t half_scale = std::int64_t{1} << (matrix.factors() - 1);

  std::int64_t dot_sum = 0;
  std::vector<int> dots(units);
  for (int unit = 0; unit < units; ++unit) {
    dots[unit] = effect_dot(table, matrix, unit, effect);
    dot_sum += dots[unit];
  }
  const Rational tau_bar = make_rational(dot_sum, half_scale * units);

  Rational sum_squares(0);
  for (int unit = 0; unit < units; ++unit) {
    const Rational deviation = make_rational(dots[unit], half_scale) - tau_bar;
    sum_squares += deviation * deviation;
  }
  return sum_squares / (units - 1);
}

Rational s2_effect_counts(const JointCounts& counts, const ModelMatrix& matrix,
                          int effect) {
  check_effect_index(matrix, effect);
  const int arms = matrix.arms();
  if (static_cast<int>(counts.margins.size()) != arms) {
    throw std::invalid_argument("counts and model matrix arm counts differ");
  }
  const std::int64_t units = counts.units;
  if (units < 2) {
    throw std::invalid_argument("effect variance requires at least two units");
  }
  const auto& column = matrix.column(effect);

  std::int64_t quadratic = 0;  // sum_j N_j + sum_{j != j'} h h' N_{jj'}
  std::int64_t signed_margin = 0;
  for (int a = 0; a < arms; ++a) {
    quadratic += counts.margins[a];
    signed_margin += column[a] * counts.margins[a];
    for (int b = 0; b < arms; ++b) {
      if (a != b) {
        quadratic += column[a] * column[b] * counts.pair(a, b);
      }
    }
  }

  const std::int64_t half_scale = std::int64_t{1} << (matrix.factors() - 1);
  const Rational tau_bar = make_rational(signed_margin, half_scale * units);
  return make_rational(quadratic, half_scale * half_scale * (units - 1)) -
         make_rational(units, units - 1) * tau_bar * tau_bar;
}

Rational s2_effect_counts(const PotentialOutcomeTable& table,
                          const ModelMatrix& matrix, int effect) {
  check_same_arms(table, matrix);
  return s2_effect_counts(compute_joint_counts(table), matrix, effect);
}

Rational sharp_lower_bound(const Rational& tau_bar, int factors, int units) {
  if (units < 2) {
    throw std::invalid_argument("bound requires at least two units");
  }
  if (abs(tau_bar) > 1) {
    throw std::invalid_argument("average effect magnitude cannot exceed one");
  }
  const Rational gap =
      pow2_rational(-(factors - 1)) * abs(tau_bar) - tau_bar * tau_bar;
  if (gap <= 0) {
    return Rational(0);
  }
  return make_rational(units, units - 1) * gap;
}

EffectSupport boundary_condition(const PotentialOutcomeTable& table,
                                 const ModelMatrix& matrix, int effect) {
  check_same_arms(table, matrix);
  check_effect_index(matrix, effect);
  // 2^{K-1} tau_il is an integer; the two attainment patterns pin it to
  // {0,-1} or {0,+1}.
  bool zero_or_minus = true;
  bool zero_or_plus = true;
  for (int unit = 0; unit < table.units(); ++unit) {
    const int dot = effect_dot(table, matrix, unit, effect);
    zero_or_minus = zero_or_minus && (dot == 0 || dot == -1);
    zero_or_plus = zero_or_plus && (dot == 0 || dot == 1);
    if (!zero_or_minus && !zero_or_plus) {
      return EffectSupport::kNone;
    }
  }
  if (zero_or_minus && zero_or_plus) {
    return EffectSupport::kAllZero;
  }
  return zero_or_minus ? EffectSupport::kZeroOrMinusStep
                       : EffectSupport::kZeroOrPlusStep;
}

Rational true_sampling_variance(const PotentialOutcomeTable& table,
                                const ModelMatrix& matrix,
                                std::span<const int> arm_sizes, int effect) {
  check_same_arms(table, matrix);
  check_effect_index(matrix, effect);
  if (static_cast<int>(arm_sizes.size()) != table.arms()) {
    throw std::invalid_argument("arm size vector does not match arm count");
  }
  std::int64_t total = 0;
  for (int size : arm_sizes) {
    if (size < 2) {
      throw std::invalid_argument("every arm requires at least two units");
    }
    total += size;
  }
  if (total != table.units()) {
    throw std::invalid_argument("arm sizes must sum to the unit count");
  }

  Rational weighted(0);
  for (int arm = 0; arm < table.arms(); ++arm) {
    weighted += s2_arm(table, arm) / arm_sizes[arm];
  }
  return pow2_rational(-2 * (matrix.factors() - 1)) * weighted -
         s2_effect_direct(table, matrix, effect) / table.units();
}

}  // namespace neyman2k
