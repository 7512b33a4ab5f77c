#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "neyman2k/oracle.hpp"
#include "neyman2k/rng.hpp"

using namespace neyman2k;

namespace {

PotentialOutcomeTable random_table(int units, int arms, RandomEngine& engine,
                                   std::uint64_t tenths) {
  std::vector<std::uint8_t> outcomes(static_cast<std::size_t>(units) * arms);
  for (auto& value : outcomes) {
    value = uniform_below(engine, 10) < tenths ? 1 : 0;
  }
  return {units, arms, std::move(outcomes)};
}

/// Independent coupling oracle: enumerate every labeled table over
/// {0,1}^{N x J}, keep the margin-consistent ones, and deduplicate by the
/// multiset of rows.
std::set<std::multiset<std::vector<int>>> brute_force_couplings(
    const MarginSpec& spec) {
  const int units = spec.units;
  const int arms = spec.arms();
  const int bits = units * arms;
  REQUIRE(bits <= 20);
  std::set<std::multiset<std::vector<int>>> couplings;
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    std::multiset<std::vector<int>> rows;
    std::vector<std::int64_t> margins(arms, 0);
    for (int unit = 0; unit < units; ++unit) {
      std::vector<int> row(arms);
      for (int arm = 0; arm < arms; ++arm) {
        row[arm] = (mask >> (unit * arms + arm)) & 1;
        margins[arm] += row[arm];
      }
      rows.insert(std::move(row));
    }
    if (margins == spec.margins) {
      couplings.insert(std::move(rows));
    }
  }
  return couplings;
}

std::multiset<std::vector<int>> row_multiset(const PotentialOutcomeTable& table) {
  std::multiset<std::vector<int>> rows;
  for (int unit = 0; unit < table.units(); ++unit) {
    std::vector<int> row(table.arms());
    for (int arm = 0; arm < table.arms(); ++arm) {
      row[arm] = table.outcome(unit, arm);
    }
    rows.insert(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("assignment counting") {
  CHECK(count_assignments(Design(4, {2, 2})) == 6);
  CHECK(count_assignments(Design(8, {2, 2, 2, 2})) == 2520);
  CHECK(count_assignments(Design(12, {6, 6})) == 924);
}

TEST_CASE("assignment enumeration is exhaustive, unique and lexicographic") {
  const Design design(4, {2, 2});
  AssignmentEnumerator enumerator(design);
  Assignment assignment;
  std::vector<std::vector<std::int32_t>> seen;
  while (enumerator.next(assignment)) {
    std::vector<int> counts(2, 0);
    for (int arm : assignment.arm_of) {
      counts[arm] += 1;
    }
    CHECK(counts == std::vector<int>{2, 2});
    seen.push_back(assignment.arm_of);
  }
  CHECK(seen.size() == 6);
  CHECK(std::is_sorted(seen.begin(), seen.end()));
  CHECK(std::set(seen.begin(), seen.end()).size() == 6);
}

TEST_CASE("assignment enumeration refuses beyond the cap") {
  const Design design(8, {2, 2, 2, 2});
  try {
    AssignmentEnumerator enumerator(design, 2519);
    FAIL("expected a cap refusal");
  } catch (const EnumerationCapError& error) {
    CHECK(error.count() == 2520);
    CHECK(error.exact());
  }
  CHECK_NOTHROW(AssignmentEnumerator(design, 2520));
}

TEST_CASE("exact randomization moments on fixtures") {
  const ModelMatrix m1(1);
  const Design design(4, {2, 2});

  // Within-pair cancellation: the estimator is constant, so its variance
  // is exactly zero while the classic estimator averages S^2/N = 1/3.
  const auto cancel = PotentialOutcomeTable::from_rows(
      {{0, 1}, {0, 1}, {1, 0}, {1, 0}});
  const RandomizationMoments cancel_moments =
      exact_randomization_moments(cancel, m1, design, 1);
  CHECK(cancel_moments.estimate_mean == 0);
  CHECK(cancel_moments.estimate_variance == 0);
  CHECK(cancel_moments.classic_estimator_mean == make_rational(1, 3));

  // Strictly additive: zero bias for the classic estimator.
  const auto additive = PotentialOutcomeTable::from_rows(
      {{0, 0}, {1, 1}, {0, 0}, {1, 1}});
  const RandomizationMoments additive_moments =
      exact_randomization_moments(additive, m1, design, 1);
  CHECK(additive_moments.estimate_mean == 0);
  CHECK(additive_moments.estimate_variance == make_rational(1, 3));
  CHECK(additive_moments.classic_estimator_mean ==
        additive_moments.estimate_variance);
}

TEST_CASE("exact moments certify unbiasedness, the variance formula and the "
          "conservative bias") {
  for (int factors = 1; factors <= 2; ++factors) {
    const ModelMatrix matrix(factors);
    const int arms = matrix.arms();
    const int units = 2 * arms + (factors == 1 ? 2 : 0);
    const Design design(units, std::vector<int>(
                                   arms, units / arms));
    for (int t = 0; t < 25; ++t) {
      RandomEngine engine(derive_seed(9000 + factors, t));
      const auto table =
          random_table(units, arms, engine, 1 + uniform_below(engine, 9));
      const EffectTable effects = population_effects(table, matrix);
      for (int effect = 1; effect <= matrix.effects(); ++effect) {
        const RandomizationMoments moments =
            exact_randomization_moments(table, matrix, design, effect);
        CHECK(moments.estimate_mean == effects.tau_bar(effect));
        CHECK(moments.estimate_variance ==
              true_sampling_variance(table, matrix, design.arm_sizes, effect));
        CHECK(moments.classic_estimator_mean - moments.estimate_variance ==
              s2_effect_direct(table, matrix, effect) / units);
      }
    }
  }
}

TEST_CASE("coupling counts against a brute-force labeled enumeration") {
  CHECK(count_couplings(MarginSpec(3, {3, 3})) == 1);  // all margins at N
  CHECK(count_couplings(MarginSpec(2, {1, 1})) == 2);
  CHECK(count_couplings(MarginSpec(4, {2, 2})) == 3);

  for (const auto& margins :
       std::vector<std::vector<std::int64_t>>{{2, 2}, {1, 3}, {0, 4}, {3, 2}}) {
    const MarginSpec spec(4, margins);
    const auto expected = brute_force_couplings(spec);
    std::set<std::multiset<std::vector<int>>> produced;
    std::uint64_t emitted = 0;
    for_each_coupling(spec, [&](const PotentialOutcomeTable& table) {
      ++emitted;
      produced.insert(row_multiset(table));
      CHECK(compute_joint_counts(table).margins == spec.margins);
    });
    CHECK(emitted == expected.size());  // each coupling exactly once
    CHECK(produced == expected);
    CHECK(count_couplings(spec) == expected.size());
  }

  // K=2 spot check against the labeled oracle.
  const MarginSpec wide(4, {2, 1, 3, 0});
  CHECK(count_couplings(wide) == brute_force_couplings(wide).size());
}

TEST_CASE("coupling enumeration refuses beyond the cap") {
  const MarginSpec spec(8, {4, 4, 4, 4});
  const std::uint64_t count = count_couplings(spec);
  CHECK(count > 3);
  CHECK_THROWS_AS(count_couplings(spec, 3), EnumerationCapError);
  CHECK_THROWS_AS(
      for_each_coupling(spec, [](const PotentialOutcomeTable&) {}, 3),
      EnumerationCapError);
}

TEST_CASE("minimum effect variance over couplings") {
  const ModelMatrix m1(1);

  // Zero average effect: the minimum is zero with an additive witness.
  const SharpnessResult balanced =
      min_s2_over_couplings(MarginSpec(4, {2, 2}), m1, 1);
  CHECK(balanced.minimum == 0);
  CHECK(boundary_condition(balanced.witness, m1, 1) != EffectSupport::kNone);

  const SharpnessResult tilted =
      min_s2_over_couplings(MarginSpec(4, {1, 3}), m1, 1);
  CHECK(tilted.minimum == make_rational(1, 3));
  CHECK(tilted.minimum == sharp_lower_bound(make_rational(1, 2), 1, 4));
  CHECK(boundary_condition(tilted.witness, m1, 1) != EffectSupport::kNone);

  const ModelMatrix m2(2);
  const SharpnessResult boundary =
      min_s2_over_couplings(MarginSpec(8, {2, 2, 6, 6}), m2, 1);
  CHECK(boundary.minimum == 0);
  CHECK(boundary.minimum ==
        sharp_lower_bound(MarginSpec(8, {2, 2, 6, 6}).tau_bar(m2, 1), 2, 8));

  // Beyond |tau_bar| = 2^{-(K-1)} the clamped bound 0 is not attainable:
  // the true minimum stays strictly positive. Counterexample to the
  // unqualified sharpness claim, certified by exhaustive enumeration.
  const MarginSpec outside(8, {7, 1, 3, 6});
  CHECK(outside.tau_bar(m2, 3) == make_rational(9, 16));
  CHECK(sharp_lower_bound(outside.tau_bar(m2, 3), 2, 8) == 0);
  const SharpnessResult corner = min_s2_over_couplings(outside, m2, 3);
  CHECK(corner.minimum == make_rational(1, 32));
}

TEST_CASE("split counts and their identity with the unit effect") {
  const ModelMatrix m1(1);
  const auto table = PotentialOutcomeTable::from_rows({{0, 1}, {1, 0}, {1, 1}});
  const SplitCounts first = split_counts(table, m1, 0, 1);
  CHECK(first.minus_sum == 0);
  CHECK(first.plus_sum == 1);

  const ModelMatrix m3(3);
  RandomEngine engine(404);
  const auto wide = random_table(10, 8, engine, 5);
  const EffectTable effects = population_effects(wide, m3);
  for (int unit = 0; unit < wide.units(); ++unit) {
    for (int effect = 1; effect <= 7; ++effect) {
      const SplitCounts split = split_counts(wide, m3, unit, effect);
      CHECK(split.minus_sum >= 0);
      CHECK(split.minus_sum <= 4);
      CHECK(split.plus_sum >= 0);
      CHECK(split.plus_sum <= 4);
      // plus - minus = 2^{K-1} tau_il.
      CHECK(make_rational(split.plus_sum - split.minus_sum, 4) ==
            effects.tau(unit, effect));
    }
  }
}

TEST_CASE("count inequality reports") {
  const ModelMatrix m1(1);

  const auto zeros = PotentialOutcomeTable::from_rows({{0, 0}, {0, 0}});
  const auto zero_report = verify_count_inequality(zeros, m1, 1);
  CHECK(zero_report.lhs == 0);
  CHECK(zero_report.rhs == 0);
  CHECK(zero_report.equality);
  CHECK(zero_report.per_unit_ok);
  CHECK(zero_report.condition == EffectSupport::kAllZero);

  const auto monotone = PotentialOutcomeTable::from_rows(
      {{0, 1}, {0, 0}, {1, 1}, {0, 1}});
  const auto monotone_report = verify_count_inequality(monotone, m1, 1);
  CHECK(monotone_report.equality);
  CHECK(monotone_report.condition == EffectSupport::kZeroOrPlusStep);

  const auto mixed = PotentialOutcomeTable::from_rows({{0, 1}, {1, 0}});
  const auto mixed_report = verify_count_inequality(mixed, m1, 1);
  CHECK(mixed_report.lhs == 2);
  CHECK(mixed_report.rhs == 0);
  CHECK(mixed_report.holds);
  CHECK_FALSE(mixed_report.equality);
  CHECK(mixed_report.condition == EffectSupport::kNone);

  // Fuzz: the inequality and its equality characterisation hold with the
  // per-unit inequality on every generated table.
  for (int factors = 1; factors <= 3; ++factors) {
    const ModelMatrix matrix(factors);
    for (int t = 0; t < 80; ++t) {
      RandomEngine engine(derive_seed(6600 + factors, t));
      const int units = 2 + static_cast<int>(uniform_below(engine, 31));
      const auto table = random_table(units, matrix.arms(), engine,
                                      1 + uniform_below(engine, 9));
      for (int effect = 1; effect <= matrix.effects(); ++effect) {
        const auto report = verify_count_inequality(table, matrix, effect);
        CHECK(report.holds);
        CHECK(report.per_unit_ok);
        CHECK(report.equality ==
              (report.condition != EffectSupport::kNone));
      }
    }
  }
}
