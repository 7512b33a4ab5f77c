#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "neyman2k/neymanian.hpp"
#include "neyman2k/rng.hpp"

using namespace neyman2k;

TEST_CASE("design validation") {
  CHECK_THROWS_AS(Design(2, {2}), std::invalid_argument);       // J must be >= 2
  CHECK_THROWS_AS(Design(4, {3, 1}), std::invalid_argument);    // n_j >= 2
  CHECK_THROWS_AS(Design(6, {2, 2, 2}), std::invalid_argument); // J = 2^K
  CHECK_THROWS_AS(Design(5, {2, 2}), std::invalid_argument);    // sum
  CHECK_NOTHROW(Design(8, {2, 2, 2, 2}));
}

TEST_CASE("complete randomization is a deterministic balanced permutation") {
  const Design design(4, {2, 2});
  const Assignment a = complete_randomization(design, 42);
  REQUIRE(a.arm_of.size() == 4);
  int arm1 = 0;
  for (int arm : a.arm_of) {
    REQUIRE(arm >= 0);
    REQUIRE(arm < 2);
    arm1 += arm;
  }
  CHECK(arm1 == 2);
  CHECK(a == complete_randomization(design, 42));
  CHECK(a != complete_randomization(design, 43));
}

TEST_CASE("complete randomization is uniform over the six splits") {
  const Design design(4, {2, 2});
  std::map<std::vector<std::int32_t>, int> frequency;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    frequency[complete_randomization(design, derive_seed(7, i)).arm_of] += 1;
  }
  REQUIRE(frequency.size() == 6);
  for (const auto& [arm_of, count] : frequency) {
    CHECK(std::fabs(static_cast<double>(count) / draws - 1.0 / 6) < 0.01);
  }
}

TEST_CASE("observe aggregates per-arm successes") {
  const auto ones = PotentialOutcomeTable::from_rows(
      {{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  const Assignment split{{0, 0, 1, 1}};
  const ObservedData all = observe(ones, split);
  CHECK(all.arm(0).successes == 2);
  CHECK(all.arm(1).successes == 2);

  const auto zeros = PotentialOutcomeTable::from_rows(
      {{0, 0}, {0, 0}, {0, 0}, {0, 0}});
  CHECK(observe(zeros, split).arm(0).successes == 0);

  // Units 1,2 reveal arm 1 outcomes (0,0); units 3,4 reveal arm 2 (0,0).
  const auto cancel = PotentialOutcomeTable::from_rows(
      {{0, 1}, {0, 1}, {1, 0}, {1, 0}});
  const ObservedData observed = observe(cancel, split);
  CHECK(observed.arm(0).successes == 0);
  CHECK(observed.arm(1).successes == 0);

  CHECK_THROWS_AS(observe(cancel, Assignment{{0, 1}}), std::invalid_argument);
}

TEST_CASE("observed data validation") {
  CHECK_THROWS_AS(ObservedData({{1, 0}, {2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(ObservedData({{2, 3}, {2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(ObservedData({{2, -1}, {2, 1}}), std::invalid_argument);
  const ObservedData observed({{2, 1}, {3, 2}});
  CHECK(observed.units() == 5);
  CHECK(observed.p_hat(1) == doctest::Approx(2.0 / 3));
}

TEST_CASE("effect estimates") {
  const ModelMatrix m1(1);
  const ModelMatrix m2(2);

  const ObservedData constant({{5, 3}, {5, 3}, {5, 3}, {5, 3}});
  for (double estimate : estimate_effects(constant, m2)) {
    CHECK(estimate == 0.0);
  }

  const ObservedData shifted({{10, 2}, {10, 7}});
  CHECK(estimate_effects(shifted, m1)[0] == doctest::Approx(0.5).epsilon(1e-15));

  const ObservedData extreme({{4, 0}, {4, 0}, {4, 4}, {4, 4}});
  const auto estimates = estimate_effects(extreme, m2);
  CHECK(estimates[0] == 1.0);
  CHECK(estimates[1] == 0.0);
  CHECK(estimates[2] == 0.0);
}

TEST_CASE("classic variance estimator") {
  const ObservedData degenerate({{4, 0}, {4, 4}});
  CHECK(variance_classic(degenerate, 1) == 0.0);

  const ObservedData balanced({{5, 2}, {5, 3}});
  CHECK(variance_classic(balanced, 1) == doctest::Approx(0.12).epsilon(1e-15));

  const ObservedData quarter({{3, 1}, {3, 1}, {3, 1}, {3, 1}});
  CHECK(variance_classic(quarter, 2) ==
        doctest::Approx(1.0 / 9).epsilon(1e-15));

  CHECK_THROWS_AS(variance_classic(balanced, 2), std::invalid_argument);
}

TEST_CASE("improvement correction and clamping") {
  CHECK(improvement_correction(0.0, 3, 400) == 0.0);
  CHECK(improvement_correction(0.5, 1, 10) ==
        doctest::Approx(0.25 / 9).epsilon(1e-15));

  const ImprovedVariance improved = variance_improved(0.12, 0.5, 1, 10);
  CHECK_FALSE(improved.clamped);
  CHECK(improved.value == doctest::Approx(0.12 - 0.25 / 9).epsilon(1e-15));

  // With every arm degenerate the estimate is an integer multiple of the
  // step, so the correction vanishes; nothing to clamp.
  const ObservedData degenerate({{4, 0}, {4, 4}});
  const double tau_hat = estimate_effects(degenerate, ModelMatrix(1))[0];
  CHECK(tau_hat == 1.0);
  CHECK(improvement_correction(tau_hat, 1, 8) == 0.0);
  const ImprovedVariance zero = variance_improved(0.0, tau_hat, 1, 8);
  CHECK(zero.value == 0.0);
  CHECK_FALSE(zero.clamped);

  // The clamp engages when the correction exceeds the classic estimate.
  const ImprovedVariance clamped = variance_improved(1e-6, 0.5, 1, 10);
  CHECK(clamped.clamped);
  CHECK(clamped.value == 0.0);
}

TEST_CASE("normal quantile matches reference values to 1e-9") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.9) ==
        doctest::Approx(1.2815515655446004).epsilon(1e-12));
  CHECK(normal_quantile(0.95) ==
        doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.995) ==
        doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(normal_quantile(0.3) ==
        doctest::Approx(-0.5244005127080409).epsilon(1e-12));
  CHECK(normal_quantile(1e-4) ==
        doctest::Approx(-3.7190164854556804).epsilon(1e-12));
  CHECK(normal_quantile(1e-10) ==
        doctest::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(normal_quantile(1.0 - 1e-12) ==
        doctest::Approx(7.0344869100478356).epsilon(1e-11));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("wald interval") {
  const Interval degenerate = wald_interval(0.3, 0.0, 0.95);
  CHECK(degenerate.lower == 0.3);
  CHECK(degenerate.upper == 0.3);

  const Interval interval = wald_interval(0.5, 0.01, 0.95);
  CHECK(interval.lower == doctest::Approx(0.5 - 1.959963984540054 * 0.1));
  CHECK(interval.upper == doctest::Approx(0.5 + 1.959963984540054 * 0.1));

  CHECK_THROWS_AS(wald_interval(0.0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wald_interval(0.0, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(wald_interval(0.0, -0.1, 0.95), std::invalid_argument);
}

TEST_CASE("analyze composes the full record") {
  const ModelMatrix m1(1);
  const ObservedData observed({{5, 2}, {5, 3}});
  const auto rows = analyze(observed, m1, 0.95);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].label == "1");
  CHECK(rows[0].estimate == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(rows[0].var_classic == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(rows[0].var_improved <= rows[0].var_classic);
  CHECK(rows[0].ci_lower < rows[0].estimate);
  CHECK(rows[0].ci_upper > rows[0].estimate);

  const ObservedData empty_outcomes({{4, 0}, {4, 0}});
  const auto zero_rows = analyze(empty_outcomes, m1);
  CHECK(zero_rows[0].estimate == 0.0);
  CHECK(zero_rows[0].var_classic == 0.0);
  CHECK(zero_rows[0].var_improved == 0.0);

  // Dominance across a fuzzed corpus.
  for (int t = 0; t < 2000; ++t) {
    RandomEngine engine(derive_seed(77, t));
    const int factors = 1 + static_cast<int>(uniform_below(engine, 3));
    const ModelMatrix matrix(factors);
    std::vector<ObservedData::Arm> arms(matrix.arms());
    for (auto& arm : arms) {
      arm.assigned = 2 + static_cast<int>(uniform_below(engine, 40));
      arm.successes = static_cast<int>(uniform_below(engine, arm.assigned + 1));
    }
    const ObservedData data(std::move(arms));
    for (const EffectAnalysis& row : analyze(data, matrix)) {
      CHECK(row.var_improved <= row.var_classic);
      CHECK(row.correction >= 0.0);
    }
  }
}
