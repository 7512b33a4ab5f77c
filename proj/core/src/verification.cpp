#include "neyman2k/verification.hpp"

#include <set>

#include "neyman2k/rng.hpp"

namespace neyman2k {

namespace {

std::string case_tag(int table_index, int effect) {
  return "table " + std::to_string(table_index) + ", effect " +
         std::to_string(effect);
}

/// Rows y with h_l'y in {0, sign}: tables built from them attain the
/// variance bound for effect l.
std::vector<std::vector<int>> attaining_rows(const ModelMatrix& matrix,
                                             int effect, int sign) {
  std::vector<std::vector<int>> rows;
  const int arms = matrix.arms();
  const auto& column = matrix.column(effect);
  for (unsigned mask = 0; mask < (1u << arms); ++mask) {
    int dot = 0;
    std::vector<int> row(arms);
    for (int arm = 0; arm < arms; ++arm) {
      row[arm] = (mask >> arm) & 1;
      dot += column[arm] * row[arm];
    }
    if (dot == 0 || dot == sign) {
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

std::vector<int> balanced_arm_sizes(int units, int arms) {
  const int base = units / arms;
  if (base < 2) {
    throw std::invalid_argument(
        "unit count too small: balanced arms need at least two units each");
  }
  std::vector<int> sizes(arms, base);
  for (int arm = 0; arm < units % arms; ++arm) {
    sizes[arm] += 1;
  }
  return sizes;
}

std::vector<PotentialOutcomeTable> verification_corpus(
    const VerifyOptions& options) {
  const ModelMatrix matrix(options.factors);
  const int arms = matrix.arms();
  const int units = options.units;
  std::vector<PotentialOutcomeTable> corpus;

  if (options.exhaustive) {
    const int bits = units * arms;
    if (bits > 62 ||
        (std::uint64_t{1} << bits) > options.table_cap) {
      throw EnumerationCapError(
          "exhaustive table corpus refused: 2^" + std::to_string(bits) +
              " tables exceed the cap of " + std::to_string(options.table_cap),
          options.table_cap, false);
    }
    const std::uint64_t total = std::uint64_t{1} << bits;
    corpus.reserve(total);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      std::vector<std::uint8_t> outcomes(bits);
      for (int bit = 0; bit < bits; ++bit) {
        outcomes[bit] = (mask >> bit) & 1;
      }
      corpus.emplace_back(units, arms, std::move(outcomes));
    }
    return corpus;
  }

  corpus.reserve(options.fuzz_count);
  for (int t = 0; t < options.fuzz_count; ++t) {
    RandomEngine engine(derive_seed(options.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::uint8_t> outcomes;
    outcomes.reserve(static_cast<std::size_t>(units) * arms);
    if (t % 10 == 0) {
      // Structured table attaining the bound for a random effect.
      const int effect =
          1 + static_cast<int>(uniform_below(engine, matrix.effects()));
      const int sign = uniform_below(engine, 2) == 0 ? 1 : -1;
      const auto rows = attaining_rows(matrix, effect, sign);
      for (int unit = 0; unit < units; ++unit) {
        const auto& row = rows[uniform_below(engine, rows.size())];
        for (int value : row) {
          outcomes.push_back(static_cast<std::uint8_t>(value));
        }
      }
    } else {
      const std::uint64_t tenths = 1 + uniform_below(engine, 9);
      for (int cell = 0; cell < units * arms; ++cell) {
        outcomes.push_back(uniform_below(engine, 10) < tenths ? 1 : 0);
      }
    }
    corpus.emplace_back(units, arms, std::move(outcomes));
  }
  return corpus;
}

std::vector<PropertyResult> run_verification(const VerifyOptions& options) {
  const ModelMatrix matrix(options.factors);
  const int arms = matrix.arms();
  if (options.units < 2 * arms) {
    throw std::invalid_argument(
        "verification requires at least 2^{K+1} units so every arm can hold "
        "two");
  }
  const std::vector<int> arm_sizes = balanced_arm_sizes(options.units, arms);
  const Design design(options.units, arm_sizes);
  const auto corpus = verification_corpus(options);

  PropertyResult matrix_invariants{"model_matrix_invariants", 0, 0, ""};
  for (int a = 0; a < arms; ++a) {
    std::int64_t balance = 0;
    for (int b = 0; b < arms; ++b) {
      std::int64_t dot = 0;
      for (int row = 0; row < arms; ++row) {
        dot += matrix.entry(a, row) * matrix.entry(b, row);
      }
      matrix_invariants.cases += 1;
      if (dot != (a == b ? arms : 0)) {
        matrix_invariants.violations += 1;
        matrix_invariants.detail = "columns " + std::to_string(a) + "," +
                                   std::to_string(b) + " not orthogonal";
      }
    }
    for (int row = 0; row < arms; ++row) {
      balance += matrix.entry(a, row);
    }
    matrix_invariants.cases += 1;
    if (a > 0 && balance != 0) {
      matrix_invariants.violations += 1;
      matrix_invariants.detail = "column " + std::to_string(a) + " unbalanced";
    }
  }
  {
    const auto combinations = matrix.treatment_combinations();
    std::set<std::vector<std::int8_t>> distinct;
    for (const auto& combination : combinations) {
      distinct.insert(combination.levels);
    }
    matrix_invariants.cases += 1;
    if (static_cast<int>(distinct.size()) != arms) {
      matrix_invariants.violations += 1;
      matrix_invariants.detail = "treatment combinations not distinct";
    }
  }

  PropertyResult equivalence{"variance_formula_equivalence", 0, 0, ""};
  PropertyResult inequality{"count_inequality", 0, 0, ""};
  PropertyResult bound{"bound_validity", 0, 0, ""};
  PropertyResult moments{"randomization_moments", 0, 0, ""};

  for (std::size_t index = 0; index < corpus.size(); ++index) {
    const PotentialOutcomeTable& table = corpus[index];
    const EffectTable effects = population_effects(table, matrix);
    for (int effect = 1; effect <= matrix.effects(); ++effect) {
      const Rational direct = s2_effect_direct(table, matrix, effect);

      equivalence.cases += 1;
      if (direct != s2_effect_counts(table, matrix, effect)) {
        equivalence.violations += 1;
        if (equivalence.detail.empty()) {
          equivalence.detail = case_tag(static_cast<int>(index), effect);
        }
      }

      const auto report = verify_count_inequality(table, matrix, effect);
      inequality.cases += 1;
      const bool equality_matches =
          report.equality == (report.condition != EffectSupport::kNone);
      if (!report.holds || !report.per_unit_ok || !equality_matches) {
        inequality.violations += 1;
        if (inequality.detail.empty()) {
          inequality.detail = case_tag(static_cast<int>(index), effect);
        }
      }

      bound.cases += 1;
      const Rational lower = sharp_lower_bound(effects.tau_bar(effect),
                                               matrix.factors(), table.units());
      const bool attained = direct == lower;
      // The bound is met exactly when the two-value support condition
      // holds, or when the effects are strictly additive (direct == 0);
      // the latter can occur outside the condition for K >= 2 when the
      // common effect magnitude exceeds the step.
      const bool expect_attained =
          report.condition != EffectSupport::kNone || direct == 0;
      if (direct < lower || attained != expect_attained) {
        bound.violations += 1;
        if (bound.detail.empty()) {
          bound.detail = case_tag(static_cast<int>(index), effect);
        }
      }

      moments.cases += 1;
      const RandomizationMoments exact = exact_randomization_moments(
          table, matrix, design, effect, options.assignment_cap);
      const Rational eq_variance =
          true_sampling_variance(table, matrix, design.arm_sizes, effect);
      const bool unbiased = exact.estimate_mean == effects.tau_bar(effect);
      const bool variance_matches = exact.estimate_variance == eq_variance;
      const bool bias_matches =
          exact.classic_estimator_mean - eq_variance ==
          direct / table.units();
      if (!unbiased || !variance_matches || !bias_matches) {
        moments.violations += 1;
        if (moments.detail.empty()) {
          moments.detail = case_tag(static_cast<int>(index), effect);
        }
      }
    }
  }

  PropertyResult sharpness{"sharpness", 0, 0, ""};
  std::set<std::vector<std::int64_t>> margin_specs;
  if (options.margins) {
    margin_specs.insert(*options.margins);
  } else {
    for (const PotentialOutcomeTable& table : corpus) {
      margin_specs.insert(compute_joint_counts(table).margins);
    }
  }
  // The bound is attainable exactly on the domain |tau_bar| <= 2^{-(K-1)}
  // (beyond it no coupling can keep every unit effect in {0, +-step});
  // outside that domain only validity (min >= bound) is claimed.
  const Rational step = pow2_rational(-(matrix.factors() - 1));
  int spec_index = 0;
  for (const auto& margins : margin_specs) {
    const MarginSpec spec(options.units, margins);
    for (int effect = 1; effect <= matrix.effects(); ++effect) {
      sharpness.cases += 1;
      const SharpnessResult result =
          min_s2_over_couplings(spec, matrix, effect, options.coupling_cap);
      const Rational tau_bar = spec.tau_bar(matrix, effect);
      const Rational expected =
          sharp_lower_bound(tau_bar, matrix.factors(), options.units);
      bool ok = result.minimum >= expected;
      if (ok && abs(tau_bar) <= step) {
        ok = result.minimum == expected &&
             boundary_condition(result.witness, matrix, effect) !=
                 EffectSupport::kNone;
      }
      if (!ok) {
        sharpness.violations += 1;
        if (sharpness.detail.empty()) {
          sharpness.detail = "margin spec " + std::to_string(spec_index) +
                             ", effect " + std::to_string(effect);
        }
      }
    }
    ++spec_index;
  }

  return {matrix_invariants, equivalence, inequality, bound, moments, sharpness};
}

}  // namespace neyman2k
