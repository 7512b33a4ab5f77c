#include "neyman2k/neymanian.hpp"

#include <cmath>
#include <stdexcept>

#include "neyman2k/rng.hpp"

namespace neyman2k {

namespace {

bool is_power_of_two(int value) { return value > 0 && (value & (value - 1)) == 0; }

void check_factors_match(int factors, int arms) {
  if (factors < 1 || (1 << factors) != arms) {
    throw std::invalid_argument("factor count does not match the arm count");
  }
}

}  // namespace

Design::Design(int units, std::vector<int> arm_sizes)
    : units(units), arm_sizes(std::move(arm_sizes)) {
  const int arm_count = static_cast<int>(this->arm_sizes.size());
  if (arm_count < 2 || !is_power_of_two(arm_count)) {
    throw std::invalid_argument("arm count must be 2^K with K >= 1");
  }
  std::int64_t total = 0;
  for (int size : this->arm_sizes) {
    if (size < 2) {
      throw std::invalid_argument("every arm requires at least two units");
    }
    total += size;
  }
  if (total != units) {
    throw std::invalid_argument("arm sizes must sum to the unit count");
  }
}

Assignment complete_randomization(const Design& design, std::uint64_t seed) {
  Assignment assignment;
  assignment.arm_of.reserve(design.units);
  for (int arm = 0; arm < design.arms(); ++arm) {
    assignment.arm_of.insert(assignment.arm_of.end(), design.arm_sizes[arm],
                             arm);
  }
  RandomEngine engine(seed);
  deterministic_shuffle(assignment.arm_of, engine);
  return assignment;
}

ObservedData::ObservedData(std::vector<Arm> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) {
    throw std::invalid_argument("observed data requires at least one arm");
  }
  for (const Arm& arm : arms_) {
    if (arm.assigned < 2) {
      throw std::invalid_argument("every arm requires at least two units");
    }
    if (arm.successes < 0 || arm.successes > arm.assigned) {
      throw std::invalid_argument("success count out of range for its arm");
    }
    units_ += arm.assigned;
  }
}

ObservedData observe(const PotentialOutcomeTable& table,
                     const Assignment& assignment) {
  if (static_cast<int>(assignment.arm_of.size()) != table.units()) {
    throw std::invalid_argument("assignment length does not match unit count");
  }
  std::vector<ObservedData::Arm> arms(table.arms());
  for (int unit = 0; unit < table.units(); ++unit) {
    const int arm = assignment.arm_of[unit];
    if (arm < 0 || arm >= table.arms()) {
      throw std::invalid_argument("assignment references an unknown arm");
    }
    arms[arm].assigned += 1;
    arms[arm].successes += table.outcome(unit, arm);
  }
  return ObservedData(std::move(arms));
}

std::vector<double> estimate_effects(const ObservedData& observed,
                                     const ModelMatrix& matrix) {
  if (observed.arms() != matrix.arms()) {
    throw std::invalid_argument("observed data and model matrix arms differ");
  }
  std::vector<double> estimates(matrix.effects());
  for (int effect = 1; effect <= matrix.effects(); ++effect) {
    const auto& column = matrix.column(effect);
    double dot = 0.0;
    for (int arm = 0; arm < observed.arms(); ++arm) {
      dot += column[arm] * observed.p_hat(arm);
    }
    estimates[effect - 1] = std::ldexp(dot, -(matrix.factors() - 1));
  }
  return estimates;
}

double variance_classic(const ObservedData& observed, int factors) {
  check_factors_match(factors, observed.arms());
  double sum = 0.0;
  for (int arm = 0; arm < observed.arms(); ++arm) {
    const double p = observed.p_hat(arm);
    sum += p * (1.0 - p) / (observed.arm(arm).assigned - 1);
  }
  return std::ldexp(sum, -2 * (factors - 1));
}

double improvement_correction(double tau_hat, int factors, int units) {
  if (factors < 1) {
    throw std::invalid_argument("factor count must be at least 1");
  }
  if (units < 2) {
    throw std::invalid_argument("correction requires at least two units");
  }
  const double gap =
      std::ldexp(std::fabs(tau_hat), -(factors - 1)) - tau_hat * tau_hat;
  return std::max(gap, 0.0) / (units - 1);
}

ImprovedVariance variance_improved(double var_classic, double tau_hat,
                                   int factors, int units) {
  const double correction = improvement_correction(tau_hat, factors, units);
  const double value = var_classic - correction;
  if (value < 0.0) {
    return {0.0, true};
  }
  return {value, false};
}

// Wichura's PPND16 rational approximations to the probit function.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile probability must lie in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double numerator =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double denominator =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return numerator / denominator;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double numerator =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double denominator =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = numerator / denominator;
  } else {
    r -= 5.0;
    const double numerator =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double denominator =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = numerator / denominator;
  }
  return (q < 0.0) ? -value : value;
}

Interval wald_interval(double estimate, double variance, double level) {
  if (variance < 0.0) {
    throw std::invalid_argument("variance must be non-negative");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie strictly in (0,1)");
  }
  const double half_width =
      normal_quantile(0.5 * (1.0 + level)) * std::sqrt(variance);
  return {estimate - half_width, estimate + half_width};
}

std::vector<EffectAnalysis> analyze(const ObservedData& observed,
                                    const ModelMatrix& matrix, double level) {
  const double classic = variance_classic(observed, matrix.factors());
  const auto estimates = estimate_effects(observed, matrix);

  std::vector<EffectAnalysis> rows;
  rows.reserve(matrix.effects());
  for (int effect = 1; effect <= matrix.effects(); ++effect) {
    EffectAnalysis row;
    row.label = matrix.effect_label(effect);
    row.estimate = estimates[effect - 1];
    row.var_classic = classic;
    row.correction =
        improvement_correction(row.estimate, matrix.factors(), observed.units());
    const ImprovedVariance improved = variance_improved(
        classic, row.estimate, matrix.factors(), observed.units());
    row.var_improved = improved.value;
    row.clamped = improved.clamped;
    row.level = level;
    const Interval interval = wald_interval(row.estimate, row.var_improved, level);
    row.ci_lower = interval.lower;
    row.ci_upper = interval.upper;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace neyman2k
