#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "neyman2k/finite_population.hpp"
#include "neyman2k/neymanian.hpp"
#include "neyman2k/rational.hpp"

namespace neyman2k {

/// Monte Carlo study of the improved/classic variance-estimator ratio.
/// Each replicate draws per-arm success counts directly (no science table
/// is involved) and evaluates both estimators for one effect.
struct SimConfig {
  int factors = 3;
  int units = 400;
  /// Explicit arm sizes; empty means balanced units/2^factors.
  std::vector<int> arm_sizes;
  int replications = 5000;
  std::uint64_t seed = 0;
  /// Upper bound U of the integer-uniform draw {0..U} for each arm's
  /// success count; unset means U = n_j. Draws above n_j are truncated
  /// to n_j and counted.
  std::optional<int> obs_max;
  int workers = 1;
  /// Effect whose variance ratio is recorded.
  int effect = 1;

  /// Resolved arm sizes (balanced fill-in applied). Throws on an invalid
  /// configuration.
  std::vector<int> resolved_arm_sizes() const;
  void validate() const;
};

struct RatioSummary {
  SimConfig config;
  std::vector<int> arm_sizes;        // resolved
  std::vector<double> ratios;        // one per replicate, each in [0,1]
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Fraction of replicates with ratio < 0.9.
  double frac_improvement_gt_10pct = 0.0;
  /// Replicates whose improved estimate was clamped to zero.
  std::int64_t clamped_count = 0;
  /// Per-arm draws truncated down to n_j.
  std::int64_t truncated_count = 0;
};

RatioSummary run_ratio_simulation(const SimConfig& config);

/// replicate,ratio rows; byte-stable for a fixed config.
void write_ratio_csv(const RatioSummary& summary, std::ostream& out);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::int64_t count = 0;
};

/// Equal-width bins spanning [min ratio, 1]; counts sum to the replicate
/// count.
std::vector<HistogramBin> ratio_histogram(const RatioSummary& summary,
                                          int bins = 20);

void write_histogram_csv(const RatioSummary& summary, std::ostream& out,
                         int bins = 20);

/// Replicated experiment on a fixed science table: each replicate draws a
/// complete randomization, observes, and records estimate and variance
/// estimates for one effect. Demonstrates the conservativeness identity
/// empirically against the exact population quantities.
struct TableSimConfig {
  int factors = 1;
  std::vector<int> arm_sizes;  // empty means balanced
  int replications = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  int effect = 1;
};

struct TableSimReplicate {
  double estimate = 0.0;
  double var_classic = 0.0;
  double var_improved = 0.0;
};

struct TableSimSummary {
  std::vector<TableSimReplicate> replicates;
  double mean_estimate = 0.0;
  double mean_var_classic = 0.0;
  double mean_var_improved = 0.0;
  // Exact population references for the same design.
  Rational tau_bar;
  Rational sampling_variance;
  Rational conservative_bias;  // S^2(tau_bar)/N
};

TableSimSummary run_table_simulation(const PotentialOutcomeTable& table,
                                     const TableSimConfig& config);

void write_table_sim_csv(const TableSimSummary& summary, std::ostream& out);

}  // namespace neyman2k
