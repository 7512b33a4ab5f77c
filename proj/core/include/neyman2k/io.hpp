#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "neyman2k/finite_population.hpp"
#include "neyman2k/neymanian.hpp"
#include "neyman2k/simulate.hpp"

namespace neyman2k {

// CSV schemas. Arms are numbered 1..J in model-matrix row order everywhere
// a file is involved; parse errors throw std::runtime_error naming the
// offending line.

/// Science table: header row with columns y_arm1..y_armJ (other columns,
/// e.g. factor levels, are ignored), one 0/1 row per unit.
PotentialOutcomeTable load_science_table(std::istream& in);
PotentialOutcomeTable load_science_table_file(const std::string& path);
void save_science_table(const PotentialOutcomeTable& table, std::ostream& out);

/// Aggregated counts: header "arm,n,n_obs", rows for arms 1..J in order.
ObservedData load_aggregated_counts(std::istream& in, int expected_arms);

/// Unit-level data: header "f1,..,fK,outcome", factor levels in {-1,1},
/// outcome in {0,1}. Arms are inferred by matching the levels against the
/// treatment combinations; every arm must appear with at least two units.
ObservedData load_unit_level(std::istream& in, const ModelMatrix& matrix);

/// Analysis report: per-effect records plus design metadata. `seed` is
/// null (analysis consumes given data).
std::string analysis_report_json(const std::vector<EffectAnalysis>& effects,
                                 const ModelMatrix& matrix,
                                 const ObservedData& observed);

/// Config echo plus min/max/mean, frac_improvement_gt_10pct, n_clamped,
/// n_truncated.
std::string simulation_summary_json(const RatioSummary& summary);

std::string table_simulation_summary_json(const TableSimSummary& summary,
                                          const TableSimConfig& config);

}  // namespace neyman2k
