#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neyman2k/oracle.hpp"

namespace neyman2k {

/// Property-suite driver behind the `verify` CLI subcommand. Runs every
/// exactly-checkable identity of the engine over an exhaustive or fuzzed
/// corpus of science tables at one (K, N).
struct VerifyOptions {
  int factors = 1;
  int units = 4;
  /// Exhaustive: all 2^{N*J} binary tables (subject to table_cap).
  bool exhaustive = false;
  /// Fuzz: this many seeded random tables (a mix of dense/sparse and
  /// bound-attaining ones).
  int fuzz_count = 0;
  std::uint64_t seed = 0;
  /// When set, sharpness is checked for exactly these margins; otherwise
  /// for every distinct margin vector seen in the corpus.
  std::optional<std::vector<std::int64_t>> margins;
  std::uint64_t assignment_cap = kDefaultEnumerationCap;
  std::uint64_t coupling_cap = kDefaultEnumerationCap;
  std::uint64_t table_cap = 1u << 20;
};

struct PropertyResult {
  std::string property;
  std::uint64_t cases = 0;
  std::uint64_t violations = 0;
  std::string detail;  // first violation, if any

  bool passed() const { return violations == 0; }
};

/// Generates the corpus described by `options`. Exposed for reuse by test
/// harnesses; fuzz tables mix random densities with structured tables that
/// attain the variance bound.
std::vector<PotentialOutcomeTable> verification_corpus(const VerifyOptions& options);

/// Balanced arm sizes for the given table, spreading any remainder; throws
/// if some arm would fall below two units.
std::vector<int> balanced_arm_sizes(int units, int arms);

std::vector<PropertyResult> run_verification(const VerifyOptions& options);

}  // namespace neyman2k
