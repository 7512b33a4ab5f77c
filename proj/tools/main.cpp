// Command-line front end: design | analyze | simulate | verify.
// Exit codes: 0 success, 1 usage/validation error, 2 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neyman2k/io.hpp"
#include "neyman2k/oracle.hpp"
#include "neyman2k/simulate.hpp"
#include "neyman2k/verification.hpp"

namespace {

using namespace neyman2k;
using nlohmann::json;

std::string format_g(double value, int precision = 6) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
  return buffer;
}

void print_design_table(const ModelMatrix& matrix, std::ostream& out) {
  const int arms = matrix.arms();
  out << "Model matrix (K=" << matrix.factors() << ", J=" << arms << ")\n";
  out << "     ";
  for (int column = 0; column < arms; ++column) {
    out << "  h" << column << (column >= 10 ? "" : " ");
  }
  out << '\n';
  for (int row = 0; row < arms; ++row) {
    char label[16];
    std::snprintf(label, sizeof(label), "  z%-3d", row + 1);
    out << label;
    for (int column = 0; column < arms; ++column) {
      std::snprintf(label, sizeof(label), "%4d", matrix.entry(column, row));
      out << label << (column + 1 < arms ? " " : "");
    }
    out << '\n';
  }
  out << "\nTreatment combinations\n";
  const auto combinations = matrix.treatment_combinations();
  for (int row = 0; row < arms; ++row) {
    out << "  z" << row + 1 << " = (";
    for (int k = 0; k < matrix.factors(); ++k) {
      out << (k ? ", " : "") << static_cast<int>(combinations[row].levels[k]);
    }
    out << ")\n";
  }
  out << "\nEffect labels\n  ";
  for (int effect = 1; effect <= matrix.effects(); ++effect) {
    out << (effect > 1 ? " " : "") << matrix.effect_label(effect);
  }
  out << '\n';
}

void print_design_json(const ModelMatrix& matrix, std::ostream& out) {
  json doc{{"k", matrix.factors()}, {"arms", matrix.arms()}};
  doc["labels"] = matrix.effect_labels();
  json rows = json::array();
  for (int row = 0; row < matrix.arms(); ++row) {
    json entries = json::array();
    for (int column = 0; column < matrix.arms(); ++column) {
      entries.push_back(matrix.entry(column, row));
    }
    rows.push_back(std::move(entries));
  }
  doc["matrix"] = std::move(rows);
  json combinations = json::array();
  for (const auto& combination : matrix.treatment_combinations()) {
    json levels = json::array();
    for (int level : combination.levels) {
      levels.push_back(level);
    }
    combinations.push_back(std::move(levels));
  }
  doc["combinations"] = std::move(combinations);
  out << doc.dump(2) << '\n';
}

int run_design(int factors, const std::string& format) {
  const ModelMatrix matrix(factors);
  if (format == "json") {
    print_design_json(matrix, std::cout);
  } else {
    print_design_table(matrix, std::cout);
  }
  return 0;
}

int run_analyze(const std::string& input, int factors, bool aggregated,
                double level, const std::string& format) {
  const ModelMatrix matrix(factors);
  std::ifstream in(input);
  if (!in) {
    throw std::runtime_error("cannot open " + input);
  }
  const ObservedData observed =
      aggregated ? load_aggregated_counts(in, matrix.arms())
                 : load_unit_level(in, matrix);
  const auto effects = analyze(observed, matrix, level);

  if (format == "json") {
    std::cout << analysis_report_json(effects, matrix, observed) << '\n';
    return 0;
  }
  std::printf("%-6s %12s %12s %12s %12s %8s %12s %12s\n", "effect", "estimate",
              "var_classic", "correction", "var_improved", "clamped",
              "ci_lower", "ci_upper");
  for (const EffectAnalysis& row : effects) {
    std::printf("%-6s %12s %12s %12s %12s %8s %12s %12s\n", row.label.c_str(),
                format_g(row.estimate).c_str(), format_g(row.var_classic).c_str(),
                format_g(row.correction).c_str(),
                format_g(row.var_improved).c_str(), row.clamped ? "yes" : "no",
                format_g(row.ci_lower).c_str(), format_g(row.ci_upper).c_str());
  }
  return 0;
}

void write_file(const std::string& path,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  writer(out);
  if (!out) {
    throw std::runtime_error("error while writing " + path);
  }
}

struct SimulateArgs {
  SimConfig config;
  std::vector<int> arms;
  int obs_max = -1;  // <0 means default U = n_j
  std::string out_path;
  std::string hist_path;
  std::string format = "text";
  std::string from_table;
};

int run_simulate(SimulateArgs& args) {
  if (!args.from_table.empty()) {
    const PotentialOutcomeTable table = load_science_table_file(args.from_table);
    TableSimConfig config;
    config.factors = args.config.factors;
    config.arm_sizes = args.arms;
    config.replications = args.config.replications;
    config.seed = args.config.seed;
    config.workers = args.config.workers;
    config.effect = args.config.effect;
    const TableSimSummary summary = run_table_simulation(table, config);
    if (!args.out_path.empty()) {
      write_file(args.out_path,
                 [&](std::ostream& out) { write_table_sim_csv(summary, out); });
    }
    std::cout << table_simulation_summary_json(summary, config) << '\n';
    return 0;
  }

  args.config.arm_sizes = args.arms;
  if (args.obs_max >= 0) {
    args.config.obs_max = args.obs_max;
  }
  const RatioSummary summary = run_ratio_simulation(args.config);
  if (!args.out_path.empty()) {
    write_file(args.out_path,
               [&](std::ostream& out) { write_ratio_csv(summary, out); });
  }
  if (!args.hist_path.empty()) {
    write_file(args.hist_path,
               [&](std::ostream& out) { write_histogram_csv(summary, out); });
  }
  if (args.format == "json") {
    std::cout << simulation_summary_json(summary) << '\n';
  } else {
    std::cout << "replicates: " << summary.ratios.size() << '\n'
              << "ratio min: " << format_g(summary.min, 10) << '\n'
              << "ratio mean: " << format_g(summary.mean, 10) << '\n'
              << "ratio max: " << format_g(summary.max, 10) << '\n'
              << "frac improvement > 10%: "
              << format_g(summary.frac_improvement_gt_10pct, 10) << '\n'
              << "clamped replicates: " << summary.clamped_count << '\n'
              << "truncated draws: " << summary.truncated_count << '\n';
  }
  return 0;
}

int run_verify(const VerifyOptions& options) {
  const auto results = run_verification(options);
  bool all_passed = true;
  for (const PropertyResult& result : results) {
    all_passed = all_passed && result.passed();
    std::cout << "status=" << (result.passed() ? "PASS" : "FAIL")
              << " property=" << result.property << " cases=" << result.cases
              << " violations=" << result.violations;
    if (!result.detail.empty()) {
      std::cout << " first=\"" << result.detail << "\"";
    }
    std::cout << '\n';
  }
  std::cout << "status=" << (all_passed ? "PASS" : "FAIL")
            << " properties=" << results.size() << '\n';
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Randomization-based analysis of 2^K factorial experiments with binary "
      "outcomes"};
  app.require_subcommand(1);

  // design
  int design_factors = 1;
  std::string design_format = "table";
  CLI::App* design = app.add_subcommand(
      "design", "Print the model matrix, treatment combinations and labels");
  design->add_option("--k", design_factors, "Number of factors")->required();
  design->add_option("--format", design_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  // analyze
  std::string analyze_input;
  int analyze_factors = 1;
  bool analyze_aggregated = false;
  double analyze_level = 0.95;
  std::string analyze_format = "table";
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "Estimate effects with classic and improved variances");
  analyze_cmd->add_option("--input", analyze_input, "CSV input path")
      ->required();
  analyze_cmd->add_option("--k", analyze_factors, "Number of factors")
      ->required();
  analyze_cmd->add_flag("--aggregated", analyze_aggregated,
                        "Input is aggregated arm,n,n_obs rows");
  analyze_cmd->add_option("--level", analyze_level, "Confidence level");
  analyze_cmd->add_option("--format", analyze_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  // simulate
  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo study of the improved/classic variance ratio");
  simulate->set_config("--config", "", "key=value file mirroring the flags");
  simulate->add_option("--k", sim.config.factors, "Number of factors");
  simulate->add_option("--units", sim.config.units, "Total units N");
  simulate->add_option("--reps", sim.config.replications, "Replicates");
  simulate->add_option("--seed", sim.config.seed, "Master seed");
  simulate->add_option("--obs-max", sim.obs_max,
                       "Upper bound U of the uniform {0..U} success draw "
                       "(default: per-arm size)");
  simulate->add_option("--arms", sim.arms, "Explicit arm sizes")
      ->delimiter(',');
  simulate->add_option("--workers", sim.config.workers, "Worker threads");
  simulate->add_option("--effect", sim.config.effect,
                       "Effect column the ratio is computed for");
  simulate->add_option("--out", sim.out_path, "Per-replicate CSV path");
  simulate->add_option("--hist", sim.hist_path, "Histogram CSV path");
  simulate->add_option("--format", sim.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  simulate->add_option("--from-table", sim.from_table,
                       "Science-table CSV: replicate full assignments instead "
                       "of sampling counts");

  // verify
  VerifyOptions verify_options;
  bool verify_exhaustive = false;
  std::vector<std::int64_t> verify_margins;
  CLI::App* verify = app.add_subcommand(
      "verify", "Exhaustive/fuzzed property verification at one (K, N)");
  verify->add_option("--k", verify_options.factors, "Number of factors")
      ->required();
  verify->add_option("--n", verify_options.units, "Unit count N")->required();
  verify->add_flag("--exhaustive", verify_exhaustive,
                   "Check every binary science table");
  verify->add_option("--fuzz", verify_options.fuzz_count,
                     "Number of random tables");
  verify->add_option("--seed", verify_options.seed, "Fuzz seed");
  verify->add_option("--margins", verify_margins,
                     "Margins N_1,..,N_J for the sharpness check")
      ->delimiter(',');
  verify->add_option("--cap", verify_options.assignment_cap,
                     "Enumeration cap (assignments and couplings)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 1;
  }

  try {
    if (design->parsed()) {
      return run_design(design_factors, design_format);
    }
    if (analyze_cmd->parsed()) {
      return run_analyze(analyze_input, analyze_factors, analyze_aggregated,
                         analyze_level, analyze_format);
    }
    if (simulate->parsed()) {
      return run_simulate(sim);
    }
    if (verify->parsed()) {
      verify_options.exhaustive = verify_exhaustive;
      if (!verify_exhaustive && verify_options.fuzz_count <= 0) {
        std::cerr << "verify: choose --exhaustive or --fuzz R\n";
        return 1;
      }
      if (!verify_margins.empty()) {
        verify_options.margins = verify_margins;
      }
      verify_options.coupling_cap = verify_options.assignment_cap;
      return run_verify(verify_options);
    }
  } catch (const EnumerationCapError& error) {
    std::cerr << "refused: " << error.what() << '\n';
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 0;
}
