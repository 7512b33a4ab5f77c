#include "neyman2k/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace neyman2k {

namespace {

using nlohmann::json;

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_error(int line_number, const std::string& message) {
  throw std::runtime_error("csv line " + std::to_string(line_number) + ": " +
                           message);
}

long parse_int(const std::string& field, int line_number) {
  std::string text = field;
  if (!text.empty() && text.front() == '+') {
    text.erase(text.begin());
  }
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_error(line_number, "expected an integer, got \"" + field + "\"");
  }
  return value;
}

/// Reads lines, skipping blank ones, tracking the line number.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      if (trim(line).empty()) {
        continue;
      }
      fields = split_csv_line(line);
      return true;
    }
    return false;
  }

  int line_number() const { return line_number_; }

 private:
  std::istream& in_;
  int line_number_ = 0;
};

json effect_to_json(const EffectAnalysis& effect) {
  return json{{"label", effect.label},
              {"estimate", effect.estimate},
              {"var_classic", effect.var_classic},
              {"correction", effect.correction},
              {"var_improved", effect.var_improved},
              {"clamped", effect.clamped},
              {"ci_lower", effect.ci_lower},
              {"ci_upper", effect.ci_upper}};
}

}  // namespace

PotentialOutcomeTable load_science_table(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw std::runtime_error("science table: missing header row");
  }
  // Locate y_arm1..y_armJ; any other column is ignored.
  std::vector<int> arm_column;  // arm index -> field index
  for (std::size_t field = 0; field < header.size(); ++field) {
    const std::string& name = header[field];
    if (name.rfind("y_arm", 0) != 0) {
      continue;
    }
    const long arm = parse_int(name.substr(5), reader.line_number());
    if (arm < 1) {
      parse_error(reader.line_number(), "arm numbers start at 1");
    }
    if (arm_column.size() < static_cast<std::size_t>(arm)) {
      arm_column.resize(arm, -1);
    }
    if (arm_column[arm - 1] != -1) {
      parse_error(reader.line_number(), "duplicate column " + name);
    }
    arm_column[arm - 1] = static_cast<int>(field);
  }
  if (arm_column.empty()) {
    throw std::runtime_error("science table: no y_arm columns in header");
  }
  for (std::size_t arm = 0; arm < arm_column.size(); ++arm) {
    if (arm_column[arm] == -1) {
      throw std::runtime_error("science table: missing column y_arm" +
                               std::to_string(arm + 1));
    }
  }

  const int arms = static_cast<int>(arm_column.size());
  std::vector<std::uint8_t> outcomes;
  std::vector<std::string> fields;
  int units = 0;
  while (reader.next(fields)) {
    if (fields.size() < header.size()) {
      parse_error(reader.line_number(), "row has fewer fields than the header");
    }
    for (int arm = 0; arm < arms; ++arm) {
      const long value = parse_int(fields[arm_column[arm]], reader.line_number());
      if (value != 0 && value != 1) {
        parse_error(reader.line_number(), "outcomes must be 0 or 1");
      }
      outcomes.push_back(static_cast<std::uint8_t>(value));
    }
    ++units;
  }
  if (units == 0) {
    throw std::runtime_error("science table: no unit rows");
  }
  return {units, arms, std::move(outcomes)};
}

PotentialOutcomeTable load_science_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return load_science_table(in);
}

void save_science_table(const PotentialOutcomeTable& table, std::ostream& out) {
  for (int arm = 1; arm <= table.arms(); ++arm) {
    out << (arm == 1 ? "" : ",") << "y_arm" << arm;
  }
  out << '\n';
  for (int unit = 0; unit < table.units(); ++unit) {
    for (int arm = 0; arm < table.arms(); ++arm) {
      out << (arm == 0 ? "" : ",") << table.outcome(unit, arm);
    }
    out << '\n';
  }
}

ObservedData load_aggregated_counts(std::istream& in, int expected_arms) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) ||
      fields != std::vector<std::string>{"arm", "n", "n_obs"}) {
    throw std::runtime_error("aggregated counts: header must be arm,n,n_obs");
  }
  std::vector<ObservedData::Arm> arms;
  while (reader.next(fields)) {
    if (fields.size() != 3) {
      parse_error(reader.line_number(), "expected 3 fields");
    }
    const long arm = parse_int(fields[0], reader.line_number());
    if (arm != static_cast<long>(arms.size()) + 1) {
      parse_error(reader.line_number(),
                  "arms must appear in order 1..J (expected " +
                      std::to_string(arms.size() + 1) + ")");
    }
    const long assigned = parse_int(fields[1], reader.line_number());
    const long successes = parse_int(fields[2], reader.line_number());
    if (assigned < 2) {
      parse_error(reader.line_number(), "every arm requires n >= 2");
    }
    if (successes < 0 || successes > assigned) {
      parse_error(reader.line_number(), "n_obs must lie in [0, n]");
    }
    arms.push_back({static_cast<int>(assigned), static_cast<int>(successes)});
  }
  if (static_cast<int>(arms.size()) != expected_arms) {
    throw std::runtime_error("aggregated counts: expected " +
                             std::to_string(expected_arms) + " arms, found " +
                             std::to_string(arms.size()));
  }
  return ObservedData(std::move(arms));
}

ObservedData load_unit_level(std::istream& in, const ModelMatrix& matrix) {
  const int factors = matrix.factors();
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw std::runtime_error("unit-level data: missing header row");
  }
  std::vector<std::string> expected;
  for (int k = 1; k <= factors; ++k) {
    expected.push_back("f" + std::to_string(k));
  }
  expected.push_back("outcome");
  if (header != expected) {
    throw std::runtime_error(
        "unit-level data: header must be f1..fK,outcome for K = " +
        std::to_string(factors));
  }

  std::vector<ObservedData::Arm> arms(matrix.arms());
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != expected.size()) {
      parse_error(reader.line_number(), "wrong field count");
    }
    int arm_index = 0;
    for (int k = 1; k <= factors; ++k) {
      const long level = parse_int(fields[k - 1], reader.line_number());
      if (level != -1 && level != 1) {
        parse_error(reader.line_number(), "factor levels must be -1 or 1");
      }
      if (level == 1) {
        arm_index += 1 << (factors - k);
      }
    }
    const long outcome = parse_int(fields[factors], reader.line_number());
    if (outcome != 0 && outcome != 1) {
      parse_error(reader.line_number(), "outcomes must be 0 or 1");
    }
    arms[arm_index].assigned += 1;
    arms[arm_index].successes += static_cast<int>(outcome);
  }
  for (int arm = 0; arm < matrix.arms(); ++arm) {
    if (arms[arm].assigned < 2) {
      throw std::runtime_error(
          "unit-level data: arm " + std::to_string(arm + 1) +
          " has fewer than two units (unobserved arms are not allowed)");
    }
  }
  return ObservedData(std::move(arms));
}

std::string analysis_report_json(const std::vector<EffectAnalysis>& effects,
                                 const ModelMatrix& matrix,
                                 const ObservedData& observed) {
  json report;
  json design{{"K", matrix.factors()},
              {"N", observed.units()},
              {"seed", nullptr}};
  json arm_sizes = json::array();
  for (int arm = 0; arm < observed.arms(); ++arm) {
    arm_sizes.push_back(observed.arm(arm).assigned);
  }
  design["n"] = std::move(arm_sizes);
  report["design"] = std::move(design);

  json rows = json::array();
  for (const EffectAnalysis& effect : effects) {
    rows.push_back(effect_to_json(effect));
  }
  report["effects"] = std::move(rows);
  return report.dump(2);
}

std::string simulation_summary_json(const RatioSummary& summary) {
  json config{{"k", summary.config.factors},
              {"units", summary.config.units},
              {"n", summary.arm_sizes},
              {"reps", summary.config.replications},
              {"seed", summary.config.seed},
              {"effect", summary.config.effect},
              {"workers", summary.config.workers}};
  if (summary.config.obs_max) {
    config["obs_max"] = *summary.config.obs_max;
  } else {
    config["obs_max"] = nullptr;
  }
  json doc{{"config", std::move(config)},
           {"min", summary.min},
           {"max", summary.max},
           {"mean", summary.mean},
           {"frac_improvement_gt_10pct", summary.frac_improvement_gt_10pct},
           {"n_clamped", summary.clamped_count},
           {"n_truncated", summary.truncated_count}};
  return doc.dump(2);
}

std::string table_simulation_summary_json(const TableSimSummary& summary,
                                          const TableSimConfig& config) {
  json doc{{"config",
            {{"k", config.factors},
             {"reps", config.replications},
             {"seed", config.seed},
             {"effect", config.effect},
             {"workers", config.workers}}},
           {"mean_estimate", summary.mean_estimate},
           {"mean_var_classic", summary.mean_var_classic},
           {"mean_var_improved", summary.mean_var_improved},
           {"tau_bar", to_string(summary.tau_bar)},
           {"sampling_variance", to_string(summary.sampling_variance)},
           {"conservative_bias", to_string(summary.conservative_bias)}};
  return doc.dump(2);
}

}  // namespace neyman2k
