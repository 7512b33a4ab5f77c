#include "neyman2k/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "neyman2k/rng.hpp"

namespace neyman2k {

namespace {

void format_double(std::ostream& out, double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  out << buffer;
}

/// Splits [0, total) into contiguous chunks, one per worker, and runs
/// `body(chunk, begin, end)` on each, in parallel when workers > 1.
/// Replicate-level seeding makes the partition unobservable in the
/// results. Returns the number of chunks.
int parallel_chunks(int total, int workers,
                    const std::function<void(int, int, int)>& body) {
  const int used = std::max(1, std::min(workers, total));
  if (used == 1) {
    body(0, 0, total);
    return 1;
  }
  std::vector<std::thread> threads;
  threads.reserve(used);
  for (int w = 0; w < used; ++w) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(total) * w / used);
    const int end =
        static_cast<int>(static_cast<std::int64_t>(total) * (w + 1) / used);
    threads.emplace_back([&body, w, begin, end] { body(w, begin, end); });
  }
  for (auto& thread : threads) {
    thread.join();
  }
  return used;
}

}  // namespace

std::vector<int> SimConfig::resolved_arm_sizes() const {
  const int arm_count = 1 << factors;
  if (!arm_sizes.empty()) {
    if (static_cast<int>(arm_sizes.size()) != arm_count) {
      throw std::invalid_argument("arm size list must have 2^K entries");
    }
    return arm_sizes;
  }
  if (units % arm_count != 0) {
    throw std::invalid_argument(
        "balanced design requires the unit count to be divisible by 2^K");
  }
  return std::vector<int>(arm_count, units / arm_count);
}

void SimConfig::validate() const {
  if (factors < 1) {
    throw std::invalid_argument("factor count must be at least 1");
  }
  if (replications < 1) {
    throw std::invalid_argument("at least one replication is required");
  }
  if (workers < 1) {
    throw std::invalid_argument("worker count must be positive");
  }
  if (effect < 1 || effect >= (1 << factors)) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }
  if (obs_max && *obs_max < 0) {
    throw std::invalid_argument("observed-count bound must be non-negative");
  }
  // Design's constructor enforces n_j >= 2 and the sum constraint.
  Design design(units, resolved_arm_sizes());
}

RatioSummary run_ratio_simulation(const SimConfig& config) {
  config.validate();
  const std::vector<int> arm_sizes = config.resolved_arm_sizes();
  const int arm_count = static_cast<int>(arm_sizes.size());
  const ModelMatrix matrix(config.factors);
  const auto& column = matrix.column(config.effect);
  const int replications = config.replications;

  std::vector<double> ratios(replications);
  const int used_workers = std::max(1, std::min(config.workers, replications));
  std::vector<std::int64_t> clamped_per_worker(used_workers, 0);
  std::vector<std::int64_t> truncated_per_worker(used_workers, 0);

  parallel_chunks(replications, config.workers, [&](int slot, int begin, int end) {
    std::int64_t clamped = 0;
    std::int64_t truncated = 0;
    for (int r = begin; r < end; ++r) {
      RandomEngine engine(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      double tau_dot = 0.0;
      double classic_sum = 0.0;
      for (int arm = 0; arm < arm_count; ++arm) {
        const int bound = config.obs_max ? *config.obs_max : arm_sizes[arm];
        std::int64_t draw = static_cast<std::int64_t>(
            uniform_below(engine, static_cast<std::uint64_t>(bound) + 1));
        if (draw > arm_sizes[arm]) {
          draw = arm_sizes[arm];
          ++truncated;
        }
        const double p = static_cast<double>(draw) / arm_sizes[arm];
        tau_dot += column[arm] * p;
        classic_sum += p * (1.0 - p) / (arm_sizes[arm] - 1);
      }
      const double tau_hat = std::ldexp(tau_dot, -(config.factors - 1));
      const double classic = std::ldexp(classic_sum, -2 * (config.factors - 1));
      const double correction =
          improvement_correction(tau_hat, config.factors, config.units);
      double ratio;
      if (classic > 0.0) {
        const double improved = classic - correction;
        if (improved < 0.0) {
          ++clamped;
          ratio = 0.0;
        } else {
          ratio = improved / classic;
        }
      } else if (correction == 0.0) {
        ratio = 1.0;
      } else {
        ++clamped;
        ratio = 0.0;
      }
      ratios[r] = ratio;
    }
    clamped_per_worker[slot] = clamped;
    truncated_per_worker[slot] = truncated;
  });

  RatioSummary summary;
  summary.config = config;
  summary.arm_sizes = arm_sizes;
  summary.ratios = std::move(ratios);
  summary.clamped_count = std::accumulate(clamped_per_worker.begin(),
                                          clamped_per_worker.end(),
                                          std::int64_t{0});
  summary.truncated_count = std::accumulate(truncated_per_worker.begin(),
                                            truncated_per_worker.end(),
                                            std::int64_t{0});
  const auto [min_it, max_it] =
      std::minmax_element(summary.ratios.begin(), summary.ratios.end());
  summary.min = *min_it;
  summary.max = *max_it;
  summary.mean = std::accumulate(summary.ratios.begin(), summary.ratios.end(),
                                 0.0) /
                 replications;
  summary.frac_improvement_gt_10pct =
      static_cast<double>(std::count_if(summary.ratios.begin(),
                                        summary.ratios.end(),
                                        [](double r) { return r < 0.9; })) /
      replications;
  return summary;
}

void write_ratio_csv(const RatioSummary& summary, std::ostream& out) {
  out << "replicate,ratio\n";
  for (std::size_t r = 0; r < summary.ratios.size(); ++r) {
    out << r << ',';
    format_double(out, summary.ratios[r]);
    out << '\n';
  }
}

std::vector<HistogramBin> ratio_histogram(const RatioSummary& summary,
                                          int bins) {
  if (bins < 1) {
    throw std::invalid_argument("histogram requires at least one bin");
  }
  if (summary.ratios.empty()) {
    throw std::invalid_argument("histogram requires at least one replicate");
  }
  const double low = summary.min;
  const double width = (1.0 - low) / bins;
  std::vector<HistogramBin> histogram(bins);
  for (int b = 0; b < bins; ++b) {
    histogram[b].left = low + b * width;
    histogram[b].right = (b + 1 == bins) ? 1.0 : low + (b + 1) * width;
  }
  for (double ratio : summary.ratios) {
    int bin;
    if (width <= 0.0) {
      bin = bins - 1;  // all ratios identical
    } else {
      bin = std::min(bins - 1,
                     static_cast<int>(std::floor((ratio - low) / width)));
    }
    histogram[bin].count += 1;
  }
  return histogram;
}

void write_histogram_csv(const RatioSummary& summary, std::ostream& out,
                         int bins) {
  out << "bin_left,bin_right,count\n";
  for (const HistogramBin& bin : ratio_histogram(summary, bins)) {
    format_double(out, bin.left);
    out << ',';
    format_double(out, bin.right);
    out << ',' << bin.count << '\n';
  }
}

TableSimSummary run_table_simulation(const PotentialOutcomeTable& table,
                                     const TableSimConfig& config) {
  if (config.replications < 1) {
    throw std::invalid_argument("at least one replication is required");
  }
  if (config.workers < 1) {
    throw std::invalid_argument("worker count must be positive");
  }
  const ModelMatrix matrix(config.factors);
  if (matrix.arms() != table.arms()) {
    throw std::invalid_argument("table arm count does not match 2^K");
  }
  if (config.effect < 1 || config.effect >= matrix.arms()) {
    throw std::invalid_argument("effect index must be in 1..J-1");
  }
  std::vector<int> arm_sizes = config.arm_sizes;
  if (arm_sizes.empty()) {
    if (table.units() % table.arms() != 0) {
      throw std::invalid_argument(
          "balanced design requires the unit count to be divisible by 2^K");
    }
    arm_sizes.assign(table.arms(), table.units() / table.arms());
  }
  const Design design(table.units(), arm_sizes);

  TableSimSummary summary;
  summary.replicates.resize(config.replications);
  parallel_chunks(config.replications, config.workers,
                  [&](int /*slot*/, int begin, int end) {
    for (int r = begin; r < end; ++r) {
      const Assignment assignment = complete_randomization(
          design, derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      const ObservedData observed = observe(table, assignment);
      const double tau_hat =
          estimate_effects(observed, matrix)[config.effect - 1];
      const double classic = variance_classic(observed, config.factors);
      const ImprovedVariance improved =
          variance_improved(classic, tau_hat, config.factors, design.units);
      summary.replicates[r] = {tau_hat, classic, improved.value};
    }
  });

  for (const TableSimReplicate& replicate : summary.replicates) {
    summary.mean_estimate += replicate.estimate;
    summary.mean_var_classic += replicate.var_classic;
    summary.mean_var_improved += replicate.var_improved;
  }
  summary.mean_estimate /= config.replications;
  summary.mean_var_classic /= config.replications;
  summary.mean_var_improved /= config.replications;

  summary.tau_bar =
      population_effects(table, matrix).tau_bar(config.effect);
  summary.sampling_variance =
      true_sampling_variance(table, matrix, design.arm_sizes, config.effect);
  summary.conservative_bias =
      s2_effect_direct(table, matrix, config.effect) / table.units();
  return summary;
}

void write_table_sim_csv(const TableSimSummary& summary, std::ostream& out) {
  out << "replicate,estimate,var_classic,var_improved\n";
  for (std::size_t r = 0; r < summary.replicates.size(); ++r) {
    const TableSimReplicate& row = summary.replicates[r];
    out << r << ',';
    format_double(out, row.estimate);
    out << ',';
    format_double(out, row.var_classic);
    out << ',';
    format_double(out, row.var_improved);
    out << '\n';
  }
}

}  // namespace neyman2k
