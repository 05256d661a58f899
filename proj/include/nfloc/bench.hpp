#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nfloc/baselines.hpp"
#include "nfloc/music.hpp"
#include "nfloc/scenario.hpp"

namespace nfloc {

enum class Method { proposed, dense, farfield, subarray };

const char* to_string(Method method);
Method method_from_string(const std::string& name);
/// Comma-separated list, e.g. "proposed,dense".
std::vector<Method> parse_methods(const std::string& list);

struct Estimate {
  double theta_deg = 0.0;
  std::optional<double> range_m;  ///< absent for angle-only methods
};

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (estimate, truth)
  std::vector<std::size_t> unmatched_estimates;
  std::vector<std::size_t> unmatched_truth;
  double cost = 0.0;
};

/// Minimum-cost one-to-one assignment (Hungarian method) under
/// cost = |dtheta| + range_weight * |dr| / range_scale. The range term is
/// dropped for estimates without a range.
Matching associate(const std::vector<Estimate>& estimates, const std::vector<Target>& truth,
                   double range_scale, double range_weight = 1.0);

/// Squared-error accumulator over matched pairs.
struct RmseAccumulator {
  double theta_sq = 0.0;
  std::size_t theta_count = 0;
  double range_sq = 0.0;
  std::size_t range_count = 0;

  void add(double theta_err_deg, std::optional<double> range_err_m);
  void merge(const RmseAccumulator& other);
  std::optional<double> theta_rmse() const;
  std::optional<double> range_rmse() const;
};

/// RMSE over explicit error lists (degrees, metres).
std::pair<std::optional<double>, std::optional<double>> rmse(
    const std::vector<double>& theta_errors_deg, const std::vector<double>& range_errors_m);

struct MonteCarloConfig {
  Scenario scenario;
  std::size_t trials = 100;
  std::vector<double> snr_db{10.0};
  std::vector<Method> methods{Method::proposed};
  std::uint64_t base_seed = 1;
  LocalizerConfig localizer;  ///< num_targets and range_bounds are filled from the scenario
  unsigned threads = 0;       ///< 0 = hardware concurrency
  double range_weight = 1.0;
  double angle_gate_deg = 2.0;
  double range_gate_fraction = 0.1;  ///< of Z_R
};

struct TrialRecord {
  Method method = Method::proposed;
  double snr_db = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<Estimate> estimates;
  std::size_t candidates = 0;
  bool detected = false;  ///< every truth matched inside the gates, no extra estimate
  RmseAccumulator errors;
};

struct RmseRow {
  Method method = Method::proposed;
  double snr_db = 0.0;
  std::optional<double> theta_rmse_deg;
  std::optional<double> r_rmse_m;
  double detection_rate = 0.0;
  double mean_candidates = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

struct RmseReport {
  std::vector<RmseRow> rows;          ///< method-major, then SNR in config order
  std::vector<TrialRecord> records;   ///< same order, trials ascending

  const RmseRow& row(Method method, double snr_db) const;
};

/// Runs one trial. Exceptions from the pipeline are captured in the record.
TrialRecord run_trial(const MonteCarloConfig& config, Method method, double snr_db,
                      std::size_t trial);

RmseReport run_monte_carlo(const MonteCarloConfig& config);

void write_report_csv(const RmseReport& report, std::ostream& out);
void write_trials_jsonl(const RmseReport& report, std::ostream& out);

/// Parses "lo:step:hi" or a comma-separated list of SNR values.
std::vector<double> parse_snr_list(const std::string& spec);

}  // namespace nfloc
