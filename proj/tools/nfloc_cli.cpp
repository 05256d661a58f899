// nfloc: command-line front end for the coprime near-field localiser.
//
//   nfloc geometry   --m 9 --n 11 [--freq-ghz 30] [--d-mm 2.5] [--format json|table]
//   nfloc simulate   --scenario s.json --out y.csv [--format csv|bin]
//   nfloc spectrum   --scenario s.json --out-dir dir [--dump-covariance]
//   nfloc montecarlo --scenario s.json --snr -10:5:20 --q 100 --methods ... --out report.csv

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "nfloc/baselines.hpp"
#include "nfloc/bench.hpp"
#include "nfloc/kernels.hpp"
#include "nfloc/music.hpp"
#include "nfloc/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nfloc;

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ValidationError(fmt::format("cannot write {}", path.string()));
  return out;
}

int cmd_geometry(int m, int n, std::optional<double> d_mm, double freq_ghz,
                 const std::string& format) {
  const double lambda = wavelength_from_frequency(freq_ghz * 1e9);
  const double d = d_mm ? *d_mm * 1e-3 : lambda / 4.0;
  const SensorLayout layout = build_coprime_layout({m, n, d, lambda});
  const CoarrayLayout co = difference_coarray(layout);
  const auto [mm, nn] = layout.coprime_pair();
  const TargetCapacity cap = max_targets(mm, nn);
  for (const auto& msg : layout.diagnostics()) fmt::print(stderr, "warning: {}\n", msg);

  if (format == "json") {
    json j;
    j["M"] = mm;
    j["N"] = nn;
    j["sensors"] = layout.size();
    j["spacing_m"] = d;
    j["wavelength_m"] = lambda;
    j["indices"] = std::vector<int>(layout.indices().begin(), layout.indices().end());
    j["aperture_m"] = layout.aperture();
    j["fresnel_distance_m"] = layout.fresnel_distance();
    j["rayleigh_distance_m"] = layout.rayleigh_distance();
    j["coarray_run_half_width"] = co.run_half_width;
    j["segment_length"] = co.segment_length();
    j["max_targets_virtual"] = cap.virtual_array;
    j["max_targets_subarray"] = cap.subarray;
    std::cout << j.dump(2) << '\n';
  } else if (format == "table") {
    fmt::print("M, N                 {}, {}\n", mm, nn);
    fmt::print("sensors U            {}\n", layout.size());
    fmt::print("aperture [m]         {:.6f}\n", layout.aperture());
    fmt::print("Z_F, Z_R [m]         {:.6f}, {:.6f}\n", layout.fresnel_distance(),
               layout.rayleigh_distance());
    fmt::print("coarray run          [-{0}, {0}]\n", co.run_half_width);
    fmt::print("K_v, K_p             {}, {}\n", cap.virtual_array, cap.subarray);
    fmt::print("\n{:>6} {:>8} {:>12}\n", "sensor", "index", "position_m");
    for (std::size_t i = 0; i < layout.size(); ++i) {
      fmt::print("{:>6} {:>8} {:>12.6f}\n", i, layout.index(i), layout.position(i));
    }
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", format));
  }
  return 0;
}

SnapshotSet simulate_scenario(const Scenario& sc, std::optional<double> snr,
                              std::optional<std::uint64_t> seed, const SensorLayout& layout) {
  for (const auto& msg : check_fresnel_region(layout, sc.targets)) {
    fmt::print(stderr, "warning: {}\n", msg);
  }
  return synthesize(layout, sc.targets, sc.snapshots, snr.value_or(sc.snr_db),
                    seed.value_or(sc.seed), sc.model);
}

int cmd_simulate(const Scenario& sc, std::optional<double> snr, std::optional<std::uint64_t> seed,
                 const fs::path& out_path, const std::string& format) {
  const SensorLayout layout = sc.coprime_layout();
  const SnapshotSet s = simulate_scenario(sc, snr, seed, layout);
  if (format == "csv") {
    std::ofstream out = open_out(out_path);
    out << "sensor,t,re,im\n";
    for (Eigen::Index t = 0; t < s.y.cols(); ++t) {
      for (Eigen::Index u = 0; u < s.y.rows(); ++u) {
        out << fmt::format("{},{},{:.17g},{:.17g}\n", u, t, s.y(u, t).real(), s.y(u, t).imag());
      }
    }
  } else if (format == "bin") {
    // "NFLS", u32 version, u64 rows, u64 cols, then column-major (re, im) doubles.
    std::ofstream out = open_out(out_path, true);
    const std::uint32_t version = 1;
    const std::uint64_t rows = static_cast<std::uint64_t>(s.y.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(s.y.cols());
    out.write("NFLS", 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(s.y.data()),
              static_cast<std::streamsize>(rows * cols * sizeof(Complex)));
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", format));
  }
  return 0;
}

void write_spectrum_csv(const fs::path& path, const char* axis_name, const PseudoSpectrum& s) {
  std::ofstream out = open_out(path);
  out << axis_name << ",p_db\n";
  const std::vector<double> db = s.db();
  for (std::size_t i = 0; i < db.size(); ++i) out << fmt::format("{:.6f},{:.9f}\n", s.axis[i], db[i]);
}

void write_matrix_csv(const fs::path& path, const CMatrix& m) {
  std::ofstream out = open_out(path);
  out << "row,col,re,im\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << fmt::format("{},{},{:.17g},{:.17g}\n", i, j, m(i, j).real(), m(i, j).imag());
    }
  }
}

int cmd_spectrum(const Scenario& sc, std::optional<double> snr, std::optional<std::uint64_t> seed,
                 const fs::path& out_dir, LocalizerConfig config, bool declare_k,
                 bool dump_covariance) {
  const SensorLayout layout = sc.coprime_layout();
  const SnapshotSet s = simulate_scenario(sc, snr, seed, layout);
  if (declare_k) config.num_targets = static_cast<int>(sc.targets.size());
  const CMatrix r_hat = estimate_covariance(s, config.covariance.estimator);
  const LocalizationResult r = localize_covariance(r_hat, layout, config);

  fs::create_directories(out_dir);
  write_spectrum_csv(out_dir / "angle_spectrum.csv", "theta_deg", r.angle_spectrum);
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    write_spectrum_csv(out_dir / fmt::format("range_spectrum_{:02d}.csv", c), "range_m",
                       r.candidates[c].range_spectrum);
  }
  if (dump_covariance) {
    const CovarianceBundle b = build_covariance_bundle(r_hat, layout, config.covariance);
    write_matrix_csv(out_dir / "r_hat.csv", b.r_hat);
    write_matrix_csv(out_dir / "r_decoupled.csv", b.r_decoupled);
    write_matrix_csv(out_dir / "r_virtual.csv", b.r_virtual);
  }

  json j;
  j["sensors"] = layout.size();
  j["fresnel_distance_m"] = layout.fresnel_distance();
  j["rayleigh_distance_m"] = layout.rayleigh_distance();
  j["phase1_signal_dim"] = r.phase1_signal_dim;
  j["phase2_signal_dim"] = r.phase2_signal_dim;
  j["candidates"] = json::array();
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    j["candidates"].push_back({{"index", c},
                               {"theta_deg", r.candidates[c].theta_deg},
                               {"angle_db", r.candidates[c].angle_value_db},
                               {"range_csv", fmt::format("range_spectrum_{:02d}.csv", c)}});
  }
  j["targets"] = json::array();
  for (const ClassifiedTarget& t : r.classified) {
    j["targets"].push_back({{"theta_deg", t.theta_deg},
                            {"range_m", t.range_m},
                            {"label", to_string(t.label)},
                            {"significance_db", t.significance_db},
                            {"candidate", t.candidate}});
  }
  std::ofstream out = open_out(out_dir / "result.json");
  out << j.dump(2) << '\n';

  for (const ClassifiedTarget& t : r.true_targets()) {
    fmt::print("target  theta {:8.3f} deg  range {:8.3f} m  {:6.1f} dB\n", t.theta_deg, t.range_m,
               t.significance_db);
  }
  return 0;
}

int cmd_montecarlo(MonteCarloConfig mc, const fs::path& out_path, const std::string& raw_path) {
  const RmseReport report = run_monte_carlo(mc);
  std::size_t failures = 0;
  for (const RmseRow& row : report.rows) failures += row.failures;
  {
    std::ofstream out = open_out(out_path);
    write_report_csv(report, out);
  }
  if (!raw_path.empty()) {
    std::ofstream raw = open_out(raw_path);
    write_trials_jsonl(report, raw);
  }
  write_report_csv(report, std::cout);
  if (failures) fmt::print(stderr, "{} trial(s) failed; see the raw dump for messages\n", failures);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field multi-target localisation with symmetric coprime arrays"};
  app.require_subcommand(1);

  int m = 0, n = 0;
  std::optional<double> d_mm;
  double freq_ghz = 30.0;
  std::string format = "json";
  auto* geo = app.add_subcommand("geometry", "Print the coprime layout and its limits");
  geo->add_option("--m", m, "Sensors-per-subarray parameter M")->required();
  geo->add_option("--n", n, "Sensors-per-subarray parameter N")->required();
  geo->add_option("--d-mm", d_mm, "Unit spacing d in mm (default: quarter wavelength)");
  geo->add_option("--freq-ghz", freq_ghz, "Carrier frequency in GHz")->capture_default_str();
  geo->add_option("--format", format, "json or table")->capture_default_str();

  std::string scenario_path;
  std::optional<double> snr;
  std::optional<std::uint64_t> seed;
  fs::path out_path;
  std::string sim_format = "csv";
  auto* sim = app.add_subcommand("simulate", "Write received snapshots for a scenario");
  sim->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--snr", snr, "Override the scenario SNR [dB]");
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_option("--out", out_path, "Output file")->required();
  sim->add_option("--format", sim_format, "csv or bin")->capture_default_str();

  LocalizerConfig config;
  bool unknown_k = false;
  bool dump_cov = false;
  std::string range_model = "fresnel";
  fs::path out_dir;
  auto* spec = app.add_subcommand("spectrum", "Run the two-phase localiser on one realisation");
  spec->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  spec->add_option("--snr", snr, "Override the scenario SNR [dB]");
  spec->add_option("--seed", seed, "Override the scenario seed");
  spec->add_option("--out-dir", out_dir, "Directory for CSV and JSON outputs")->required();
  spec->add_option("--angle-step", config.angle_step_deg, "Angle grid step [deg]")->capture_default_str();
  spec->add_option("--range-step", config.range_step_m, "Range grid step [m]")->capture_default_str();
  spec->add_option("--significance-db", config.significance_db, "Range peak threshold [dB]")
      ->capture_default_str();
  spec->add_option("--range-model", range_model, "fresnel or exact")->capture_default_str();
  spec->add_flag("--unknown-k", unknown_k, "Do not declare the target count");
  spec->add_flag("--dump-covariance", dump_cov, "Also write R_hat, R_d and the smoothed matrix");

  MonteCarloConfig mc;
  std::string snr_spec = "-10:5:20";
  std::string methods = "proposed,dense,farfield,subarray";
  std::string raw_path;
  std::size_t q = 100;
  auto* bench = app.add_subcommand("montecarlo", "RMSE sweep over SNR and methods");
  bench->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--snr", snr_spec, "lo:step:hi or comma list [dB]")->capture_default_str();
  bench->add_option("--q", q, "Trials per (method, SNR)")->capture_default_str();
  bench->add_option("--methods", methods, "Comma list of proposed,dense,farfield,subarray")
      ->capture_default_str();
  bench->add_option("--seed", mc.base_seed, "Base seed; trial q uses seed + q")->capture_default_str();
  bench->add_option("--threads", mc.threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_option("--out", out_path, "Report CSV")->required();
  bench->add_option("--raw", raw_path, "Per-trial JSON lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (geo->parsed()) return cmd_geometry(m, n, d_mm, freq_ghz, format);
    const Scenario sc = load_scenario(scenario_path);
    if (sim->parsed()) return cmd_simulate(sc, snr, seed, out_path, sim_format);
    if (spec->parsed()) {
      config.range_model = wavefront_model_from_string(range_model);
      return cmd_spectrum(sc, snr, seed, out_dir, config, !unknown_k, dump_cov);
    }
    if (bench->parsed()) {
      mc.scenario = sc;
      mc.trials = q;
      mc.snr_db = parse_snr_list(snr_spec);
      mc.methods = parse_methods(methods);
      return cmd_montecarlo(mc, out_path, raw_path);
    }
  } catch (const ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 3;
  }
  return 0;
}
