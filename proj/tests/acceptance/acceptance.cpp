// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 4          run criterion 4 only
//
// Exit status is non-zero when any selected criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "nfloc/baselines.hpp"
#include "nfloc/bench.hpp"
#include "nfloc/music.hpp"
#include "nfloc/scenario.hpp"
#include "oracles.hpp"

#ifndef NFLOC_CLI_PATH
#error "NFLOC_CLI_PATH must point at the nfloc executable"
#endif

namespace fs = std::filesystem;
using namespace nfloc;

namespace {

// Pinned tolerances and budgets.
constexpr double kC1Seconds = 1.0;
constexpr double kC2Tol = 1e-9;
constexpr double kC2Seconds = 10.0;
constexpr double kC3Tol = 1e-6;
constexpr double kC4MinRate = 0.90;
constexpr std::size_t kC4Trials = 100;
constexpr double kC4Seconds = 600.0;
constexpr double kC4AngleGateDeg = 2.0;
constexpr double kC4RangeGateFraction = 0.1;  // of Z_R
constexpr std::size_t kC5Trials = 100;
constexpr double kC5FarFieldRatio = 5.0;
constexpr double kC6AngleGateDeg = 3.0;
constexpr double kC6RangeGateFraction = 0.1;
constexpr double kC6Seconds = 60.0;

const double kLambda = wavelength_from_frequency(30e9);
const double kD = kLambda / 4.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Counts truths matched one-to-one within the gates, plus estimates left over.
std::pair<int, int> gated_hits(const std::vector<ClassifiedTarget>& found,
                               const std::vector<Target>& truth, double range_scale,
                               double angle_gate, double range_gate) {
  std::vector<Estimate> e;
  for (const auto& f : found) e.push_back({f.theta_deg, f.range_m});
  const Matching m = associate(e, truth, range_scale);
  int hits = 0;
  for (const auto& [a, b] : m.pairs) {
    if (std::abs(e[a].theta_deg - rad_to_deg(truth[b].theta)) <= angle_gate &&
        std::abs(*e[a].range_m - truth[b].range) <= range_gate) {
      ++hits;
    }
  }
  return {hits, static_cast<int>(e.size()) - hits};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int pairs = 0;
  for (int n = 2; n <= 12; ++n) {
    for (int m = 1; m < n; ++m) {
      if (std::gcd(m, n) != 1) continue;
      ++pairs;
      const SensorLayout l = build_coprime_layout({m, n, kD, kLambda});
      const auto expect = oracle::coprime_indices(m, n);
      const std::string tag = fmt::format("(M={},N={})", m, n);
      require(o, std::vector<int>(l.indices().begin(), l.indices().end()) == expect, tag + " layout");
      bool sym = l.is_symmetric();
      for (std::size_t i = 0; i < l.size(); ++i) sym = sym && l.index(l.mirror(i)) == -l.index(i);
      require(o, sym, tag + " symmetry");
      const int h = oracle::consecutive_half_width(expect);
      require(o, 2 * h + 1 >= 2 * m * n + 1, tag + " brute-force segment");
      require(o, difference_coarray(l).run_half_width == h, tag + " coarray run");
      const TargetCapacity cap = max_targets(m, n);
      require(o, cap.virtual_array == oracle::capacity_virtual(m, n), tag + " K_v");
      require(o, cap.subarray == std::min(m, n), tag + " K_p");
    }
  }
  const SensorLayout ref = build_coprime_layout({9, 11, kD, kLambda});
  const TargetCapacity cap = max_targets(9, 11);
  require(o, ref.size() == 37 && cap.virtual_array == 13 && cap.subarray == 9, "reference (9, 11)");
  const double dt = seconds_since(t0);
  require(o, dt < kC1Seconds, "runtime");
  o.detail = fmt::format("{} pairs, U=37 K_v={} K_p={}, {:.3f} s{}{}", pairs, cap.virtual_array,
                         cap.subarray, dt, o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31);
  const std::vector<std::pair<int, int>> pairs{{2, 3}, {3, 4}, {3, 5}, {4, 5}, {5, 7}, {9, 11}};
  double e_sum = 0.0, e_mirror = 0.0, e_anti = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [m, n] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
    const SensorLayout l = build_coprime_layout({m, n, kD, kLambda});
    const int k = std::uniform_int_distribution<int>(1, 4)(rng);
    std::uniform_real_distribution<double> ang(-1.3, 1.3), rr(l.fresnel_distance(), l.rayleigh_distance());
    std::vector<oracle::Src> t;
    for (int i = 0; i < k; ++i) t.push_back({ang(rng), rr(rng)});
    const std::vector<double> pos = l.positions();
    const CMatrix r = oracle::population_covariance(pos, t, kLambda);
    const Decoupled d = decouple(r, l);
    const Eigen::Index u = r.rows();
    for (Eigen::Index i = 0; i < u; ++i) {
      for (Eigen::Index j = 0; j < u; ++j) {
        const double si = pos[static_cast<std::size_t>(i)], sj = pos[static_cast<std::size_t>(j)];
        auto pq = [&](const oracle::Src& s) {
          const double c2 = std::cos(s.theta) * std::cos(s.theta);
          return std::pair{-2.0 * oracle::pi / kLambda * (si - sj) * std::sin(s.theta),
                           oracle::pi / (kLambda * s.r) * (si * si - sj * sj) * c2};
        };
        Complex self(0.0), cross(0.0), ra(0.0);
        for (std::size_t a = 0; a < t.size(); ++a) {
          const auto [pa, qa] = pq(t[a]);
          ra += std::polar(1.0, pa - qa);
          for (std::size_t b = 0; b < t.size(); ++b) {
            const auto [pb, qb] = pq(t[b]);
            if (a == b) self += std::polar(1.0, 2.0 * pa);
            else cross += std::polar(1.0, pa + qa + pb - qb);
          }
        }
        e_sum = std::max(e_sum, std::abs(d.decoupled(i, j) - (self + cross)));
        e_mirror = std::max(e_mirror, std::abs(d.mirrored(i, j) - ra));
      }
    }
    // Anti-diagonal entries must not move when every range changes.
    std::vector<oracle::Src> moved = t;
    for (auto& s : moved) s.r *= 1.9;
    const CMatrix r2 = oracle::population_covariance(pos, moved, kLambda);
    for (Eigen::Index i = 0; i < u; ++i) {
      e_anti = std::max(e_anti, std::abs(r(i, u - 1 - i) - r2(i, u - 1 - i)));
      const auto a = decouple(r, l).decoupled(i, u - 1 - i), b = decouple(r2, l).decoupled(i, u - 1 - i);
      e_anti = std::max(e_anti, std::abs(a - b));
    }
  }
  const double dt = seconds_since(t0);
  require(o, e_sum <= kC2Tol, "self+cross identity");
  require(o, e_mirror <= kC2Tol, "mirror identity");
  require(o, e_anti <= kC2Tol, "anti-diagonal invariance");
  require(o, dt < kC2Seconds, "runtime");
  o.detail = fmt::format("max errors {:.1e} / {:.1e} / {:.1e}, {:.2f} s{}{}", e_sum, e_mirror, e_anti,
                         dt, o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const SensorLayout l = build_coprime_layout({9, 11, kD, kLambda});
  double worst1 = 0.0, worst2 = 0.0, worst_theta = 0.0, worst_r = 0.0;
  bool all_found = true;
  for (auto [deg, range] : {std::pair{-35.0, 25.0}, std::pair{10.0, 30.0}, std::pair{30.0, 20.0},
                            std::pair{-60.0, 5.0}}) {
    const Target t = Target::from_degrees(deg, range);
    const SnapshotSet s = synthesize(l, std::vector<Target>{t}, 100, INFINITY, 11, WavefrontModel::fresnel);
    const CMatrix r = estimate_covariance(s, CovarianceEstimator::ls_known_waveform);
    const CovarianceBundle b = build_covariance_bundle(r, l);
    const VirtualSteering vs{static_cast<std::size_t>(b.r_virtual.rows()), kD, kLambda, 2.0};
    CMatrix p1(vs.length, 1);
    p1.col(0) = vs.at(t.theta);
    worst1 = std::max(worst1, normalized_noise_projection(
                                  split_subspace(eig_hermitian(b.r_virtual), SubspaceRule::fixed(1)), p1)[0]);
    CMatrix p2(static_cast<Eigen::Index>(l.size()), 1);
    p2.col(0) = steering_fresnel(l, t);
    worst2 = std::max(worst2, normalized_noise_projection(
                                  split_subspace(eig_hermitian(r), SubspaceRule::fixed(1)), p2)[0]);

    LocalizerConfig c;
    c.num_targets = 1;
    const LocalizationResult res = localize_covariance(r, l, c);
    const auto found = res.true_targets();
    if (found.size() != 1) {
      all_found = false;
      continue;
    }
    worst_theta = std::max(worst_theta, std::abs(found[0].theta_deg - deg) / c.angle_step_deg);
    worst_r = std::max(worst_r, std::abs(found[0].range_m - range) / (res.grid.ranges_m[1] - res.grid.ranges_m[0]));
  }
  // Phase 2 with several targets: the noise-free LS covariance has range K.
  const std::vector<Target> four{Target::from_degrees(-35, 25), Target::from_degrees(10, 30),
                                 Target::from_degrees(30, 20), Target::from_degrees(30, 40)};
  const SnapshotSet s4 = synthesize(l, four, 100, INFINITY, 11, WavefrontModel::fresnel);
  const Subspace sub4 = split_subspace(eig_hermitian(estimate_covariance(s4, CovarianceEstimator::ls_known_waveform)),
                                       SubspaceRule::fixed(4));
  double worst2k = 0.0;
  for (const Target& t : four) {
    CMatrix p(static_cast<Eigen::Index>(l.size()), 1);
    p.col(0) = steering_fresnel(l, t);
    worst2k = std::max(worst2k, normalized_noise_projection(sub4, p)[0]);
  }
  require(o, worst1 <= kC3Tol, "phase-1 denominator");
  require(o, worst2 <= kC3Tol && worst2k <= kC3Tol, "phase-2 denominator");
  require(o, all_found && worst_theta <= 1.0 && worst_r <= 1.0, "single-target grid accuracy");
  o.detail = fmt::format("phase-1 {:.1e}, phase-2 {:.1e} (K=1) {:.1e} (K=4), error/step {:.2f} deg {:.2f} range{}{}",
                         worst1, worst2, worst2k, worst_theta, worst_r, o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = reference_scenario();
  const SensorLayout l = sc.coprime_layout();
  const double z_r = l.rayleigh_distance();
  std::size_t success = 0, cross_accepted = 0, co_angle_resolved = 0;
  for (std::size_t q = 0; q < kC4Trials; ++q) {
    const SnapshotSet s = synthesize(l, sc.targets, sc.snapshots, 10.0, 1000 + q, sc.model);
    LocalizerConfig c;
    c.num_targets = 4;
    const auto found = localize(s, l, c).true_targets();
    const auto [hits, extra] = gated_hits(found, sc.targets, z_r, kC4AngleGateDeg, kC4RangeGateFraction * z_r);
    int at30 = 0;
    for (const auto& f : found) at30 += std::abs(f.theta_deg - 30.0) <= kC4AngleGateDeg;
    co_angle_resolved += at30 >= 2;
    cross_accepted += extra > 0;
    success += hits == 4 && extra == 0;
  }
  const double rate = static_cast<double>(success) / kC4Trials;
  const double dt = seconds_since(t0);
  require(o, rate >= kC4MinRate, "success rate");
  require(o, dt < kC4Seconds, "runtime");
  o.detail = fmt::format("{}/{} trials with all 4 true, co-angle pair split in {}, trials with an "
                         "accepted cross/spurious target {}, {:.1f} s{}{}",
                         success, kC4Trials, co_angle_resolved, cross_accepted, dt,
                         o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

Outcome criterion5() {
  Outcome o;
  MonteCarloConfig mc;
  mc.scenario = reference_scenario();
  mc.trials = kC5Trials;
  mc.snr_db = {-10.0, 0.0, 10.0, 20.0};
  mc.methods = {Method::proposed, Method::dense, Method::farfield};
  mc.base_seed = 5000;
  const RmseReport rep = run_monte_carlo(mc);
  auto th = [&](Method m, double s) { return rep.row(m, s).theta_rmse_deg.value_or(INFINITY); };
  auto rr = [&](Method m, double s) { return rep.row(m, s).r_rmse_m.value_or(INFINITY); };
  bool mono = true;
  for (std::size_t i = 1; i < mc.snr_db.size(); ++i) {
    mono = mono && th(Method::proposed, mc.snr_db[i]) <= th(Method::proposed, mc.snr_db[i - 1]) &&
           rr(Method::proposed, mc.snr_db[i]) <= rr(Method::proposed, mc.snr_db[i - 1]);
  }
  require(o, mono, "(a) proposed RMSE non-increasing");
  require(o, th(Method::proposed, 10) < th(Method::dense, 10) && th(Method::proposed, 20) < th(Method::dense, 20),
          "(b) angle vs dense");
  require(o, th(Method::farfield, 20) >= kC5FarFieldRatio * th(Method::proposed, 20), "(c) far-field floor");
  require(o, rr(Method::proposed, 10) < rr(Method::dense, 10) && rr(Method::proposed, 20) < rr(Method::dense, 20),
          "(d) range vs dense");
  std::string table;
  for (double s : mc.snr_db) {
    table += fmt::format(" | {:g} dB: th {:.4f}/{:.4f}/{:.3f} r {:.2f}/{:.2f}", s, th(Method::proposed, s),
                         th(Method::dense, s), th(Method::farfield, s), rr(Method::proposed, s), rr(Method::dense, s));
  }
  o.detail = "proposed/dense/farfield" + table + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SensorLayout l = build_coprime_layout({3, 4, kD, kLambda});
  const std::vector<Target> truth{Target::from_degrees(-50, 0.15), Target::from_degrees(-20, 0.3),
                                  Target::from_degrees(10, 0.2), Target::from_degrees(40, 0.25)};
  const SnapshotSet s = synthesize(l, truth, 100, INFINITY, 1);
  LocalizerConfig c;
  c.num_targets = 4;
  const double z_r = l.rayleigh_distance();
  const auto prop = gated_hits(localize(s, l, c).true_targets(), truth, z_r, kC6AngleGateDeg, kC6RangeGateFraction * z_r);
  const auto sub = gated_hits(localize_subarray(s, l, c).true_targets(), truth, z_r, kC6AngleGateDeg,
                              kC6RangeGateFraction * z_r);
  const bool prop_ok = prop.first == 4 && prop.second == 0;
  const bool sub_ok = sub.first == 4 && sub.second == 0;
  const double dt = seconds_since(t0);
  require(o, prop_ok, "proposed misses targets");
  require(o, !sub_ok, "subarray baseline also recovers all 4");
  require(o, dt < kC6Seconds, "runtime");
  o.detail = fmt::format("proposed {}/4 ({} extra), subarray {}/4 ({} extra), {:.2f} s{}{}", prop.first,
                         prop.second, sub.first, sub.second, dt, o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion7() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / fmt::format("nfloc_accept_{}", ::getpid());
  fs::remove_all(root);
  fs::create_directories(root);
  {
    Scenario sc = reference_scenario();
    sc.m = 3;
    sc.n = 4;
    sc.targets = {Target::from_degrees(-20.0, 0.2), Target::from_degrees(25.0, 0.3)};
    std::ofstream(root / "scenario.json") << scenario_to_json(sc);
  }
  const std::string cli = NFLOC_CLI_PATH;
  const std::string scen = (root / "scenario.json").string();
  auto run = [&](const std::string& tag) {
    const fs::path dir = root / tag;
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::vector<std::string> cmds{
        fmt::format("\"{}\" geometry --m 9 --n 11 > \"{}/geometry.json\"", cli, d),
        fmt::format("\"{}\" simulate --scenario \"{}\" --seed 4 --out \"{}/y.csv\"", cli, scen, d),
        fmt::format("\"{}\" simulate --scenario \"{}\" --seed 4 --format bin --out \"{}/y.bin\"", cli, scen, d),
        fmt::format("\"{}\" spectrum --scenario \"{}\" --seed 4 --dump-covariance --out-dir \"{}/spec\" > \"{}/spec.txt\"",
                    cli, scen, d, d),
        fmt::format("\"{}\" montecarlo --scenario \"{}\" --snr 0:10:20 --q 3 --threads 2 --out \"{}/mc.csv\" "
                    "--raw \"{}/mc.jsonl\" > \"{}/mc.txt\"",
                    cli, scen, d, d, d)};
    bool ok = true;
    for (const auto& c : cmds) ok = ok && std::system(c.c_str()) == 0;
    return ok;
  };
  require(o, run("a") && run("b"), "CLI invocation failed");
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      ++differing;
      require(o, false, "differs: " + fs::relative(e.path(), root / "a").string());
    }
  }
  require(o, files >= 10, "too few outputs");
  fs::remove_all(root);
  o.detail = fmt::format("{} files compared, {} differ{}{}", files, differing, o.detail.empty() ? "" : "; ", o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry and DoF exactness", criterion1},
      {"decoupling identities", criterion2},
      {"subspace orthogonality", criterion3},
      {"reference scenario reproduction", criterion4},
      {"RMSE trends over SNR", criterion5},
      {"DoF advantage at M=3, N=4", criterion6},
      {"CLI determinism", criterion7},
  };
  std::size_t only = 0;
  if (argc > 1) only = static_cast<std::size_t>(std::stoul(argv[1]));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    all = all && o.pass;
    std::cout << fmt::format("[{}] criterion {}: {} -- {}\n", o.pass ? "PASS" : "FAIL", i + 1,
                             criteria[i].first, o.detail)
              << std::flush;
  }
  return all ? 0 : 1;
}
