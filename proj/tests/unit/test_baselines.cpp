#include <doctest.h>

#include <numeric>
#include <set>

#include "nfloc/baselines.hpp"

using namespace nfloc;

namespace {
const double kLambda = wavelength_from_frequency(30e9);
const double kD = kLambda / 4.0;
}  // namespace

TEST_CASE("dense baseline localises a single noise-free target") {
  const SensorLayout ca = build_coprime_layout({9, 11, kD, kLambda});
  const SensorLayout da = build_dense_layout(static_cast<int>(ca.size()), kD, kLambda);
  const Target t = Target::from_degrees(12.0, 1.0);
  const SnapshotSet s = synthesize(da, std::vector<Target>{t}, 100, INFINITY, 2, WavefrontModel::fresnel);
  LocalizerConfig c;
  c.num_targets = 1;
  const auto found = localize_dense(s, da, c).true_targets();
  REQUIRE(found.size() == 1);
  CHECK(std::abs(found[0].theta_deg - 12.0) <= c.angle_step_deg);
  CHECK(std::abs(found[0].range_m - 1.0) <= 0.01);
  CHECK_THROWS_AS(localize_dense(s, ca, c), ValidationError);
}

TEST_CASE("far-field baseline returns angles only and is exact on plane waves") {
  const SensorLayout ca = build_coprime_layout({5, 7, kD, kLambda});
  const std::vector<Target> t{Target::from_degrees(-25.0, 1.0), Target::from_degrees(40.0, 1.0)};
  const SnapshotSet s = synthesize(ca, t, 200, INFINITY, 3, WavefrontModel::planar);
  LocalizerConfig c;
  c.num_targets = 2;
  const FarFieldResult r = localize_farfield_virtual(s, ca, c);
  REQUIRE(r.angles_deg.size() == 2);
  std::vector<double> a = r.angles_deg;
  std::sort(a.begin(), a.end());
  CHECK(a[0] == doctest::Approx(-25.0).epsilon(0.002));
  CHECK(a[1] == doctest::Approx(40.0).epsilon(0.002));
}

TEST_CASE("subarray baseline") {
  const CoprimeParams p{3, 4, kD, kLambda};
  const SensorLayout ca = build_coprime_layout(p);

  SUBCASE("subarray union reproduces the coprime layout") {
    const auto [a, b] = build_subarrays(p);
    std::set<int> u(a.indices().begin(), a.indices().end());
    u.insert(b.indices().begin(), b.indices().end());
    CHECK(std::vector<int>(u.begin(), u.end()) ==
          std::vector<int>(ca.indices().begin(), ca.indices().end()));
  }

  SUBCASE("single target: aliases per subarray, one common peak after fusion") {
    const Target t = Target::from_degrees(20.0, 0.2);
    const SnapshotSet s = synthesize(ca, std::vector<Target>{t}, 100, INFINITY, 4);
    LocalizerConfig c;
    c.num_targets = 1;
    SubarrayDetail detail;
    const LocalizationResult r = localize_subarray(s, ca, c, &detail);
    const auto found = r.true_targets();
    REQUIRE(found.size() == 1);
    CHECK(std::abs(found[0].theta_deg - 20.0) <= 0.5);
    CHECK(std::abs(found[0].range_m - 0.2) <= 0.02);

    for (const PseudoSpectrum* sp : {&detail.angle_first, &detail.angle_second}) {
      PeakOptions o;
      o.min_prominence_db = 3.0;
      const auto peaks = detect_peaks(*sp, o);
      REQUIRE(peaks.size() >= 2);
      // Aliases stand tens of dB above the 0 dB floor and within a few dB of each other.
      CHECK(peaks[1].value_db >= 30.0);
      CHECK(peaks[0].value_db - peaks[1].value_db <= 6.0);
      CHECK(std::abs(peaks[0].location - peaks[1].location) > 10.0);
    }
  }
}
