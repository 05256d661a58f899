#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nfloc/bench.hpp"

using namespace nfloc;

namespace {
std::vector<Target> truth4() {
  return {Target::from_degrees(-35, 25), Target::from_degrees(10, 30), Target::from_degrees(30, 20),
          Target::from_degrees(30, 40)};
}
}  // namespace

TEST_CASE("association") {
  const auto t = truth4();
  std::vector<Estimate> e;
  for (const auto& x : t) e.push_back({rad_to_deg(x.theta), x.range});

  SUBCASE("identity matching at zero cost") {
    const Matching m = associate(e, t, 40.0);
    REQUIRE(m.pairs.size() == 4);
    for (const auto& [a, b] : m.pairs) CHECK(a == b);
    CHECK(m.cost == doctest::Approx(0.0));
  }
  SUBCASE("permutation does not change the pairing") {
    std::vector<Estimate> p{e[2], e[0], e[3], e[1]};
    const Matching m = associate(p, t, 40.0);
    const std::vector<std::pair<std::size_t, std::size_t>> expect{{1, 0}, {3, 1}, {0, 2}, {2, 3}};
    CHECK(m.pairs == expect);
  }
  SUBCASE("three estimates for four truths leave one truth unmatched") {
    std::vector<Estimate> three{e[0], e[1], e[3]};
    const Matching m = associate(three, t, 40.0);
    CHECK(m.pairs.size() == 3);
    CHECK(m.unmatched_truth == std::vector<std::size_t>{2});
    CHECK(m.unmatched_estimates.empty());
  }
  SUBCASE("surplus estimates are reported") {
    std::vector<Estimate> five = e;
    five.push_back({70.0, 5.0});
    const Matching m = associate(five, t, 40.0);
    CHECK(m.unmatched_estimates == std::vector<std::size_t>{4});
  }
  SUBCASE("range term separates co-angle targets") {
    std::vector<Estimate> co{{30.0, 39.0}, {30.0, 21.0}};
    const Matching m = associate(co, {t[2], t[3]}, 40.0);
    CHECK(m.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}, {0, 1}});
  }
  SUBCASE("angle-only estimates use the angle term") {
    std::vector<Estimate> a{{-34.0, std::nullopt}};
    const Matching m = associate(a, t, 40.0);
    CHECK(m.pairs.front().second == 0);
  }
}

TEST_CASE("rmse") {
  CHECK(*rmse({0.0, 0.0}, {0.0}).first == 0.0);
  CHECK(*rmse({1.0}, {}).first == doctest::Approx(1.0));
  CHECK(*rmse({1.0, 3.0}, {}).first == doctest::Approx(std::sqrt(5.0)));
  CHECK_FALSE(rmse({}, {}).first.has_value());
  CHECK_FALSE(rmse({1.0}, {}).second.has_value());
}

TEST_CASE("SNR and method lists") {
  CHECK(parse_snr_list("-10:5:20") == std::vector<double>{-10, -5, 0, 5, 10, 15, 20});
  CHECK(parse_snr_list("0,10,inf").back() == INFINITY);
  CHECK_THROWS_AS(parse_snr_list("1:0:5"), ValidationError);
  CHECK_THROWS_AS(parse_snr_list("ten"), ValidationError);
  CHECK(parse_methods("proposed,farfield") == std::vector<Method>{Method::proposed, Method::farfield});
  CHECK_THROWS_AS(parse_methods("music"), ValidationError);
}

TEST_CASE("Monte Carlo harness") {
  MonteCarloConfig mc;
  mc.scenario = reference_scenario();
  mc.scenario.m = 3;
  mc.scenario.n = 4;
  mc.scenario.targets = {Target::from_degrees(-20.0, 0.2)};
  mc.trials = 3;
  mc.snr_db = {INFINITY, 0.0};
  mc.methods = {Method::proposed, Method::farfield, Method::subarray, Method::dense};

  SUBCASE("noise-free single target has grid-limited error") {
    mc.methods = {Method::proposed};
    mc.snr_db = {INFINITY};
    mc.scenario.model = WavefrontModel::fresnel;
    const RmseReport r = run_monte_carlo(mc);
    const RmseRow& row = r.row(Method::proposed, INFINITY);
    CHECK(*row.theta_rmse_deg <= mc.localizer.angle_step_deg);
    CHECK(*row.r_rmse_m <= 0.01);
    CHECK(row.detection_rate == 1.0);
  }
  SUBCASE("reports are identical across thread counts") {
    mc.threads = 1;
    std::ostringstream a, ra;
    const RmseReport r1 = run_monte_carlo(mc);
    write_report_csv(r1, a);
    write_trials_jsonl(r1, ra);
    mc.threads = 3;
    std::ostringstream b, rb;
    const RmseReport r2 = run_monte_carlo(mc);
    write_report_csv(r2, b);
    write_trials_jsonl(r2, rb);
    CHECK(a.str() == b.str());
    CHECK(ra.str() == rb.str());
    CHECK(r1.rows.size() == 8);
    CHECK_FALSE(r1.row(Method::farfield, 0.0).r_rmse_m.has_value());
  }
  SUBCASE("per-trial failures are counted, not thrown") {
    mc.localizer.phase1_rule = SubspaceRule::fixed(1000);
    mc.methods = {Method::proposed};
    const RmseReport r = run_monte_carlo(mc);
    CHECK(r.rows[0].failures == 3);
    CHECK_FALSE(r.rows[0].theta_rmse_deg.has_value());
    CHECK_FALSE(r.records[0].ok);
    CHECK_FALSE(r.records[0].error.empty());
  }
  SUBCASE("trial seeds follow base_seed + q") {
    mc.base_seed = 100;
    const TrialRecord t = run_trial(mc, Method::proposed, 10.0, 7);
    CHECK(t.seed == 107);
  }
}

TEST_CASE("scenario JSON round trip") {
  const Scenario s = reference_scenario();
  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(back.m == 9);
  CHECK(back.targets.size() == 4);
  CHECK(back.spacing == doctest::Approx(s.spacing));
  CHECK(rad_to_deg(back.targets[3].theta) == doctest::Approx(30.0));
  CHECK_THROWS_AS(scenario_from_json("{\"M\": 3}"), ValidationError);
  CHECK_THROWS_AS(scenario_from_json("not json"), ValidationError);
}
