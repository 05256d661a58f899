#include "nfloc/scenario.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace nfloc {

using nlohmann::json;

SensorLayout Scenario::coprime_layout() const { return build_coprime_layout(coprime_params()); }

SensorLayout Scenario::dense_layout() const {
  const SensorLayout ca = coprime_layout();
  return build_dense_layout(static_cast<int>(ca.size()), dense_spacing, wavelength());
}

void Scenario::validate() const {
  if (m <= 0 || n <= 0) throw ValidationError("M and N must be positive");
  if (!(freq_hz > 0.0)) throw ValidationError("frequency must be positive");
  if (!(spacing > 0.0) || !(dense_spacing > 0.0)) throw ValidationError("spacing must be positive");
  if (targets.empty()) throw ValidationError("scenario has no targets");
  for (const Target& t : targets) {
    if (!(std::abs(t.theta) < kPi / 2) || !(t.range > 0.0)) {
      throw ValidationError("target angle must lie in (-90, 90) deg and range must be positive");
    }
  }
  if (snapshots == 0) throw ValidationError("T must be at least 1");
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("scenario JSON: {}", e.what()));
  }
  try {
    Scenario s;
    s.m = j.at("M").get<int>();
    s.n = j.at("N").get<int>();
    s.freq_hz = j.value("freq_ghz", 30.0) * 1e9;
    s.spacing = j.contains("d_mm") ? j["d_mm"].get<double>() * 1e-3 : s.wavelength() / 4.0;
    s.dense_spacing =
        j.contains("dense_spacing_mm") ? j["dense_spacing_mm"].get<double>() * 1e-3 : s.spacing;
    for (const auto& t : j.at("targets")) {
      s.targets.push_back(Target::from_degrees(t.at("theta_deg").get<double>(),
                                               t.at("range_m").get<double>()));
    }
    s.snapshots = j.value("T", std::size_t{100});
    s.snr_db = j.value("snr_db", 10.0);
    s.seed = j.value("seed", std::uint64_t{1});
    s.model = wavefront_model_from_string(j.value("model", std::string("exact")));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("scenario JSON: {}", e.what()));
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open scenario {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["M"] = s.m;
  j["N"] = s.n;
  j["freq_ghz"] = s.freq_hz / 1e9;
  j["d_mm"] = s.spacing * 1e3;
  j["dense_spacing_mm"] = s.dense_spacing * 1e3;
  j["targets"] = json::array();
  for (const Target& t : s.targets) {
    j["targets"].push_back({{"theta_deg", rad_to_deg(t.theta)}, {"range_m", t.range}});
  }
  j["T"] = s.snapshots;
  j["snr_db"] = s.snr_db;
  j["seed"] = s.seed;
  j["model"] = to_string(s.model);
  return j.dump(2);
}

Scenario reference_scenario() {
  Scenario s;
  s.m = 9;
  s.n = 11;
  s.freq_hz = 30e9;
  s.spacing = s.wavelength() / 4.0;
  s.dense_spacing = s.spacing;
  s.targets = {Target::from_degrees(-35.0, 25.0), Target::from_degrees(10.0, 30.0),
               Target::from_degrees(30.0, 20.0), Target::from_degrees(30.0, 40.0)};
  s.snapshots = 100;
  s.snr_db = 10.0;
  s.seed = 1;
  s.model = WavefrontModel::exact;
  return s;
}

}  // namespace nfloc
