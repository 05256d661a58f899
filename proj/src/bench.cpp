#include "nfloc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace nfloc {

const char* to_string(Method method) {
  switch (method) {
    case Method::proposed: return "proposed";
    case Method::dense: return "dense";
    case Method::farfield: return "farfield";
    case Method::subarray: return "subarray";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::proposed, Method::dense, Method::farfield, Method::subarray}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError(fmt::format("unknown method '{}'", name));
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(method_from_string(item));
  }
  if (out.empty()) throw ValidationError("no methods given");
  return out;
}

// ---------------------------------------------------------------------------
// Association

namespace {

// Hungarian method on a rows <= cols matrix; returns the column for each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const std::size_t m = n ? a[0].size() : 0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j]) col[p[j] - 1] = j - 1;
  }
  return col;
}

}  // namespace

Matching associate(const std::vector<Estimate>& estimates, const std::vector<Target>& truth,
                   double range_scale, double range_weight) {
  Matching out;
  const std::size_t ne = estimates.size();
  const std::size_t nt = truth.size();
  auto cost = [&](std::size_t e, std::size_t t) {
    double c = std::abs(estimates[e].theta_deg - rad_to_deg(truth[t].theta));
    if (estimates[e].range_m) c += range_weight * std::abs(*estimates[e].range_m - truth[t].range) / range_scale;
    return c;
  };
  std::vector<bool> est_used(ne, false), truth_used(nt, false);
  if (ne > 0 && nt > 0) {
    const bool by_estimate = ne <= nt;
    const std::size_t rows = by_estimate ? ne : nt;
    const std::size_t cols = by_estimate ? nt : ne;
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) a[i][j] = by_estimate ? cost(i, j) : cost(j, i);
    }
    const std::vector<std::size_t> col = hungarian(a);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t e = by_estimate ? i : col[i];
      const std::size_t t = by_estimate ? col[i] : i;
      out.pairs.emplace_back(e, t);
      out.cost += cost(e, t);
      est_used[e] = true;
      truth_used[t] = true;
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const auto& x, const auto& y) { return x.second < y.second; });
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (!est_used[e]) out.unmatched_estimates.push_back(e);
  }
  for (std::size_t t = 0; t < nt; ++t) {
    if (!truth_used[t]) out.unmatched_truth.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// RMSE

void RmseAccumulator::add(double theta_err_deg, std::optional<double> range_err_m) {
  theta_sq += theta_err_deg * theta_err_deg;
  ++theta_count;
  if (range_err_m) {
    range_sq += *range_err_m * *range_err_m;
    ++range_count;
  }
}

void RmseAccumulator::merge(const RmseAccumulator& other) {
  theta_sq += other.theta_sq;
  theta_count += other.theta_count;
  range_sq += other.range_sq;
  range_count += other.range_count;
}

std::optional<double> RmseAccumulator::theta_rmse() const {
  if (theta_count == 0) return std::nullopt;
  return std::sqrt(theta_sq / static_cast<double>(theta_count));
}

std::optional<double> RmseAccumulator::range_rmse() const {
  if (range_count == 0) return std::nullopt;
  return std::sqrt(range_sq / static_cast<double>(range_count));
}

std::pair<std::optional<double>, std::optional<double>> rmse(
    const std::vector<double>& theta_errors_deg, const std::vector<double>& range_errors_m) {
  RmseAccumulator acc;
  for (double e : theta_errors_deg) acc.add(e, std::nullopt);
  for (double e : range_errors_m) {
    acc.range_sq += e * e;
    ++acc.range_count;
  }
  return {acc.theta_rmse(), acc.range_rmse()};
}

// ---------------------------------------------------------------------------
// Monte Carlo

const RmseRow& RmseReport::row(Method method, double snr_db) const {
  for (const RmseRow& r : rows) {
    if (r.method == method && r.snr_db == snr_db) return r;
  }
  throw ValidationError(fmt::format("no report row for {} at {} dB", to_string(method), snr_db));
}

namespace {

LocalizerConfig trial_config(const MonteCarloConfig& config, const SensorLayout& coprime) {
  LocalizerConfig c = config.localizer;
  if (!c.num_targets) c.num_targets = static_cast<int>(config.scenario.targets.size());
  if (!c.range_bounds) c.range_bounds = {coprime.fresnel_distance(), coprime.rayleigh_distance()};
  return c;
}

std::vector<Estimate> estimates_from(const LocalizationResult& r) {
  std::vector<Estimate> out;
  for (const ClassifiedTarget& t : r.true_targets()) out.push_back({t.theta_deg, t.range_m});
  return out;
}

}  // namespace

TrialRecord run_trial(const MonteCarloConfig& config, Method method, double snr_db,
                      std::size_t trial) {
  TrialRecord rec;
  rec.method = method;
  rec.snr_db = snr_db;
  rec.trial = trial;
  rec.seed = config.base_seed + trial;
  const Scenario& sc = config.scenario;
  const std::vector<Target>& truth = sc.targets;
  try {
    const SensorLayout coprime = sc.coprime_layout();
    const LocalizerConfig lc = trial_config(config, coprime);
    const double z_r = coprime.rayleigh_distance();
    if (method == Method::dense) {
      const SensorLayout dense = sc.dense_layout();
      const SnapshotSet snaps = synthesize(dense, truth, sc.snapshots, snr_db, rec.seed, sc.model);
      const LocalizationResult r = localize_dense(snaps, dense, lc);
      rec.estimates = estimates_from(r);
      rec.candidates = r.candidates.size();
    } else {
      const SnapshotSet snaps = synthesize(coprime, truth, sc.snapshots, snr_db, rec.seed, sc.model);
      if (method == Method::proposed) {
        const LocalizationResult r = localize(snaps, coprime, lc);
        rec.estimates = estimates_from(r);
        rec.candidates = r.candidates.size();
      } else if (method == Method::subarray) {
        const LocalizationResult r = localize_subarray(snaps, coprime, lc);
        rec.estimates = estimates_from(r);
        rec.candidates = r.candidates.size();
      } else {
        const FarFieldResult r = localize_farfield_virtual(snaps, coprime, lc);
        for (double a : r.angles_deg) rec.estimates.push_back({a, std::nullopt});
        rec.candidates = r.angles_deg.size();
      }
    }

    const Matching match = associate(rec.estimates, truth, z_r, config.range_weight);
    bool all_in_gate = match.unmatched_truth.empty() && match.unmatched_estimates.empty();
    for (const auto& [e, t] : match.pairs) {
      const Estimate& est = rec.estimates[e];
      const double dtheta = est.theta_deg - rad_to_deg(truth[t].theta);
      std::optional<double> dr;
      if (est.range_m) dr = *est.range_m - truth[t].range;
      rec.errors.add(dtheta, dr);
      if (std::abs(dtheta) > config.angle_gate_deg) all_in_gate = false;
      if (dr && std::abs(*dr) > config.range_gate_fraction * z_r) all_in_gate = false;
    }
    rec.detected = all_in_gate;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.estimates.clear();
    rec.errors = {};
    rec.detected = false;
  }
  return rec;
}

RmseReport run_monte_carlo(const MonteCarloConfig& config) {
  if (config.trials == 0) throw ValidationError("trial count must be at least 1");
  if (config.snr_db.empty() || config.methods.empty()) throw ValidationError("empty sweep");
  config.scenario.validate();

  struct Task {
    Method method;
    double snr;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  for (Method m : config.methods) {
    for (double snr : config.snr_db) {
      for (std::size_t q = 0; q < config.trials; ++q) tasks.push_back({m, snr, q});
    }
  }

  // Each task writes only its own slot, so the merge below sees the same
  // data whatever order the workers ran in.
  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      records[i] = run_trial(config, tasks[i].method, tasks[i].snr, tasks[i].trial);
    }
  };
  unsigned n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  RmseReport report;
  for (std::size_t start = 0; start < records.size(); start += config.trials) {
    RmseRow row;
    row.method = records[start].method;
    row.snr_db = records[start].snr_db;
    RmseAccumulator acc;
    std::size_t detected = 0;
    double candidates = 0.0;
    for (std::size_t i = start; i < start + config.trials; ++i) {
      const TrialRecord& r = records[i];
      ++row.trials;
      if (!r.ok) {
        ++row.failures;
        continue;
      }
      acc.merge(r.errors);
      detected += r.detected ? 1 : 0;
      candidates += static_cast<double>(r.candidates);
    }
    row.theta_rmse_deg = acc.theta_rmse();
    row.r_rmse_m = acc.range_rmse();
    row.detection_rate = static_cast<double>(detected) / static_cast<double>(row.trials);
    const std::size_t ok = row.trials - row.failures;
    row.mean_candidates = ok ? candidates / static_cast<double>(ok) : 0.0;
    report.rows.push_back(row);
  }
  report.records = std::move(records);
  return report;
}

namespace {

std::string opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.9g}", *v) : std::string("NA");
}

}  // namespace

void write_report_csv(const RmseReport& report, std::ostream& out) {
  out << "method,snr_db,theta_rmse_deg,r_rmse_m,detection_rate,mean_candidates\n";
  for (const RmseRow& r : report.rows) {
    out << fmt::format("{},{:g},{},{},{:.6f},{:.6f}\n", to_string(r.method), r.snr_db,
                       opt(r.theta_rmse_deg), opt(r.r_rmse_m), r.detection_rate,
                       r.mean_candidates);
  }
}

void write_trials_jsonl(const RmseReport& report, std::ostream& out) {
  for (const TrialRecord& r : report.records) {
    nlohmann::json j;
    j["method"] = to_string(r.method);
    j["snr_db"] = std::isfinite(r.snr_db) ? nlohmann::json(r.snr_db) : nlohmann::json("inf");
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["ok"] = r.ok;
    if (!r.ok) j["error"] = r.error;
    j["detected"] = r.detected;
    j["candidates"] = r.candidates;
    nlohmann::json est = nlohmann::json::array();
    for (const Estimate& e : r.estimates) {
      nlohmann::json item{{"theta_deg", e.theta_deg}};
      item["range_m"] = e.range_m ? nlohmann::json(*e.range_m) : nlohmann::json(nullptr);
      est.push_back(item);
    }
    j["estimates"] = est;
    out << j.dump() << '\n';
  }
}

std::vector<double> parse_snr_list(const std::string& spec) {
  auto num = [](const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw ValidationError(fmt::format("bad SNR value '{}'", s));
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ValidationError("SNR range must be lo:step:hi");
    const double lo = num(parts[0]), step = num(parts[1]), hi = num(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ValidationError("SNR range needs step > 0 and hi >= lo");
    for (long i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v > hi + 1e-9 * step) break;
      out.push_back(v);
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(num(item));
  }
  if (out.empty()) throw ValidationError("empty SNR list");
  return out;
}

}  // namespace nfloc
