#include "doateleop/trial.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "doateleop/session.hpp"
#include "json_util.hpp"

namespace doateleop {

using nlohmann::json;

TrialResult run_trial(const Scenario& scenario, const PilotPolicy& pilot, std::uint64_t seed,
                      const std::string& label) {
  Pilot driver(pilot, scenario, seed);
  json extra{{"pilot", to_string(pilot.kind)}, {"pilot_config", pilot_to_json(pilot)}};
  if (!label.empty()) extra["label"] = label;
  Session session(scenario, seed, std::move(extra));
  while (session.running()) {
    session.tick(driver.next(session.last_frame()));
  }
  TrialResult out{session.log(), {}};
  out.report = trial_metrics(out.log);
  return out;
}

SuiteConfig parse_suite(const json& j, const std::filesystem::path& base_dir, const std::string& noise) {
  detail::reject_unknown(j, {"format_version", "name", "scenario", "noise", "workers", "trials"}, "suite");
  if (j.value("format_version", kScenarioFormatVersion) != kScenarioFormatVersion) {
    throw std::invalid_argument("suite: unsupported format_version");
  }
  const std::string profile = !noise.empty() ? noise : j.value("noise", std::string("default"));
  auto load = [&](const std::string& rel) {
    const std::filesystem::path p = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base_dir / rel;
    return apply_noise_profile(load_scenario(p), profile);
  };
  const Scenario base = load(j.at("scenario").get<std::string>());

  SuiteConfig cfg;
  cfg.name = j.value("name", std::string("suite"));
  detail::read_opt(j, "workers", cfg.workers);
  for (const auto& t : j.at("trials")) {
    detail::reject_unknown(t, {"label", "seed", "pilot", "scenario", "spawn"}, "suite.trials[]");
    TrialSpec spec;
    spec.label = t.value("label", std::string("trial-") + std::to_string(cfg.trials.size() + 1));
    spec.seed = t.at("seed").get<std::uint64_t>();
    spec.pilot = parse_pilot(t.at("pilot"));
    spec.scenario = t.contains("scenario") ? load(t["scenario"].get<std::string>()) : base;
    if (auto it = t.find("spawn"); it != t.end()) {
      detail::reject_unknown(*it, {"position", "heading", "camera_yaw"}, "suite.trials[].spawn");
      spec.scenario.spawn.position = detail::vec_from(it->at("position"), "spawn.position");
      spec.scenario.spawn.heading = wrap_angle(it->value("heading", 0.0));
      spec.scenario.spawn.camera_yaw = wrap_angle(it->value("camera_yaw", 0.0));
      spec.scenario.validate();
    }
    cfg.trials.push_back(std::move(spec));
  }
  return cfg;
}

SuiteConfig load_suite(const std::filesystem::path& path, const std::string& noise) {
  return parse_suite(detail::read_json_file(path), path.parent_path(), noise);
}

SuiteSummary summarize(const std::vector<SuiteEntry>& entries) {
  SuiteSummary s;
  s.trials = entries.size();
  struct Mean {
    double sum = 0.0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    std::optional<double> get() const { return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt; }
  } sens, spec, prec, acc;
  std::size_t ok = 0;
  for (const auto& e : entries) {
    if (!e.report) {
      ++s.failed;
      continue;
    }
    const TrialReport& r = *e.report;
    ++ok;
    s.pooled += r.counts;
    sens.add(r.confusion.sensitivity);
    spec.add(r.confusion.specificity);
    prec.add(r.confusion.precision);
    acc.add(r.confusion.accuracy);
    s.doa_error_los += r.doa_error_los;
    s.doa_error_nlos += r.doa_error_nlos;
    s.connection_losses += r.connection_lost ? 1 : 0;
    s.mean_covered_area += r.covered_area;
    s.mean_rss_gain += r.rss_gain;
    s.mean_distance += r.distance;
  }
  s.mean = {sens.get(), spec.get(), prec.get(), acc.get()};
  if (ok > 0) {
    s.mean_covered_area /= static_cast<double>(ok);
    s.mean_rss_gain /= static_cast<double>(ok);
    s.mean_distance /= static_cast<double>(ok);
  }
  return s;
}

SuiteReport run_suite(const SuiteConfig& config) {
  if (config.trials.empty()) {
    throw std::invalid_argument("suite has no trials");
  }
  SuiteReport report;
  report.name = config.name;
  report.entries.resize(config.trials.size());
  if (config.log_dir) std::filesystem::create_directories(*config.log_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.trials.size(); i = next++) {
      const TrialSpec& spec = config.trials[i];
      SuiteEntry& entry = report.entries[i];
      entry.label = spec.label;
      entry.seed = spec.seed;
      try {
        TrialResult r = run_trial(spec.scenario, spec.pilot, spec.seed, spec.label);
        if (config.log_dir) write_log(*config.log_dir / (spec.label + ".ndjson"), r.log);
        entry.report = std::move(r.report);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.trials.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  report.summary = summarize(report.entries);
  return report;
}

}  // namespace doateleop
