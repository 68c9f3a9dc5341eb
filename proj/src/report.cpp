#include "doateleop/report.hpp"

#include <cstdio>
#include <sstream>

namespace doateleop {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json error_stats(const ErrorStats& e) {
  return json{{"count", e.count}, {"mean", opt(e.mean())}, {"max", e.count ? json(e.max) : json(nullptr)}};
}

json counts_json(const ConfusionCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}, {"skipped", c.skipped}};
}

json metrics_json(const ConfusionMetrics& m) {
  return json{{"sensitivity", opt(m.sensitivity)},
              {"specificity", opt(m.specificity)},
              {"precision", opt(m.precision)},
              {"accuracy", opt(m.accuracy)}};
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fmt("%.3f", *v) : std::string("-"); }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

void metric_row(std::ostringstream& os, const std::string& label, const ConfusionMetrics& m, const ErrorStats& los,
                const ErrorStats& nlos) {
  os << pad(label, 18) << pad(cell(m.sensitivity), 8) << pad(cell(m.specificity), 8) << pad(cell(m.precision), 8)
     << pad(cell(m.accuracy), 8) << pad(cell(los.mean()), 10) << pad(cell(nlos.mean()), 10);
}

const char* metric_header() {
  return "             trial    sens    spec    prec     acc  doa_los  doa_nlos";
}

}  // namespace

json report_to_json(const TrialReport& r) {
  return json{{"scenario", r.scenario},
              {"seed", r.seed},
              {"pilot", r.pilot},
              {"status", to_string(r.status)},
              {"execution_time", r.execution_time},
              {"connection_lost", r.connection_lost},
              {"connection_loss_time", opt(r.connection_loss_time)},
              {"distance", r.distance},
              {"covered_cells", r.covered_cells},
              {"covered_area", r.covered_area},
              {"rss_initial", r.rss_initial},
              {"rss_mean", r.rss_mean},
              {"rss_gain", r.rss_gain},
              {"doa_error_los", error_stats(r.doa_error_los)},
              {"doa_error_nlos", error_stats(r.doa_error_nlos)},
              {"counts", counts_json(r.counts)},
              {"metrics", metrics_json(r.confusion)},
              {"symbols_found", r.symbols_found},
              {"collisions", r.collisions},
              {"records", r.records},
              {"samples", r.samples}};
}

json suite_to_json(const SuiteReport& s) {
  json trials = json::array();
  for (const auto& e : s.entries) {
    json t{{"label", e.label}, {"seed", e.seed}};
    if (e.report) {
      t["report"] = report_to_json(*e.report);
    } else {
      t["error"] = e.error;
    }
    trials.push_back(std::move(t));
  }
  const SuiteSummary& m = s.summary;
  return json{{"name", s.name},
              {"trials", std::move(trials)},
              {"summary",
               {{"trials", m.trials},
                {"failed", m.failed},
                {"pooled_counts", counts_json(m.pooled)},
                {"pooled_metrics", metrics_json(metrics(m.pooled))},
                {"mean_metrics", metrics_json(m.mean)},
                {"doa_error_los", error_stats(m.doa_error_los)},
                {"doa_error_nlos", error_stats(m.doa_error_nlos)},
                {"connection_losses", m.connection_losses},
                {"mean_covered_area", m.mean_covered_area},
                {"mean_rss_gain", m.mean_rss_gain},
                {"mean_distance", m.mean_distance}}}};
}

std::string format_table(const TrialReport& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << "  seed " << r.seed << "  pilot " << (r.pilot.empty() ? "-" : r.pilot) << "\n";
  os << metric_header() << "\n";
  metric_row(os, "trial", r.confusion, r.doa_error_los, r.doa_error_nlos);
  os << "\n\n";
  os << "status          " << to_string(r.status) << "\n";
  os << "time            " << fmt("%.2f s", r.execution_time) << "\n";
  os << "distance        " << fmt("%.2f m", r.distance) << "\n";
  os << "covered         " << r.covered_cells << " cells, " << fmt("%.3f m^2", r.covered_area) << "\n";
  os << "rss gain        " << fmt("%+.2f dB", r.rss_gain) << " (initial " << fmt("%.2f", r.rss_initial) << ", mean "
     << fmt("%.2f", r.rss_mean) << " dBm)\n";
  os << "counts          tp " << r.counts.tp << "  fp " << r.counts.fp << "  tn " << r.counts.tn << "  fn "
     << r.counts.fn << "  skipped " << r.counts.skipped << "\n";
  os << "symbols         " << r.symbols_found << "\n";
  os << "collisions      " << r.collisions << "\n";
  return os.str();
}

std::string format_table(const SuiteReport& s) {
  std::ostringstream os;
  os << "suite " << s.name << "\n" << metric_header() << "   status\n";
  for (const auto& e : s.entries) {
    if (e.report) {
      metric_row(os, e.label, e.report->confusion, e.report->doa_error_los, e.report->doa_error_nlos);
      os << "   " << to_string(e.report->status) << "\n";
    } else {
      os << pad(e.label, 18) << "   failed: " << e.error << "\n";
    }
  }
  const SuiteSummary& m = s.summary;
  metric_row(os, "mean", m.mean, m.doa_error_los, m.doa_error_nlos);
  os << "\n";
  metric_row(os, "pooled", metrics(m.pooled), m.doa_error_los, m.doa_error_nlos);
  os << "\n\n";
  os << "trials " << m.trials << ", failed " << m.failed << ", connection losses " << m.connection_losses << "\n";
  os << "mean covered area " << fmt("%.3f m^2", m.mean_covered_area) << ", mean rss gain "
     << fmt("%+.2f dB", m.mean_rss_gain) << ", mean distance " << fmt("%.2f m", m.mean_distance) << "\n";
  return os.str();
}

std::string eval_samples_csv(const TrialLog& log) {
  std::ostringstream os;
  os << "t,p,d_rc,g_x,g_y,nu_x,nu_y\n";
  for (const auto& s : eval_samples(log)) {
    os << fmt("%.3f", s.t) << ',' << fmt("%.6g", s.p) << ',' << fmt("%.6g", s.d_rc) << ',' << fmt("%.6g", s.g.g.x())
       << ',' << fmt("%.6g", s.g.g.y()) << ',' << fmt("%.6g", s.nu.x()) << ',' << fmt("%.6g", s.nu.y()) << '\n';
  }
  return os.str();
}

std::string suite_csv(const SuiteReport& s) {
  std::ostringstream os;
  os << "label,seed,status,sensitivity,specificity,precision,accuracy,doa_error_los,doa_error_nlos,distance,"
        "covered_cells,rss_gain,connection_lost\n";
  auto c = [](const std::optional<double>& v) { return v ? fmt("%.6g", *v) : std::string(); };
  for (const auto& e : s.entries) {
    os << e.label << ',' << e.seed << ',';
    if (!e.report) {
      os << "failed,,,,,,,,,,\n";
      continue;
    }
    const TrialReport& r = *e.report;
    os << to_string(r.status) << ',' << c(r.confusion.sensitivity) << ',' << c(r.confusion.specificity) << ','
       << c(r.confusion.precision) << ',' << c(r.confusion.accuracy) << ',' << c(r.doa_error_los.mean()) << ','
       << c(r.doa_error_nlos.mean()) << ',' << fmt("%.6g", r.distance) << ',' << r.covered_cells << ','
       << fmt("%.6g", r.rss_gain) << ',' << (r.connection_lost ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace doateleop
