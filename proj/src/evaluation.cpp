#include "doateleop/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace doateleop {

double scalar_product(const GradientEstimate& g, const Vec2& nu) { return g.g.dot(nu); }

std::vector<double> temporal_derivative(std::span<const double> series, double sample_interval) {
  if (series.size() < 2) {
    throw std::invalid_argument("temporal_derivative: at least two samples required");
  }
  if (!(sample_interval > 0.0)) {
    throw std::invalid_argument("temporal_derivative: sample interval must be > 0");
  }
  std::vector<double> out(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    out[i] = (series[i + 1] - series[i]) / sample_interval;
  }
  return out;
}

void EvalConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("evaluation.tau must be > 0");
  if (!(sample_interval > 0.0)) throw std::invalid_argument("evaluation sample interval must be > 0");
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  skipped += o.skipped;
  return *this;
}

ConfusionCounts confusion_update(ConfusionCounts counts, double p, double d_rc, const EvalConfig& cfg) {
  if (!(std::abs(p) > cfg.tau)) {
    ++counts.skipped;
  } else if (p > 0.0) {
    d_rc > 0.0 ? ++counts.tp : ++counts.fp;
  } else {
    d_rc > 0.0 ? ++counts.fn : ++counts.tn;
  }
  return counts;
}

ConfusionMetrics metrics(const ConfusionCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return ConfusionMetrics{ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.fp + c.tn), ratio(c.tp, c.tp + c.fp),
                          ratio(c.tp + c.tn, c.classified())};
}

double doa_error(double est, double truth) { return std::abs(wrap_angle(est - truth)); }

CoverageGrid::CoverageGrid(const Bounds& bounds, double cell_size) : origin_(bounds.min), cell_size_(cell_size) {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("coverage cell size must be > 0");
  }
  columns_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / cell_size - 1e-9)));
  rows_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / cell_size - 1e-9)));
  counts_.assign(static_cast<std::size_t>(columns_) * static_cast<std::size_t>(rows_), 0);
}

void CoverageGrid::update(const Vec2& position) {
  const Vec2 rel = (position - origin_) / cell_size_;
  if (!std::isfinite(rel.x()) || !std::isfinite(rel.y())) {
    ++out_of_bounds_;
    return;
  }
  const auto col = static_cast<long long>(std::floor(rel.x()));
  const auto row = static_cast<long long>(std::floor(rel.y()));
  if (col < 0 || row < 0 || col >= columns_ || row >= rows_) {
    ++out_of_bounds_;
    return;
  }
  ++counts_[static_cast<std::size_t>(row) * static_cast<std::size_t>(columns_) + static_cast<std::size_t>(col)];
}

std::uint32_t CoverageGrid::count(int col, int row) const {
  if (col < 0 || row < 0 || col >= columns_ || row >= rows_) return 0;
  return counts_[static_cast<std::size_t>(row) * static_cast<std::size_t>(columns_) + static_cast<std::size_t>(col)];
}

std::size_t CoverageGrid::distinct_cells() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c > 0 ? 1 : 0;
  return n;
}

void ErrorStats::add(double e) {
  ++count;
  sum += e;
  max = std::max(max, e);
}

std::optional<double> ErrorStats::mean() const {
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

ErrorStats& ErrorStats::operator+=(const ErrorStats& o) {
  count += o.count;
  sum += o.sum;
  max = std::max(max, o.max);
  return *this;
}

namespace {

struct OfflineConfig {
  EvalConfig eval;
  Bounds bounds;
  double coverage_cell = 0.15;
  Vec2 spawn{0.0, 0.0};
  std::string pilot;
};

OfflineConfig offline_config(const LogHeader& header) {
  const auto& c = header.config;
  OfflineConfig out;
  out.eval.tau = c.at("tau").get<double>();
  out.eval.sample_interval = c.at("rss_interval").get<double>();
  const auto b = c.at("bounds").get<std::vector<double>>();
  if (b.size() != 4) throw std::invalid_argument("log header bounds must have 4 entries");
  out.bounds = Bounds{Vec2(b[0], b[1]), Vec2(b[2], b[3])};
  out.coverage_cell = c.at("coverage_cell").get<double>();
  const auto s = c.at("spawn").get<std::vector<double>>();
  if (s.size() < 2) throw std::invalid_argument("log header spawn must have x, y");
  out.spawn = Vec2(s[0], s[1]);
  out.pilot = c.value("pilot", std::string());
  return out;
}

}  // namespace

std::vector<EvalSample> eval_samples(const TrialLog& log) {
  const OfflineConfig cfg = offline_config(log.header);
  std::vector<const LogRecord*> sampled;
  for (const auto& r : log.records) {
    if (r.sample) sampled.push_back(&r);
  }
  if (sampled.size() < 2) return {};
  std::vector<double> rc(sampled.size());
  for (std::size_t i = 0; i < sampled.size(); ++i) rc[i] = sampled[i]->sample->ewma[4];
  const auto d_rc = temporal_derivative(rc, cfg.eval.sample_interval);

  std::vector<EvalSample> out(d_rc.size());
  for (std::size_t i = 0; i < d_rc.size(); ++i) {
    const LogRecord& r = *sampled[i];
    EvalSample& s = out[i];
    s.t = r.t;
    s.g.g = r.sample->gradient;
    s.nu = r.odometry.body_velocity;
    s.p = scalar_product(s.g, s.nu);
    s.d_rc = d_rc[i];
  }
  return out;
}

TrialReport trial_metrics(const TrialLog& log) {
  if (log.records.empty()) {
    throw std::invalid_argument("trial_metrics: empty log");
  }
  const OfflineConfig cfg = offline_config(log.header);
  cfg.eval.validate();

  TrialReport rep;
  rep.scenario = log.header.scenario_name;
  rep.seed = log.header.seed;
  rep.pilot = cfg.pilot;
  rep.records = log.records.size();
  const LogRecord& last = log.records.back();
  rep.status = last.status;
  rep.execution_time = last.t;
  rep.connection_lost = last.status == SessionStatus::SignalLost;
  if (rep.connection_lost) rep.connection_loss_time = last.t;

  CoverageGrid grid(cfg.bounds, cfg.coverage_cell);
  Vec2 prev = cfg.spawn;
  double rc_sum = 0.0;
  bool have_initial = false;
  for (const auto& r : log.records) {
    rep.distance += (r.true_position - prev).norm();
    prev = r.true_position;
    for (const auto& e : r.events) {
      if (e.rfind("symbol:", 0) == 0) ++rep.symbols_found;
      if (e == "collision") ++rep.collisions;
    }
    if (!r.sample) continue;
    const SampleRecord& s = *r.sample;
    ++rep.samples;
    grid.update(r.true_position);
    const double rc = s.ewma[4];
    if (!have_initial) {
      rep.rss_initial = rc;
      have_initial = true;
    }
    rc_sum += rc;
    if (s.doa_body) {
      const double e = doa_error(*s.doa_body, s.truth_doa);
      (s.los ? rep.doa_error_los : rep.doa_error_nlos).add(e);
    }
  }
  rep.covered_cells = grid.distinct_cells();
  rep.covered_area = grid.covered_area();
  if (rep.samples > 0) {
    rep.rss_mean = rc_sum / static_cast<double>(rep.samples);
    rep.rss_gain = rep.rss_mean - rep.rss_initial;
  }
  for (const auto& s : eval_samples(log)) {
    rep.counts = confusion_update(rep.counts, s.p, s.d_rc, cfg.eval);
  }
  rep.confusion = metrics(rep.counts);
  return rep;
}

}  // namespace doateleop
