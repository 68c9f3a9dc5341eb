#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doateleop/estimation.hpp"
#include "doateleop/geometry.hpp"
#include "doateleop/trial_log.hpp"

namespace doateleop {

/// Dot product of the body-frame gradient (dB/m) with the body-frame velocity (m/s), in dB/s.
double scalar_product(const GradientEstimate& g, const Vec2& nu);

/// Forward differences (R(i+1) - R(i)) / T_s. Throws std::invalid_argument for
/// fewer than two samples or a non-positive interval.
std::vector<double> temporal_derivative(std::span<const double> series, double sample_interval);

struct EvalConfig {
  double tau = 0.1;
  double sample_interval = 0.2;

  void validate() const;
};

struct EvalSample {
  double t = 0.0;
  double p = 0.0;
  double d_rc = 0.0;
  GradientEstimate g;
  Vec2 nu{0.0, 0.0};
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  std::uint64_t skipped = 0;  // |p| <= tau

  std::uint64_t classified() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Classifies one sample: the sign of p is the prediction, the sign of the
/// central-receiver RSS derivative is the outcome. |p| <= tau is skipped.
ConfusionCounts confusion_update(ConfusionCounts counts, double p, double d_rc, const EvalConfig& cfg);

struct ConfusionMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> accuracy;
};

ConfusionMetrics metrics(const ConfusionCounts& c);

/// |wrap(est - truth)| in [0, pi].
double doa_error(double est, double truth);

class CoverageGrid {
 public:
  CoverageGrid(const Bounds& bounds, double cell_size = 0.15);

  void update(const Vec2& position);

  double cell_size() const { return cell_size_; }
  const Vec2& origin() const { return origin_; }
  int columns() const { return columns_; }
  int rows() const { return rows_; }
  std::uint32_t count(int col, int row) const;
  std::size_t distinct_cells() const;
  double covered_area() const { return static_cast<double>(distinct_cells()) * cell_size_ * cell_size_; }
  std::uint64_t out_of_bounds() const { return out_of_bounds_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

 private:
  Vec2 origin_;
  double cell_size_;
  int columns_;
  int rows_;
  std::vector<std::uint32_t> counts_;
  std::uint64_t out_of_bounds_ = 0;
};

struct ErrorStats {
  std::uint64_t count = 0;
  double sum = 0.0;
  double max = 0.0;

  void add(double e);
  std::optional<double> mean() const;
  ErrorStats& operator+=(const ErrorStats& o);
};

struct TrialReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string pilot;
  SessionStatus status = SessionStatus::Running;
  double execution_time = 0.0;
  bool connection_lost = false;
  std::optional<double> connection_loss_time;
  double distance = 0.0;
  std::size_t covered_cells = 0;
  double covered_area = 0.0;
  double rss_initial = 0.0;
  double rss_mean = 0.0;
  double rss_gain = 0.0;
  ErrorStats doa_error_los;
  ErrorStats doa_error_nlos;  // flagged: the true DoA may legitimately follow corridors
  ConfusionCounts counts;
  ConfusionMetrics confusion;
  std::size_t symbols_found = 0;
  std::size_t collisions = 0;
  std::size_t records = 0;
  std::size_t samples = 0;
};

/// Per-sample evaluation series reconstructed from a log.
std::vector<EvalSample> eval_samples(const TrialLog& log);

/// Pure function of the log: identical logs give identical reports.
/// Throws std::invalid_argument on an empty log.
TrialReport trial_metrics(const TrialLog& log);

}  // namespace doateleop
