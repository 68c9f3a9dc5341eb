#include "doateleop/estimation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doateleop/radio_field.hpp"

namespace doateleop {

Ewma::Ewma(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("EWMA alpha must be in (0, 1]");
  }
}

double Ewma::update(double sample) {
  if (!std::isfinite(sample)) {
    throw std::invalid_argument("EWMA: non-finite sample");
  }
  if (!last_) {
    last_ = sample;
  } else {
    last_ = *last_ + alpha_ * (sample - *last_);
  }
  return *last_;
}

MovingAverage::MovingAverage(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("MAF capacity must be >= 1");
  }
}

double MovingAverage::update(double sample) {
  if (!std::isfinite(sample)) {
    throw std::invalid_argument("MAF: non-finite sample");
  }
  window_.push_back(sample);
  while (window_.size() > capacity_) {
    window_.pop_front();
  }
  return *mean();
}

void MovingAverage::resize(std::size_t capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("MAF capacity must be >= 1");
  }
  capacity_ = capacity;
  while (window_.size() > capacity_) {
    window_.pop_front();
  }
}

std::optional<double> MovingAverage::mean() const {
  if (window_.empty()) {
    return std::nullopt;
  }
  return std::accumulate(window_.begin(), window_.end(), 0.0) / static_cast<double>(window_.size());
}

int maf_window_size(double speed, double sample_rate, double wavelength, int n_max, double v_min) {
  if (!(sample_rate > 0.0) || !(wavelength > 0.0)) {
    throw std::invalid_argument("maf_window_size: sample_rate and wavelength must be > 0");
  }
  if (n_max < 1) {
    throw std::invalid_argument("maf_window_size: n_max must be >= 1");
  }
  if (!std::isfinite(speed) || std::abs(speed) < v_min) {
    return n_max;
  }
  const double n = std::floor(10.0 * wavelength * sample_rate / std::abs(speed) + 0.5);
  return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(n_max)));
}

CornerRssSet CornerRssSet::from_array(const std::array<double, kReceiverCount>& v, double timestamp) {
  return CornerRssSet{v[0], v[1], v[2], v[3], v[4], timestamp};
}

void CornerRssSet::validate() const {
  for (double v : to_array()) {
    if (!std::isfinite(v) || v < kRssFloorDbm || v > kRssCeilingDbm) {
      throw std::invalid_argument("corner RSS outside [-120, -20] dBm");
    }
  }
}

GradientEstimate rss_gradient(const CornerRssSet& corners, const AntennaArray& array) {
  return {central_difference_gradient(corners.fr, corners.fl, corners.br, corners.bl, array.delta_sx,
                                      array.delta_sy)};
}

std::optional<DoaEstimate> doa(const GradientEstimate& g, double epsilon) {
  const double magnitude = g.g.norm();
  if (!(magnitude > epsilon)) {
    return std::nullopt;
  }
  return DoaEstimate{wrap_angle(std::atan2(g.g.y(), g.g.x())), Frame::Body, magnitude};
}

DoaEstimate to_camera_frame(const DoaEstimate& d, double camera_yaw) {
  if (d.frame != Frame::Body) {
    throw std::invalid_argument("to_camera_frame: DoA is not in the body frame");
  }
  return DoaEstimate{wrap_angle(d.theta - camera_yaw), Frame::Camera, d.magnitude};
}

double rss_to_percent(double dbm) {
  if (!std::isfinite(dbm)) {
    return 0.0;
  }
  return std::clamp((dbm + 90.0) / 60.0 * 100.0, 0.0, 100.0);
}

int signal_bars(double percent) {
  return static_cast<int>(std::clamp(std::ceil(percent / 20.0), 0.0, 5.0));
}

double segment_center(int k, int segment_count) {
  return wrap_angle(std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / segment_count);
}

ColorBar color_bar(const std::optional<DoaEstimate>& d, const CornerRssSet& corners, int segment_count,
                   double g_sat) {
  if (segment_count < 8) {
    throw std::invalid_argument("color_bar: at least 8 segments required");
  }
  ColorBar bar;
  bar.segments.assign(static_cast<std::size_t>(segment_count), 0.0);
  bar.brightness = rss_to_percent(corners.corner_mean()) / 100.0;
  if (!d) {
    return bar;
  }
  if (d->frame != Frame::Camera) {
    throw std::invalid_argument("color_bar: DoA must be in the camera frame");
  }
  const double s = g_sat > 0.0 ? std::clamp(d->magnitude / g_sat, 0.0, 1.0) : 1.0;
  for (int k = 0; k < segment_count; ++k) {
    bar.segments[static_cast<std::size_t>(k)] = s * std::cos(segment_center(k, segment_count) - d->theta);
  }
  return bar;
}

void EstimationConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("estimation.alpha must be in (0, 1]");
  if (n_max < 1) throw std::invalid_argument("estimation.n_max must be >= 1");
  if (!(v_min >= 0.0)) throw std::invalid_argument("estimation.v_min must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("estimation.epsilon must be > 0");
  if (!(g_sat > 0.0)) throw std::invalid_argument("estimation.g_sat must be > 0");
  if (segments < 8) throw std::invalid_argument("estimation.K must be >= 8");
  if (!(resize_hysteresis >= 0.0)) throw std::invalid_argument("estimation.resize_hysteresis must be >= 0");
}

RssPipeline::RssPipeline(const EstimationConfig& config, const AntennaArray& array, double sample_rate,
                         double wavelength)
    : config_(config), array_(array), sample_rate_(sample_rate), wavelength_(wavelength), window_(config.n_max) {
  config_.validate();
  array_.validate();
  for (auto& e : ewma_) e = Ewma(config_.alpha);
  for (auto& m : maf_) m = MovingAverage(static_cast<std::size_t>(window_));
}

PipelineOutput RssPipeline::update(const std::array<double, kReceiverCount>& raw, double speed, double timestamp) {
  const int target = maf_window_size(speed, sample_rate_, wavelength_, config_.n_max, config_.v_min);
  if (std::abs(target - window_) >= config_.resize_hysteresis * window_ && target != window_) {
    window_ = target;
    for (auto& m : maf_) m.resize(static_cast<std::size_t>(window_));
  }

  PipelineOutput out;
  std::array<double, kReceiverCount> filtered{};
  for (int i = 0; i < kReceiverCount; ++i) {
    out.ewma[i] = ewma_[i].update(raw[i]);
    filtered[i] = maf_[i].update(out.ewma[i]);
  }
  out.filtered = CornerRssSet::from_array(filtered, timestamp);
  out.gradient = rss_gradient(out.filtered, array_);
  out.doa_body = doa(out.gradient, config_.epsilon);
  out.window = window_;
  return out;
}

}  // namespace doateleop
