#pragma once

#include <array>
#include <deque>
#include <optional>
#include <vector>

#include "doateleop/geometry.hpp"
#include "doateleop/vehicle.hpp"

namespace doateleop {

/// Exponentially weighted moving average, R_f(i) = R_f(i-1) + alpha (R(i) - R_f(i-1)).
/// The first sample initialises the filter.
class Ewma {
 public:
  explicit Ewma(double alpha = 0.4);

  /// Throws std::invalid_argument on a non-finite sample.
  double update(double sample);

  double alpha() const { return alpha_; }
  std::optional<double> last() const { return last_; }

 private:
  double alpha_;
  std::optional<double> last_;
};

/// Fixed-capacity moving average over the most recent samples.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t capacity = 1);

  double update(double sample);
  /// Keeps the newest min(capacity, count) samples.
  void resize(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return window_.size(); }
  std::optional<double> mean() const;

 private:
  std::size_t capacity_;
  std::deque<double> window_;
};

/// MAF window covering about 10 wavelengths of travel:
/// N = round(10 lambda f_s / v), clamped to [1, n_max]; speeds below v_min give n_max.
int maf_window_size(double speed, double sample_rate, double wavelength, int n_max = 100, double v_min = 0.02);

struct CornerRssSet {
  double fr = 0.0;
  double fl = 0.0;
  double br = 0.0;
  double bl = 0.0;
  double c = 0.0;
  double timestamp = 0.0;

  static CornerRssSet from_array(const std::array<double, kReceiverCount>& v, double timestamp);
  std::array<double, kReceiverCount> to_array() const { return {fr, fl, br, bl, c}; }
  double corner_mean() const { return 0.25 * (fr + fl + br + bl); }
  /// Throws std::invalid_argument unless all values are finite and within [-120, -20] dBm.
  void validate() const;
};

struct GradientEstimate {
  Vec2 g{0.0, 0.0};  // dB/m, body frame
};

/// Central finite differences over the corner rectangle.
template <typename Scalar>
Vector2<Scalar> central_difference_gradient(Scalar fr, Scalar fl, Scalar br, Scalar bl, Scalar delta_sx,
                                            Scalar delta_sy) {
  const Scalar gx = (fr - fl) / (2 * delta_sx) + (br - bl) / (2 * delta_sx);
  const Scalar gy = (fr - br) / (2 * delta_sy) + (fl - bl) / (2 * delta_sy);
  return Vector2<Scalar>(gx, gy);
}

GradientEstimate rss_gradient(const CornerRssSet& corners, const AntennaArray& array);

enum class Frame { Body, Camera };

struct DoaEstimate {
  double theta = 0.0;  // rad, (-pi, pi], counterclockwise from the frame's x (right) axis
  Frame frame = Frame::Body;
  double magnitude = 0.0;  // |g|, dB/m
};

inline constexpr double kDefaultGradientEpsilon = 1e-6;

/// Four-quadrant direction of the gradient; nullopt when |g| <= epsilon.
std::optional<DoaEstimate> doa(const GradientEstimate& g, double epsilon = kDefaultGradientEpsilon);

/// Throws std::invalid_argument if `d` is not in the body frame.
DoaEstimate to_camera_frame(const DoaEstimate& d, double camera_yaw);

/// Linear map of [-90, -30] dBm onto [0, 100] %, clamped.
double rss_to_percent(double dbm);
/// Number of lit bars (0..5) for a percentage.
int signal_bars(double percent);

struct ColorBar {
  std::vector<double> segments;  // [-1, 1]; positive green, negative red
  double brightness = 0.0;       // [0, 1]
};

/// Camera-frame angle of segment k's center. Segment 0 sits at the top-center
/// of the border (camera forward, pi/2); indices increase counterclockwise.
double segment_center(int k, int segment_count);

/// Cosine lobe around the camera-frame DoA, scaled by |g| / g_sat.
/// A missing DoA yields a neutral bar. Throws std::invalid_argument for
/// segment_count < 8 or a body-frame DoA.
ColorBar color_bar(const std::optional<DoaEstimate>& d, const CornerRssSet& corners, int segment_count,
                   double g_sat = 2.0);

struct EstimationConfig {
  double alpha = 0.4;
  int n_max = 100;
  double v_min = 0.02;
  double epsilon = kDefaultGradientEpsilon;
  double g_sat = 2.0;
  int segments = 16;
  double resize_hysteresis = 0.2;  // relative change in N required to resize the MAF

  void validate() const;
};

struct PipelineOutput {
  std::array<double, kReceiverCount> ewma{};
  CornerRssSet filtered;  // EWMA then MAF
  GradientEstimate gradient;
  std::optional<DoaEstimate> doa_body;
  int window = 1;
};

/// Per-receiver EWMA followed by a speed-adaptive MAF, then
/// central differences and DoA. One instance per session.
class RssPipeline {
 public:
  RssPipeline(const EstimationConfig& config, const AntennaArray& array, double sample_rate, double wavelength);

  PipelineOutput update(const std::array<double, kReceiverCount>& raw, double speed, double timestamp);

  int window() const { return window_; }
  const EstimationConfig& config() const { return config_; }

 private:
  EstimationConfig config_;
  AntennaArray array_;
  double sample_rate_;
  double wavelength_;
  int window_;
  std::array<Ewma, kReceiverCount> ewma_;
  std::array<MovingAverage, kReceiverCount> maf_;
};

}  // namespace doateleop
