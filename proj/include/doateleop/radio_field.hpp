#pragma once

#include <cstdint>
#include <vector>

#include "doateleop/geometry.hpp"

namespace doateleop {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kRssFloorDbm = -120.0;
inline constexpr double kRssCeilingDbm = -20.0;

struct WallSegment {
  Vec2 a;
  Vec2 b;
  double attenuation_db = 0.0;  // per crossing
};

struct FloorPlan {
  Bounds bounds;
  std::vector<WallSegment> walls;

  /// Number of walls crossed by the straight segment from -> to.
  int walls_crossed(const Vec2& from, const Vec2& to) const;
  double attenuation_between(const Vec2& from, const Vec2& to) const;
  bool line_of_sight(const Vec2& from, const Vec2& to) const { return walls_crossed(from, to) == 0; }
};

/// Optional directional receiver pattern G(phi) = g_max * max(0, cos phi)^exponent, in dB.
struct AntennaPattern {
  bool enabled = false;
  double max_gain_db = 3.0;
  double exponent = 1.0;
};

struct PropagationParams {
  double ref_power_dbm = -45.0;
  double ref_distance = 1.0;
  double path_loss_exponent = 3.0;
  double shadowing_sigma = 0.0;
  double shadowing_corr_length = 5.0;
  double fading_sigma = 0.0;
  double fading_coherence_time = 1.0;  // s; <= 0 means time-invariant fading
  double frequency = 2.4e9;
  AntennaPattern antenna;
  std::uint64_t seed = 0;

  double wavelength() const { return kSpeedOfLight / frequency; }
  bool noise_free() const { return shadowing_sigma == 0.0 && fading_sigma == 0.0; }
};

/// Immutable synthetic RSS field: log-distance path loss, per-wall attenuation,
/// spatially correlated log-normal shadowing and small-scale fading.
class FieldModel {
 public:
  const FloorPlan& plan() const { return plan_; }
  const Vec2& ap_position() const { return ap_; }
  const PropagationParams& params() const { return params_; }

  /// Mean path loss including walls; no stochastic terms, no clamping.
  double mean_rss(const Vec2& position) const;
  double shadowing(const Vec2& position) const;
  double fading(const Vec2& position, double time) const;

 private:
  friend FieldModel build_field(const FloorPlan& plan, const Vec2& ap, const PropagationParams& params);

  struct SpectralTerm {
    Vec2 wavevector;
    double phase;
  };

  FloorPlan plan_;
  Vec2 ap_{0.0, 0.0};
  PropagationParams params_;
  std::vector<SpectralTerm> shadowing_terms_;
  double shadowing_amplitude_ = 0.0;
};

/// Throws std::invalid_argument on non-finite or out-of-range parameters,
/// or when the access point lies outside the floor-plan bounds.
FieldModel build_field(const FloorPlan& plan, const Vec2& ap, const PropagationParams& params);

/// Received power in dBm at `position`, time `time`, clamped to [-120, -20].
double rss_at(const FieldModel& field, const Vec2& position, double time);

/// rss_at plus the directional receiver gain for an antenna whose boresight
/// points along world angle `boresight`.
double rss_at_receiver(const FieldModel& field, const Vec2& position, double boresight, double time);

double antenna_gain(const FieldModel& field, const Vec2& position, double boresight);

/// Exact gradient (dB/m) of the log-distance law. Only valid on noise-free
/// fields; throws std::logic_error otherwise.
Vec2 analytic_gradient(const FieldModel& field, const Vec2& position);

}  // namespace doateleop
