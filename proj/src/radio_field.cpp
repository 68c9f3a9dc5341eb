#include "doateleop/radio_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "doateleop/random.hpp"

namespace doateleop {

namespace {

constexpr int kShadowingTerms = 256;
constexpr std::uint64_t kShadowingSalt = 0x5ad0f1e1d0000001ULL;
constexpr std::uint64_t kFadingSalt = 0xfade000000000002ULL;

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument("build_field: " + what);
  }
}

bool finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

std::int64_t cell_index(double x, double cell) { return static_cast<std::int64_t>(std::floor(x / cell)); }

}  // namespace

int FloorPlan::walls_crossed(const Vec2& from, const Vec2& to) const {
  int n = 0;
  for (const auto& w : walls) {
    if (segments_intersect(from, to, w.a, w.b)) {
      ++n;
    }
  }
  return n;
}

double FloorPlan::attenuation_between(const Vec2& from, const Vec2& to) const {
  double total = 0.0;
  for (const auto& w : walls) {
    if (segments_intersect(from, to, w.a, w.b)) {
      total += w.attenuation_db;
    }
  }
  return total;
}

FieldModel build_field(const FloorPlan& plan, const Vec2& ap, const PropagationParams& params) {
  const auto& p = params;
  require(finite(plan.bounds.min) && finite(plan.bounds.max), "non-finite bounds");
  require(plan.bounds.min.x() < plan.bounds.max.x() && plan.bounds.min.y() < plan.bounds.max.y(),
          "empty bounds");
  require(finite(ap), "non-finite access point");
  require(plan.bounds.contains(ap), "access point outside map bounds");
  require(std::isfinite(p.ref_power_dbm), "non-finite ref_power");
  require(std::isfinite(p.ref_distance) && p.ref_distance > 0.0, "ref_distance must be > 0");
  require(std::isfinite(p.path_loss_exponent) && p.path_loss_exponent >= 1.0, "path_loss_exponent must be >= 1");
  require(std::isfinite(p.shadowing_sigma) && p.shadowing_sigma >= 0.0, "shadowing_sigma must be >= 0");
  require(std::isfinite(p.shadowing_corr_length) && p.shadowing_corr_length > 0.0,
          "shadowing_corr_length must be > 0");
  require(std::isfinite(p.fading_sigma) && p.fading_sigma >= 0.0, "fading_sigma must be >= 0");
  require(std::isfinite(p.fading_coherence_time), "non-finite fading_coherence_time");
  require(std::isfinite(p.frequency) && p.frequency > 0.0, "frequency must be > 0");
  require(std::isfinite(p.antenna.max_gain_db) && std::isfinite(p.antenna.exponent) && p.antenna.exponent >= 0.0,
          "invalid antenna pattern");
  for (const auto& w : plan.walls) {
    require(finite(w.a) && finite(w.b), "non-finite wall endpoint");
    require((w.a - w.b).norm() > 0.0, "wall endpoints must be distinct");
    require(std::isfinite(w.attenuation_db) && w.attenuation_db >= 0.0, "wall attenuation must be >= 0");
  }

  FieldModel field;
  field.plan_ = plan;
  field.ap_ = ap;
  field.params_ = params;

  if (p.shadowing_sigma > 0.0) {
    // Random Fourier features of the exponential covariance sigma^2 exp(-r/L):
    // its 2-D spectral density is a bivariate Cauchy with scale 1/L. Shadowing is
    // the local mean over ~10 wavelengths, so shorter spatial scales are rejected.
    Rng rng(hash_combine(p.seed, kShadowingSalt));
    const double k_max = 2.0 * std::numbers::pi / (10.0 * p.wavelength());
    field.shadowing_terms_.reserve(kShadowingTerms);
    while (static_cast<int>(field.shadowing_terms_.size()) < kShadowingTerms) {
      const Vec2 z(rng.normal(), rng.normal());
      const double w = std::abs(rng.normal());
      const Vec2 k = z / (p.shadowing_corr_length * w);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      if (k.norm() > k_max) {
        continue;
      }
      field.shadowing_terms_.push_back({k, phase});
    }
    field.shadowing_amplitude_ = p.shadowing_sigma * std::sqrt(2.0 / kShadowingTerms);
  }
  return field;
}

double FieldModel::mean_rss(const Vec2& position) const {
  const double d = std::max((position - ap_).norm(), params_.ref_distance / 10.0);
  return params_.ref_power_dbm - 10.0 * params_.path_loss_exponent * std::log10(d / params_.ref_distance) -
         plan_.attenuation_between(ap_, position);
}

double FieldModel::shadowing(const Vec2& position) const {
  double s = 0.0;
  for (const auto& term : shadowing_terms_) {
    s += std::cos(term.wavevector.dot(position) + term.phase);
  }
  return shadowing_amplitude_ * s;
}

double FieldModel::fading(const Vec2& position, double time) const {
  if (params_.fading_sigma == 0.0) {
    return 0.0;
  }
  const double cell = params_.wavelength() / 2.0;
  const std::int64_t bucket =
      params_.fading_coherence_time > 0.0 ? cell_index(time, params_.fading_coherence_time) : 0;
  std::uint64_t key = hash_combine(params_.seed, kFadingSalt);
  key = hash_combine(key, static_cast<std::uint64_t>(cell_index(position.x(), cell)));
  key = hash_combine(key, static_cast<std::uint64_t>(cell_index(position.y(), cell)));
  key = hash_combine(key, static_cast<std::uint64_t>(bucket));
  return params_.fading_sigma * hashed_gaussian(key);
}

double rss_at(const FieldModel& field, const Vec2& position, double time) {
  const double v = field.mean_rss(position) - field.shadowing(position) - field.fading(position, time);
  if (!std::isfinite(v)) {
    return kRssFloorDbm;
  }
  return std::clamp(v, kRssFloorDbm, kRssCeilingDbm);
}

double antenna_gain(const FieldModel& field, const Vec2& position, double boresight) {
  const auto& pattern = field.params().antenna;
  if (!pattern.enabled) {
    return 0.0;
  }
  const Vec2 to_ap = field.ap_position() - position;
  if (to_ap.norm() == 0.0) {
    return pattern.max_gain_db;
  }
  const double rel = wrap_angle(bearing(to_ap) - boresight);
  return pattern.max_gain_db * std::pow(std::max(0.0, std::cos(rel)), pattern.exponent);
}

double rss_at_receiver(const FieldModel& field, const Vec2& position, double boresight, double time) {
  const double v = field.mean_rss(position) + antenna_gain(field, position, boresight) -
                   field.shadowing(position) - field.fading(position, time);
  if (!std::isfinite(v)) {
    return kRssFloorDbm;
  }
  return std::clamp(v, kRssFloorDbm, kRssCeilingDbm);
}

Vec2 analytic_gradient(const FieldModel& field, const Vec2& position) {
  if (!field.params().noise_free()) {
    throw std::logic_error("analytic_gradient: field has stochastic terms enabled");
  }
  const Vec2 to_ap = field.ap_position() - position;
  const double d = to_ap.norm();
  if (d == 0.0) {
    return Vec2::Zero();
  }
  const double magnitude = 10.0 * field.params().path_loss_exponent / (d * std::numbers::ln10);
  return magnitude * to_ap / d;
}

}  // namespace doateleop
