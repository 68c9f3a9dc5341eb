#pragma once

#include <filesystem>
#include <string>

#include "doateleop/scenario.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return DOATELEOP_DATA_DIR; }

inline doateleop::Scenario default_scenario() {
  return doateleop::load_scenario(data_dir() / "scenarios" / "default.json");
}

/// Open 20 x 20 m room without interior walls, AP in the middle, no noise.
inline doateleop::Scenario open_room(double path_loss_exponent = 2.0) {
  using namespace doateleop;
  Scenario s;
  s.name = "open";
  s.map.plan.bounds = Bounds{Vec2(0.0, 0.0), Vec2(20.0, 20.0)};
  s.map.ap = Vec2(10.0, 10.0);
  s.map.propagation.ref_power_dbm = -40.0;
  s.map.propagation.path_loss_exponent = path_loss_exponent;
  s.map.propagation.shadowing_sigma = 0.0;
  s.map.propagation.fading_sigma = 0.0;
  s.spawn.position = Vec2(12.0, 10.0);
  s.validate();
  return s;
}

}  // namespace testing_support
