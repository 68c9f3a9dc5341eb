#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "doateleop/scenario.hpp"
#include "support.hpp"

using namespace doateleop;
using nlohmann::json;

namespace {

json default_json() {
  return scenario_to_json(testing_support::default_scenario());
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("default scenario loads with its map") {
  const Scenario s = testing_support::default_scenario();
  CHECK(s.name == "default");
  CHECK(s.map.plan.bounds.max.x() == 10.0);
  CHECK(s.map.ap == Vec2(2.0, 3.0));
  CHECK(s.symbols.size() == 9);
  CHECK(s.time_limit == 180.0);
  CHECK(s.disconnect_threshold == -85.0);
  CHECK(s.timing.ticks_per_sample() == 4);
  CHECK(s.evaluation.sample_interval == doctest::Approx(0.2));
}

TEST_CASE("scenario json round-trips") {
  const Scenario a = testing_support::default_scenario();
  const Scenario b = parse_scenario(scenario_to_json(a));
  CHECK(a.canonical_json() == b.canonical_json());
}

TEST_CASE("strict parsing rejects unknown or inconsistent input") {
  json j = default_json();
  j["colour"] = "blue";
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["estimation"]["beta"] = 1.0;
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["map"]["walls"][0]["thickness"] = 0.1;
  CHECK_THROWS(parse_scenario(j));

  j = default_json();
  j["format_version"] = 2;
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["spawn"]["position"] = {50.0, 3.0};
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["interface_mode"] = "hud";
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["estimation"]["K"] = 4;
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["symbols"][0]["position"] = {3.0, 3.0};  // not on a wall
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j.erase("map");
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["timing"]["rss_hz"] = 3.0;
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);

  j = default_json();
  j["map"]["ap"] = {-1.0, 3.0};
  CHECK_THROWS_AS(parse_scenario(j), std::invalid_argument);
}

TEST_CASE("public map never exposes the access point") {
  const Scenario s = testing_support::default_scenario();
  const json pub = public_map_json(s);
  const std::string text = pub.dump();
  CHECK_FALSE(pub.contains("ap"));
  CHECK(text.find("\"ap\"") == std::string::npos);
  CHECK(text.find("propagation") == std::string::npos);
  CHECK(text.find("attenuation") == std::string::npos);
  CHECK(pub.at("walls").size() == s.map.plan.walls.size());
  CHECK(pub.at("symbols").size() == s.symbols.size());
}

TEST_CASE("noise profiles") {
  const Scenario base = testing_support::default_scenario();
  const Scenario off = apply_noise_profile(base, "off");
  CHECK(off.map.propagation.noise_free());
  CHECK(off.odometry.exact());
  CHECK(apply_noise_profile(base, "default").canonical_json() == base.canonical_json());

  const auto good = temp_file("doateleop_noise_good.json", R"({"propagation": {"fading_sigma": 0.5}})");
  const Scenario custom = apply_noise_profile(base, good.string());
  CHECK(custom.map.propagation.fading_sigma == 0.5);
  CHECK(custom.map.propagation.shadowing_sigma == base.map.propagation.shadowing_sigma);

  const auto bad = temp_file("doateleop_noise_bad.json", R"({"propagation": {"fade": 0.5}})");
  CHECK_THROWS_AS(apply_noise_profile(base, bad.string()), std::invalid_argument);
  const auto negative = temp_file("doateleop_noise_neg.json", R"({"odometry": {"velocity_scale_sigma": -1}})");
  CHECK_THROWS(apply_noise_profile(base, negative.string()));
  CHECK_THROWS(apply_noise_profile(base, "/nonexistent/profile.json"));
}

TEST_CASE("interface mode strings") {
  CHECK(interface_mode_from_string("vdoa") == InterfaceMode::Vdoa);
  CHECK(interface_mode_from_string("bar") == InterfaceMode::Bar);
  CHECK(std::string(to_string(InterfaceMode::Bar)) == "bar");
  CHECK_THROWS_AS(interface_mode_from_string("VDOA!"), std::invalid_argument);
}
