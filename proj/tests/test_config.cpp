#include <doctest.h>

#include <cmath>
#include <sstream>

#include "iontherm/closedform.hpp"
#include "iontherm/run_config.hpp"
#include "iontherm/units.hpp"

using namespace iontherm;

namespace {

const char* kGood = R"(# comment
[trap]
ions = 1
omega = "4e6 rad/s"
g = "4 krad/s"
delta = "150 krad/s"

[protocol]
kind = bs
phase = "0 deg"
duration = optimal

[experiment]
T = "7 uK"
shots = 1000
trials = 10
seed = 99
bracket = "1 uK, 50 uK"
)";

config::RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return config::parse_run_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const config::ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  return s.replace(s.find(from), from.size(), to);
}

}  // namespace

TEST_CASE("unit parsing") {
  CHECK(units::angular_frequency("4e6 rad/s") == 4e6);
  CHECK(units::angular_frequency("\"1 MHz\"") == doctest::Approx(2 * kPi * 1e6));
  CHECK(units::angular_frequency("150 krad/s") == doctest::Approx(150e3));
  CHECK(units::temperature("5 uK") == doctest::Approx(5e-6));
  CHECK(units::temperature("5μK") == doctest::Approx(5e-6));
  CHECK(units::temperature("7.2 nK") == doctest::Approx(7.2e-9));
  CHECK(units::time("7.36 ms") == doctest::Approx(7.36e-3));
  CHECK(units::angle("90 deg") == doctest::Approx(kPi / 2));
  CHECK(units::temperature("3e-6", false) == 3e-6);
  CHECK_THROWS_AS(units::temperature("3e-6"), std::invalid_argument);
  CHECK_THROWS_AS(units::temperature("3 furlongs"), std::invalid_argument);
  CHECK_THROWS_AS(units::angular_frequency("fast"), std::invalid_argument);
  CHECK(units::format(0.1) == "0.1");
}

TEST_CASE("run configuration") {
  const auto c = parse(kGood);
  CHECK(c.trap.omega_x == 4e6);
  CHECK(c.trap.delta_y == c.trap.delta_x);
  CHECK(c.resolved_temperature() == doctest::Approx(7e-6));
  CHECK(c.resolved_duration() == doctest::Approx(kPi / c.trap.theta()));
  CHECK(c.bracket_lo == doctest::Approx(1e-6));
  CHECK(c.seed == 99);
  CHECK(c.canonical() == parse(kGood).canonical());

  const auto t = parse(replace(replace(kGood, "kind = bs", "kind = tms"), "T = \"7 uK\"", "T = optimal"));
  CHECK(t.trap.delta_y == -t.trap.delta_x);
  CHECK(t.resolved_temperature() == doctest::Approx(closedform::optimal_temperature(4e6).temperature));
}

TEST_CASE("configuration diagnostics name the field") {
  const std::string missing = error_of(replace(kGood, "seed = 99\n", ""));
  CHECK(missing.find("seed") != std::string::npos);

  const std::string unit = error_of(replace(kGood, "\"4e6 rad/s\"", "4e6"));
  CHECK(unit.find("test.ini:4") != std::string::npos);
  CHECK(unit.find("omega") != std::string::npos);

  const std::string negative = error_of(replace(kGood, "\"4e6 rad/s\"", "\"-4e6 rad/s\""));
  CHECK(negative.find("omega") != std::string::npos);

  const std::string unknown = error_of(replace(kGood, "ions = 1", "ionz = 1"));
  CHECK(unknown.find("test.ini:3") != std::string::npos);
  CHECK(unknown.find("ionz") != std::string::npos);

  const std::string shots = error_of(replace(kGood, "shots = 1000", "shots = lots"));
  CHECK(shots.find("shots") != std::string::npos);

  CHECK_THROWS_AS(config::load_run_config("/nonexistent/file.ini"), config::ConfigError);
}

TEST_CASE("protocol models") {
  auto c = parse(kGood);
  const auto closed = config::make_models(c, 20e-6);
  c.model = "numeric";
  const auto numeric = config::make_models(c, 20e-6);
  for (double T : {3e-6, 7e-6, 15e-6})
    CHECK(qop::max_abs(closed.rho(T) - numeric.rho(T)) < 1e-10);
  c.model = "closed";
  c.kind = model::EffectiveKind::FullSideband;
  CHECK_THROWS_AS(config::make_models(c, 20e-6), std::invalid_argument);
}

TEST_CASE("csv table") {
  config::CsvTable t;
  t.params = "a=1";
  t.columns = {"x", "y"};
  t.add({1.0, 0.25});
  t.add({2.0, std::nan("")});
  CHECK_THROWS(t.add({1.0}));
  std::ostringstream o;
  t.write(o);
  CHECK(o.str() == "# params: a=1\nx,y\n1,0.25\n2,\n");
}
