#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "transim/config.hpp"
#include "transim/experiments.hpp"

using namespace transim;

TEST_CASE("defaults cover every schema key and validate") {
  const Config c = Config::defaults();
  CHECK(c.values().size() == config_schema().size());
  CHECK_NOTHROW(c.validate());
  CHECK(c.numbers("device.freq_ghz") == std::vector<double>{5.641, 6.517, 5.507});
}

TEST_CASE("sections, comments and overrides") {
  const Config c = Config::parse(R"(
# a comment
[pulse]
amp_mhz = 75   # trailing comment
[device.coupling]
g_ab_mhz = 55
)");
  CHECK(c.number("pulse.amp_mhz") == 75.0);
  CHECK(c.number("device.coupling.g_ab_mhz") == 55.0);
  Config d = c;
  d.apply_override("pulse.sigma_ns=12");
  CHECK(d.number("pulse.sigma_ns") == 12.0);
  d.set_element("device.freq_ghz", 1, 6.417);
  CHECK(d.numbers("device.freq_ghz")[1] == 6.417);
  CHECK_THROWS_AS(d.set_element("device.freq_ghz", 5, 1.0), ConfigError);
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    Config::parse("[device]\nfrequency = 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "device.frequency");
    CHECK(std::string(e.what()).find("device.frequency") != std::string::npos);
  }
  Config c = Config::defaults();
  CHECK_THROWS_AS(c.apply_override("pulse.bogus=1"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("no_equals_sign"), ConfigError);
}

TEST_CASE("malformed values fail validation with the field path") {
  CHECK_THROWS_AS(Config::parse("[pulse]\namp_mhz = ninety\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[zz]\ncoupling_form = sideways\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[pulse]\namp_mhz = 1\namp_mhz = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[pulse\namp_mhz = 1\n"), ConfigError);
  try {
    device_from_config(Config::parse("[device]\nanharm_mhz = -300, -381\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "device.anharm_mhz");
  }
}

TEST_CASE("serialization round trips") {
  Config c = Config::defaults();
  c.apply_override("pulse.amp_mhz=88.625");
  c.apply_override("qpt.t1_us=inf, 100");
  c.apply_override("qpt.t2star_us=inf, 80");
  const std::string text = c.serialize();
  CHECK(text.find("# MHz") != std::string::npos);
  const Config back = Config::parse(text);
  CHECK(back.values() == c.values());
  CHECK(back.serialize() == text);
}

TEST_CASE("number formatting is shortest round-trip") {
  for (double v : {0.1, 6.517, -3.668e-4, 1e-10, 123456789.0}) CHECK(parse_number(format_number(v), "x") == v);
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isinf(parse_number("inf", "x")));
  CHECK_THROWS_AS(parse_number("1.0abc", "x"), ConfigError);
  CHECK(parse_number_list("1, 2.5 ,3", "x") == std::vector<double>{1.0, 2.5, 3.0});
}

TEST_CASE("device built from the default config is the paper device") {
  const DeviceParams p = device_from_config(Config::defaults());
  const DeviceParams q = paper_device();
  CHECK(p.freq_ghz == q.freq_ghz);
  CHECK(p.anharm_mhz == q.anharm_mhz);
  CHECK(p.levels == q.levels);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(p.g_mhz(i, j) == q.g_mhz(i, j));
}

TEST_CASE("zz run writes a unit-tagged table and a re-runnable manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "transim_config_test";
  std::filesystem::create_directories(dir);
  const auto r = run_experiment("zz", Config::defaults(), dir / "zz.csv");
  std::ifstream in(r.result);
  std::string header;
  std::getline(in, header);
  CHECK(header == "pair,xi_static[MHz],xi_perturbative[MHz]");
  const Config manifest = Config::load(r.manifest);
  CHECK(manifest.text("run.subcommand") == "zz");
  const auto again = run_experiment("zz", manifest, dir / "zz2.csv");
  std::ifstream a(r.result), b(again.result);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
  CHECK_THROWS_AS(run_experiment("nonsense", Config::defaults(), dir / "x.csv"), ConfigError);
}
