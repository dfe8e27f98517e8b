#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "process.hpp"

using testproc::cli;
using testproc::run;
using testproc::tmp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

double field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + " ");
  REQUIRE(at != std::string::npos);
  return std::stod(text.substr(at + key.size() + 1));
}

}  // namespace

TEST_CASE("setup") { std::filesystem::create_directories(HS_TEST_TMP); }

TEST_CASE("exit codes for bad input") {
  CHECK(run(cli("simulate /nonexistent/x.json 2>/dev/null")).code == 2);
  CHECK(run(cli("bogus 2>/dev/null")).code == 2);
  CHECK(run(cli("simulate 2>/dev/null")).code == 2);
  CHECK(run(cli("tune --zload=-5,0 2>/dev/null")).code == 2);
  CHECK(run(cli("sweep --preset paper-2013 --axis distance --range 1:0:0.1 2>/dev/null")).code == 2);

  const auto preset = run(cli("preset paper-2013"));
  REQUIRE(preset.code == 0);
  std::string bad = preset.out;
  const auto at = bad.find("\"plf\": 0.5");
  REQUIRE(at != std::string::npos);
  bad.replace(at, 10, "\"plf\": 1.5");
  spit(tmp("bad_plf.json"), bad);
  CHECK(run(cli("simulate " + tmp("bad_plf.json") + " 2>&1")).out.find("link.plf") != std::string::npos);
  CHECK(run(cli("simulate " + tmp("bad_plf.json") + " 2>/dev/null")).code == 2);
}

TEST_CASE("tune") {
  const auto flat = run(cli("tune --zload 50,0"));
  REQUIRE(flat.code == 0);
  CHECK(field(flat.out, "L") == doctest::Approx(0.0));
  const auto r = run(cli("tune --zload 9.96,21.5 --freq 866.5e6"));
  REQUIRE(r.code == 0);
  CHECK(field(r.out, "L") == doctest::Approx(3.3).epsilon(0.1));
  CHECK(field(r.out, "C") == doctest::Approx(8.2).epsilon(0.1));
  CHECK(field(r.out, "return_loss_db") >= 20.0);
}

TEST_CASE("simulate") {
  const auto r = run(cli("simulate --preset paper-2013 --distance 1"));
  REQUIRE(r.code == 0);
  CHECK(field(r.out, "# logs") >= 1.0);
  CHECK(r.out.find("t_s,event,v_cap_v\n") != std::string::npos);
  CHECK(r.out.find("LogComplete") != std::string::npos);
  REQUIRE(run(cli("simulate --preset paper-2013 --distance 1 --out " + tmp("events.csv") + " >/dev/null")).code == 0);
  CHECK(slurp(tmp("events.csv")).find("LogComplete") != std::string::npos);
}

TEST_CASE("sweep") {
  const auto one = run(cli("sweep --preset paper-2013 --axis distance --range 1:1:0.1"));
  REQUIRE(one.code == 0);
  CHECK(lines(one.out) == 2);
  const auto a = run(cli("sweep --preset paper-2013 --axis distance --range 0.5:3:0.5 --jobs 1"));
  const auto b = run(cli("sweep --preset paper-2013 --axis distance --range 0.5:3:0.5 --jobs 4"));
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out) == 7);

  // --axis alone keeps the preset's range, or falls back to a default one.
  CHECK(lines(run(cli("sweep --preset paper-2013 --axis distance")).out) == 60);
  CHECK(lines(run(cli("sweep --preset paper-2013 --axis frequency")).out) == 72);

  const auto cmp = run(cli("sweep --preset paper-2013 --compare --out " + tmp("cmp.csv")));
  REQUIRE(cmp.code == 0);
  CHECK(cmp.out.find("# crossover") != std::string::npos);
  CHECK(lines(slurp(tmp("cmp.csv"))) == 1 + 2 * 59);
}

TEST_CASE("calibrate writes a loadable config") {
  const auto r = run(cli("calibrate --preset paper-2013 --out " + tmp("cal.json")));
  REQUIRE(r.code == 0);
  const auto again = run(cli("preset paper-2013"));
  CHECK(slurp(tmp("cal.json")) == again.out);
  CHECK(run(cli("report " + tmp("cal.json"))).code == 0);

  REQUIRE(run(cli("anchors --out " + tmp("anchors.json"))).code == 0);
  CHECK(run(cli("calibrate --preset paper-2013 --anchors " + tmp("anchors.json") + " --out " + tmp("cal2.json"))).code ==
        0);
}

TEST_CASE("presets") {
  const auto r = run(cli("preset --list"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("paper-2013-free-space") != std::string::npos);
  CHECK(run(cli("preset nope 2>/dev/null")).code == 2);
}
