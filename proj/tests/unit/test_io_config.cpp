#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "stmeta/config.hpp"
#include "stmeta/io.hpp"

using namespace stm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("stmeta_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

} // namespace

TEST_CASE("signal CSV round trip and interpolation") {
  const auto path = temp_path("signal.csv");
  write_signal_csv(path, {0.0, 0.5, 1.0}, {1.0, 3.0, 2.0});
  const auto s = read_signal_csv(path);
  CHECK(s.x.size() == 3u);
  CHECK(s.at(0.25) == doctest::Approx(2.0));
  CHECK(s.at(-1.0) == 1.0);
  CHECK(s.at(2.0) == 2.0);
  write_file(path, "t,value\n0,1\n1,2\n");
  CHECK_THROWS_AS(read_signal_csv(path), IoError);
  write_file(path, "x,value\n0,1\n0,2\n");
  CHECK_THROWS_AS(read_signal_csv(path), IoError);
  write_file(path, "x,value\n0,abc\n1,2\n");
  CHECK_THROWS_AS(read_signal_csv(path), IoError);
  CHECK_THROWS_AS(read_signal_csv(temp_path("missing.csv")), IoError);
}

TEST_CASE("PGM round trip, orientation and errors") {
  const auto path = temp_path("img.pgm");
  write_pgm(path, 3, 2, {0, 10, 20, 30, 40, 255});
  auto img = read_pgm(path);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  // Top-left pixel is (x, y) = (0, 1).
  CHECK(img.sample(0.0, 1.0) == 0.0);
  CHECK(img.sample(1.0, 0.0) == 255.0);
  CHECK(img.sample(0.25, 1.0) == doctest::Approx(5.0));
  const auto map = normalize(img);
  CHECK(map.min == 0.0);
  CHECK(map.max == 255.0);
  CHECK(img.pixel(2, 1) == 1.0);
  write_file(path, "P5\n# comment\n4 4\n255\nabc");
  CHECK_THROWS_AS(read_pgm(path), IoError);
  write_file(path, "P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(read_pgm(path), IoError);
}

TEST_CASE("frame PGM clamps and writes the sidecar") {
  const auto path = temp_path("frame.pgm");
  ImageFrame f;
  f.nx = 2;
  f.ny = 2;
  f.values = {-0.5, 0.5, 1.0, 2.0}; // bottom row first
  write_frame_pgm(path, f, IntensityMap{3.0, 7.0});
  const auto img = read_pgm(path);
  CHECK(img.pixel(0, 0) == 255.0); // top row is y = 1
  CHECK(img.pixel(1, 0) == 255.0);
  CHECK(img.pixel(0, 1) == 0.0);
  CHECK(img.pixel(1, 1) == 128.0);
  std::ifstream meta(path + ".meta.txt");
  std::string line;
  std::getline(meta, line);
  CHECK(line == "min=3 max=7");
}

TEST_CASE("config merging and validation") {
  RunConfig c;
  merge_json(c, R"({"dim": 2, "sigma_inv2": 100000, "levels": [5, 10]})");
  CHECK(c.dim == 2);
  CHECK(c.sigma_inv2 == 1e5);
  CHECK(c.levels == std::vector<int>{5, 10});
  CHECK_THROWS_AS(merge_json(c, R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(merge_json(c, R"({"dim": "two"})"), ConfigError);
  CHECK_THROWS_AS(merge_json(c, "[1, 2]"), ConfigError);
  CHECK_THROWS_AS(merge_json(c, "{"), ConfigError);
  RunConfig round;
  merge_json(round, to_json(c));
  CHECK(to_json(round) == to_json(c));
  c.alpha = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  CHECK(parse_levels("4,16,36") == std::vector<int>{4, 16, 36});
  CHECK_THROWS_AS(parse_levels("4,x"), ConfigError);
  CHECK(RunConfig{}.outer().alpha == 0.1);
  CHECK(RunConfig{}.resolved_n_time() == 16);
}
