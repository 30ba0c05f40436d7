#include <doctest.h>

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "../support/test_support.hpp"
#include "r2d2/config.hpp"
#include "r2d2/errors.hpp"
#include "r2d2/image_io.hpp"

using namespace r2d2;
using namespace r2d2::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("r2d2_io_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("raw format layout is byte exact") {
  const Image x(2, 3, std::vector<double>{0.0, 1.0, -2.0, 0.5, 0.25, 1e-3});
  const fs::path p = scratch("layout.r2d2");
  save_image(x, p, ImageFormat::raw);
  const std::string bytes = slurp(p);
  REQUIRE(bytes.size() == 16 + 6 * 4);
  CHECK(bytes.substr(0, 4) == "R2D2");
  const unsigned char header[12] = {3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0};
  CHECK(std::memcmp(bytes.data() + 4, header, 12) == 0);
  float third;
  std::memcpy(&third, bytes.data() + 16 + 8, 4);
  CHECK(third == -2.0f);

  const Image back = load_image(p);
  CHECK(back.rows() == 2);
  CHECK(back.cols() == 3);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(x[i])));
}

TEST_CASE("raw round trip of float32 values is exact") {
  Image x = random_image(17, 5, 1, -3.0, 3.0);
  for (double& v : x.values()) v = static_cast<float>(v);
  const fs::path p = scratch("round.r2d2");
  save_image(x, p);
  CHECK(load_image(p) == x);
}

TEST_CASE("16-bit PNG quantization") {
  Image x(2, 3, std::vector<double>{0.0, 1.0, 0.5, -0.2, 1.7, 1000.75 / 65535.0});
  const fs::path p = scratch("q.png");
  CHECK(format_for_path(p) == ImageFormat::png16);
  CHECK(format_for_path(scratch("q.bin")) == ImageFormat::raw);
  save_image(x, p);
  const Image back = load_image(p);
  CHECK(back[0] == 0.0);
  CHECK(back[1] == 1.0);
  CHECK(back[2] == 32768.0 / 65535.0);  // 32767.5 rounds away from zero
  CHECK(back[3] == 0.0);
  CHECK(back[4] == 1.0);
  CHECK(back[5] == 1001.0 / 65535.0);
  const Image fine = random_image(9, 11, 4);
  save_image(fine, p);
  CHECK(max_abs_diff(load_image(p), fine) <= 0.5 / 65535.0 + 1e-15);
}

TEST_CASE("malformed images are rejected with IoError") {
  CHECK_THROWS_AS(load_image(scratch("missing.r2d2")), IoError);
  const fs::path p = scratch("bad.r2d2");
  spit(p, "R2D2\x02\0\0\0\x02\0\0\0\x01\0\0\0" + std::string(8, '\0'));  // truncated pixels
  CHECK_THROWS_AS(load_image(p), IoError);
  spit(p, "JUNKJUNKJUNKJUNK");
  CHECK_THROWS_AS(load_image(p), IoError);
  spit(p, std::string("R2D2\x01\0\0\0\x01\0\0\0\x07\0\0\0", 16) + "abcd");  // unknown dtype
  CHECK_THROWS_AS(load_image(p), IoError);
  const fs::path png = scratch("bad.png");
  spit(png, "\x89PNG\r\n\x1a\n garbage");
  CHECK_THROWS_AS(load_image(png), IoError);
}

TEST_CASE("atomic write leaves no temporary files") {
  const fs::path p = scratch("atomic.txt");
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  CHECK(slurp(p) == "two");
  int leftovers = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path()))
    if (e.path().filename().string().find("atomic.txt.") == 0) ++leftovers;
  CHECK(leftovers == 0);
}

TEST_CASE("config layering: defaults, file, explicit set") {
  RunConfig cfg;
  CHECK(cfg.get("alpha") == "0.2");
  CHECK_FALSE(cfg.has_value("sigma"));
  const fs::path p = scratch("run.cfg");
  spit(p, "# comment\nalpha = 0.5\n  lambda=0.01  # trailing\n\nseed = 7\n");
  cfg.merge_file(p);
  CHECK(cfg.get_double("alpha") == 0.5);
  CHECK(cfg.get_double("lambda") == 0.01);
  cfg.set("alpha", "0.9");
  const DenoiseConfig d = cfg.denoise_config();
  CHECK(d.alpha == 0.9);
  CHECK(d.lambda == 0.01);
  CHECK(d.seed == 7);
  CHECK(d.sr_steps == 20);
  CHECK_FALSE(d.sigma_override);
  CHECK(d.schedule.sigma_max() == 378.0);

  CHECK_THROWS_AS(cfg.set("bogus", "1"), DomainError);
  CHECK_THROWS_AS(cfg.merge_text("alpha 0.3\n", "inline"), DomainError);
  CHECK_THROWS_AS(cfg.merge_text("nope = 1\n", "inline"), DomainError);
  CHECK_THROWS_AS(cfg.merge_file(scratch("absent.cfg")), IoError);
  cfg.set("alpha", "abc");
  CHECK_THROWS_AS(cfg.denoise_config(), DomainError);
  cfg.set("alpha", "1.5");
  CHECK_THROWS_AS(cfg.denoise_config(), DomainError);
  cfg.set("alphas", "0.1, 0.3,1");
  CHECK(cfg.get_doubles("alphas") == std::vector<double>{0.1, 0.3, 1.0});
  cfg.set("alphas", "0.1,,2");
  CHECK_THROWS_AS(cfg.get_doubles("alphas"), DomainError);
  cfg.set("corrector_sr", "off");
  CHECK_FALSE(cfg.get_bool("corrector_sr"));
  cfg.set("cnr_mode", "paired");
  CHECK(cfg.cnr_mode() == CnrMode::paired);
  cfg.set("std_kind", "median");
  CHECK_THROWS_AS(cfg.std_kind(), DomainError);
}

TEST_CASE("ROI files") {
  const RoiSet set = parse_rois(R"([
    {"center": [10, 12.5], "radius": 4, "kind": "signal"},
    {"center": [3, 3], "radius": 2, "kind": "background"},
    {"center": [20, 20], "radius": 3}
  ])");
  REQUIRE(set.signal.size() == 2);
  REQUIRE(set.background.size() == 1);
  CHECK(set.signal[0].row == 10.0);
  CHECK(set.signal[0].col == 12.5);
  CHECK(set.signal[0].radius == 4.0);
  CHECK(set.background[0].kind == RoiKind::background);
  CHECK(parse_rois(R"({"rois": [{"center": [1, 1], "radius": 1}]})").signal.size() == 1);
  CHECK_THROWS_AS(parse_rois("{not json"), IoError);
  CHECK_THROWS_AS(parse_rois(R"([{"center": [1], "radius": 1}])"), IoError);
  CHECK_THROWS_AS(parse_rois(R"([{"center": [1, 1], "radius": 1, "kind": "edge"}])"), IoError);
  CHECK_THROWS_AS(load_rois(scratch("absent.json")), IoError);
}
