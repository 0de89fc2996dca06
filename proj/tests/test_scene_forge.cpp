#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "spikecam/pgm.hpp"
#include "spikecam/scene_forge.hpp"

using namespace spikecam;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spikecam_scene_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string write_image(const fs::path& path, std::uint32_t w, std::uint32_t h,
                        const std::vector<std::uint16_t>& px, std::uint32_t maxval = 255) {
  write_pgm(path, w, h, maxval, px);
  return path.string();
}

SceneSpec disc_spec() {
  SceneSpec s;
  s.kind = SceneKind::SpinningDisc;
  s.width = 64;
  s.height = 64;
  s.num_ticks = 1300;
  s.tick_rate = 20000;
  s.rpm = 2000;
  return s;
}

}  // namespace

TEST_SUITE("scene_forge") {
  TEST_CASE("constant scene") {
    SceneSpec s;
    s.width = 4;
    s.height = 4;
    s.num_ticks = 100;
    s.intensity = 128;
    const auto scene = generate(s);
    CHECK(scene.width() == 4);
    CHECK(scene.num_ticks() == 100);
    for (std::uint64_t t = 0; t < 100; ++t) {
      for (auto v : scene.plane(t)) CHECK(v == 128);
    }
  }

  TEST_CASE("step scene switches at the step tick") {
    SceneSpec s;
    s.kind = SceneKind::Step;
    s.width = 3;
    s.height = 2;
    s.num_ticks = 100;
    const auto scene = generate(s);
    for (std::uint64_t t = 0; t < 100; ++t) {
      for (auto v : scene.plane(t)) CHECK(v == (t < 50 ? 64 : 192));
    }
  }

  TEST_CASE("step region limits the change") {
    SceneSpec s;
    s.kind = SceneKind::Step;
    s.width = 6;
    s.height = 6;
    s.num_ticks = 60;
    s.step_region = Rect{1, 2, 3, 2};
    const auto scene = generate(s);
    for (std::uint32_t y = 0; y < 6; ++y) {
      for (std::uint32_t x = 0; x < 6; ++x) {
        const bool inside = x >= 1 && x < 4 && y >= 2 && y < 4;
        CHECK(scene.at(x, y, 10) == 64);
        CHECK(scene.at(x, y, 55) == (inside ? 192 : 64));
      }
    }
    s.step_region = Rect{4, 4, 3, 1};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }

  TEST_CASE("moving bar slides right and wraps") {
    SceneSpec s;
    s.kind = SceneKind::MovingBar;
    s.width = 20;
    s.height = 3;
    s.num_ticks = 500;
    s.bar_width = 4;
    s.bar_speed = 0.1;
    const auto scene = generate(s);
    auto bright_columns = [&](std::uint64_t t) {
      std::vector<std::uint32_t> cols;
      for (std::uint32_t x = 0; x < 20; ++x) {
        if (scene.at(x, 1, t) == s.bar_intensity) cols.push_back(x);
        CHECK(scene.at(x, 0, t) == scene.at(x, 2, t));
      }
      return cols;
    };
    CHECK(bright_columns(0) == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(bright_columns(50) == std::vector<std::uint32_t>{5, 6, 7, 8});
    CHECK(bright_columns(180) == std::vector<std::uint32_t>{0, 1, 18, 19});
    CHECK(bright_columns(200) == bright_columns(0));
    CHECK(scene.max_intensity() == 200);
  }

  TEST_CASE("disc angle follows rpm and tick rate") {
    const SceneRenderer r(disc_spec());
    CHECK(r.disc_turns(0) == 0.0);
    CHECK(r.disc_turns(150) == doctest::Approx(0.25));
    CHECK(r.disc_turns(300) == doctest::Approx(0.5));
    // 60 * 20000 / 2000 = 600 ticks per revolution
    CHECK(r.disc_turns(600) == 0.0);
    CHECK(r.disc_turns(1200) == 0.0);
    CHECK(r.disc_radius() == doctest::Approx(0.45 * 64));
  }

  TEST_CASE("disc pixels are periodic with 600 ticks at 2000 rpm and 20000 Hz") {
    const auto scene = generate(disc_spec());
    for (std::uint64_t t = 0; t < 700; t += 7) {
      const auto a = scene.plane(t);
      const auto b = scene.plane(t + 600);
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    // ...and actually moving within a period
    const auto a = scene.plane(0);
    const auto b = scene.plane(150);
    CHECK_FALSE(std::equal(a.begin(), a.end(), b.begin()));
  }

  TEST_CASE("disc levels and ground truth agree") {
    const auto spec = disc_spec();
    const SceneRenderer r(spec);
    std::vector<std::uint16_t> plane(std::size_t{spec.width} * spec.height);
    std::size_t pattern = 0, disc = 0, outside = 0;
    for (std::uint64_t t : {0, 77, 311}) {
      r.render(t, plane);
      for (std::uint32_t y = 0; y < spec.height; ++y) {
        for (std::uint32_t x = 0; x < spec.width; ++x) {
          const auto v = plane[std::size_t{y} * spec.width + x];
          if (!r.inside_disc(x, y)) {
            CHECK(v == spec.outside_intensity);
            ++outside;
          } else if (r.pattern_at(x, y, t)) {
            CHECK(v == spec.pattern_intensity);
            ++pattern;
          } else {
            CHECK(v == spec.disc_intensity);
            ++disc;
          }
        }
      }
    }
    CHECK(pattern > 100);
    CHECK(disc > pattern);
    CHECK(outside > 0);
    // Independent inside-disc check from the geometry.
    const double c = (spec.width - 1) / 2.0;
    for (std::uint32_t x = 0; x < spec.width; ++x) {
      const double d = std::abs(x - c);
      CHECK(r.inside_disc(x, 31) == (d <= r.disc_radius()));
    }
  }

  TEST_CASE("a rotated pattern moves along a circle") {
    // The star sits at +0.45R on the u axis at tick 0; after a quarter turn the
    // pattern centroid should have rotated by 90 degrees about the center.
    const auto spec = disc_spec();
    const SceneRenderer r(spec);
    auto centroid = [&](std::uint64_t t) {
      double sx = 0, sy = 0, n = 0;
      const double c = (spec.width - 1) / 2.0;
      for (std::uint32_t y = 0; y < spec.height; ++y) {
        for (std::uint32_t x = 0; x < spec.width; ++x) {
          if (r.pattern_at(x, y, t) && x > c) {
            sx += x - c;
            sy += y - c;
            ++n;
          }
        }
      }
      return std::array<double, 2>{sx / n, sy / n};
    };
    const auto a = centroid(0);
    CHECK(std::abs(a[1]) < 1.0);
    CHECK(a[0] > 0.3 * r.disc_radius());
    const double angle0 = std::atan2(a[1], a[0]);
    CHECK(std::abs(angle0) < 0.05);
    const auto b = centroid(60);  // 0.1 turn
    const double moved = std::atan2(b[1], b[0]) - angle0;
    CHECK(std::abs(std::abs(moved) - 0.2 * std::numbers::pi) < 0.08);
  }

  TEST_CASE("custom mask file") {
    TempDir dir;
    std::vector<std::uint16_t> px(21 * 21, 0);
    for (std::uint32_t y = 0; y < 21; ++y) {
      for (std::uint32_t x = 11; x < 21; ++x) px[y * 21 + x] = 255;  // right half bright
    }
    auto spec = disc_spec();
    spec.mask_path = write_image(dir.path / "mask.pgm", 21, 21, px);
    const SceneRenderer r(spec);
    CHECK(r.pattern_at(50, 31, 0));
    CHECK_FALSE(r.pattern_at(13, 31, 0));
    CHECK(r.pattern_at(13, 31, 300));  // half a turn later
    write_image(dir.path / "rect.pgm", 21, 10, std::vector<std::uint16_t>(210, 0));
    spec.mask_path = (dir.path / "rect.pgm").string();
    CHECK_THROWS_AS(SceneRenderer{spec}, std::invalid_argument);
  }

  TEST_CASE("image ingestion with hold") {
    TempDir dir;
    const std::vector<std::uint16_t> a{0, 10, 20, 30, 40, 250};
    const auto path = write_image(dir.path / "a.pgm", 3, 2, a);
    const auto scene = ingest_images({path}, 40000, Interpolation::Hold, 100);
    CHECK(scene.width() == 3);
    CHECK(scene.height() == 2);
    CHECK(scene.num_ticks() == 100);
    CHECK(scene.tick_rate() == 40000);
    for (std::uint64_t t = 0; t < 100; ++t) {
      const auto p = scene.plane(t);
      CHECK(std::equal(p.begin(), p.end(), a.begin()));
    }
  }

  TEST_CASE("image ingestion with linear ramps") {
    TempDir dir;
    const std::vector<std::uint16_t> a{0, 10, 255, 7};
    const std::vector<std::uint16_t> b{100, 11, 0, 8};
    const auto pa = write_image(dir.path / "a.pgm", 2, 2, a);
    const auto pb = write_image(dir.path / "b.pgm", 2, 2, b);
    const auto scene = ingest_images({pa, pb}, 40000, Interpolation::Linear, 100);
    CHECK(scene.num_ticks() == 101);
    for (std::size_t p = 0; p < 4; ++p) {
      CHECK(scene.plane(0)[p] == a[p]);
      CHECK(scene.plane(100)[p] == b[p]);
      CHECK(scene.plane(50)[p] == (a[p] + b[p] + 1) / 2);  // midpoint, half rounded up
    }
    // Monotone between endpoints.
    for (std::uint64_t t = 1; t <= 100; ++t) {
      CHECK(scene.plane(t)[0] >= scene.plane(t - 1)[0]);
      CHECK(scene.plane(t)[2] <= scene.plane(t - 1)[2]);
    }
    const auto hold = ingest_images({pa, pb}, 40000, Interpolation::Hold, 10);
    CHECK(hold.num_ticks() == 20);
    CHECK(hold.plane(9)[0] == 0);
    CHECK(hold.plane(10)[0] == 100);
  }

  TEST_CASE("image ingestion errors") {
    TempDir dir;
    const auto pa = write_image(dir.path / "a.pgm", 2, 2, {1, 2, 3, 4});
    const auto pb = write_image(dir.path / "b.pgm", 3, 1, {1, 2, 3});
    CHECK_THROWS_AS(ingest_images({pa, pb}, 40000, Interpolation::Hold, 10), std::invalid_argument);
    const auto deep = write_image(dir.path / "deep.pgm", 2, 2, {1, 2, 3, 1000}, 1023);
    CHECK_THROWS_AS(ingest_images({deep}, 40000, Interpolation::Hold, 10), std::invalid_argument);
    CHECK_THROWS(ingest_images({(dir.path / "missing.pgm").string()}, 40000, Interpolation::Hold, 10));
    CHECK_THROWS_AS(ingest_images({}, 40000, Interpolation::Hold, 10), std::invalid_argument);
  }

  TEST_CASE("spec validation") {
    SceneSpec s;
    s.intensity = 300;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SceneSpec{};
    s.tick_rate = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = disc_spec();
    s.rpm = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SceneSpec{};
    s.width = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK_NOTHROW(disc_spec().validate());
  }

  TEST_CASE("property: generators are deterministic and stay in range") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      SceneSpec s;
      s.kind = static_cast<SceneKind>(rng() % 4);
      s.width = 8 + rng() % 24;
      s.height = 8 + rng() % 24;
      s.num_ticks = 50;
      s.i_max = 100 + rng() % 156;
      s.intensity = rng() % (s.i_max + 1);
      s.step_from = rng() % (s.i_max + 1);
      s.step_to = rng() % (s.i_max + 1);
      s.step_tick = rng() % 50;
      s.bar_intensity = rng() % (s.i_max + 1);
      s.background = rng() % (s.i_max + 1);
      s.bar_speed = (rng() % 100) / 37.0 - 1.0;
      s.pattern_intensity = rng() % (s.i_max + 1);
      s.disc_intensity = rng() % (s.i_max + 1);
      s.rpm = 1 + rng() % 5000;
      const auto a = generate(s);
      const auto b = generate(s);
      CHECK(a.max_intensity() <= s.i_max);
      for (std::uint64_t t = 0; t < 50; ++t) {
        const auto pa = a.plane(t);
        const auto pb = b.plane(t);
        CHECK(std::equal(pa.begin(), pa.end(), pb.begin()));
      }
    }
  }

  TEST_CASE("pgm round trip and rejection") {
    const std::vector<std::uint16_t> px{0, 1, 2, 254, 255, 128};
    std::stringstream ss;
    write_pgm(ss, 3, 2, 255, px);
    CHECK(ss.str().rfind("P5\n3 2\n255\n", 0) == 0);
    CHECK(ss.str().size() == 11 + 6);
    const auto img = read_pgm(ss);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.pixels == px);

    std::istringstream commented(std::string("P5\n# a comment\n2 1 # trailing\n255\n") + "\x05\x06");
    const auto c = read_pgm(commented);
    CHECK(c.pixels == std::vector<std::uint16_t>{5, 6});

    std::stringstream wide;
    write_pgm(wide, 2, 1, 1023, std::vector<std::uint16_t>{1, 1000});
    CHECK(read_pgm(wide).pixels == std::vector<std::uint16_t>{1, 1000});

    std::istringstream color("P6\n1 1\n255\n\x01\x02\x03");
    CHECK_THROWS_AS(read_pgm(color), PgmError);
    std::istringstream ascii("P2\n1 1\n255\n7\n");
    CHECK_THROWS_AS(read_pgm(ascii), PgmError);
    std::istringstream short_body("P5\n4 4\n255\n\x01\x02");
    CHECK_THROWS_AS(read_pgm(short_body), PgmError);
  }
}
