#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "spikecam/pgm.hpp"
#include "spikecam/stream_codec.hpp"
#include "spikectl/commands.hpp"

using namespace spikecam;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = spikectl::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("spikectl_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_SUITE("spikectl") {
  TEST_CASE("frame naming and gamma helpers") {
    CHECK(spikectl::frame_filename(4096) == "frame_0004096.pgm");
    CHECK(spikectl::frame_filename(0, "events_") == "events_0000000.pgm");

    Frame f(4, 1, 255, 0);
    f.pixels = {0, 255, 64, 128};
    auto g = f;
    spikectl::gamma_correct(g, 2.2);
    CHECK(g.pixels[0] == 0);
    CHECK(g.pixels[1] == 255);
    CHECK(g.pixels[2] == static_cast<std::uint16_t>(std::floor(255 * std::pow(64 / 255.0, 1 / 2.2) + 0.5)));
    CHECK(g.pixels[3] > 128);
    auto off = f;
    spikectl::gamma_correct(off, 0.0);
    CHECK(off == f);
    CHECK_THROWS_AS(spikectl::gamma_correct(off, -1.0), std::invalid_argument);
    for (double gamma : {0.5, 1.0, 2.2, 7.0}) {
      Frame ends(2, 1, 1000, 0);
      ends.pixels = {0, 1000};
      spikectl::gamma_correct(ends, gamma);
      CHECK(ends.pixels == std::vector<std::uint16_t>{0, 1000});
    }
  }

  TEST_CASE("simulate constant I=51 matches the rate-law oracle") {
    Workspace ws;
    const auto r = cli({"simulate", "--scene", "constant", "--width", "64", "--height", "64", "--ticks", "2048",
                        "--intensity", "51", "--phi", "255", "-o", ws("c.spks")});
    REQUIRE(r.code == 0);
    const auto per_pixel = oracle::fire_ticks(51, 255, false, 2048).size();
    CHECK(per_pixel == 409);
    CHECK(contains(r.out, "total spikes: " + std::to_string(64 * 64 * per_pixel)));
    CHECK(contains(r.out, "geometry: 64×64 @ 40000 Hz, 2048 ticks"));
    CHECK(load_stream(ws("c.spks")).total_spikes() == 64 * 64 * per_pixel);
  }

  TEST_CASE("simulate zero intensity gives zero spikes") {
    Workspace ws;
    const auto r = cli({"simulate", "--intensity", "0", "--width", "8", "--height", "8", "--ticks", "100", "-o",
                        ws("z.spks")});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "total spikes: 0"));
  }

  TEST_CASE("simulate is deterministic") {
    Workspace ws;
    const std::vector<std::string> base{"simulate", "--scene", "bar", "--width", "32", "--height", "8",
                                        "--ticks", "300", "--reset", "subtract"};
    auto a = base;
    a.insert(a.end(), {"-o", ws("a.spks")});
    auto b = base;
    b.insert(b.end(), {"-o", ws("b.spks")});
    REQUIRE(cli(a).code == 0);
    REQUIRE(cli(b).code == 0);
    CHECK(slurp(ws("a.spks")) == slurp(ws("b.spks")));
    CHECK(load_stream(ws("a.spks")).header().reset_mode == ResetMode::Subtract);
  }

  TEST_CASE("disc stream has a bimodal ISI histogram") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--scene", "disc", "--width", "64", "--height", "64", "--ticks", "1200", "--rate",
                 "20000", "--rpm", "2000", "-o", ws("d.spks")})
                .code == 0);
    const auto r = cli({"stats", ws("d.spks"), "--region", "8,8,48,48", "--split"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("isi,count\n", 0) == 0);
    CHECK(contains(r.out, "# bimodal=yes"));
    CHECK(contains(r.out, "short_peak=2"));
    CHECK(contains(r.out, "long_peak=6"));
  }

  TEST_CASE("simulate from images") {
    Workspace ws;
    write_pgm(ws("a.pgm"), 2, 2, 255, std::vector<std::uint16_t>{255, 51, 0, 85});
    write_pgm(ws("b.pgm"), 2, 2, 255, std::vector<std::uint16_t>{255, 51, 0, 85});
    const auto r = cli({"simulate", "--scene", "images", "--images", ws("a.pgm") + "," + ws("b.pgm"),
                        "--ticks-per-frame", "50", "-o", ws("i.spks")});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "2×2 @ 40000 Hz, 100 ticks"));
    const auto s = load_stream(ws("i.spks"));
    CHECK(oracle::spike_ticks(s, 0, 0).size() == 100);
    CHECK(oracle::spike_ticks(s, 1, 0).size() == 20);
    CHECK(oracle::spike_ticks(s, 0, 1).empty());
  }

  TEST_CASE("simulate usage errors") {
    Workspace ws;
    CHECK(cli({"simulate"}).code == 2);  // -o missing
    CHECK(cli({"simulate", "--intensity", "300", "-o", ws("x.spks")}).code == 2);
    CHECK(cli({"simulate", "--reset", "subtract", "--phi", "100", "-o", ws("x.spks")}).code == 2);
    CHECK(cli({"simulate", "--scene", "teapot", "-o", ws("x.spks")}).code == 2);
    CHECK(cli({"simulate", "--bogus", "-o", ws("x.spks")}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({}).code == 2);
    const auto missing = cli({"simulate", "--scene", "images", "--images", ws("nope.pgm"), "-o", ws("x.spks")});
    CHECK(missing.code == 1);
    CHECK_FALSE(missing.err.empty());
  }

  TEST_CASE("help exits cleanly") {
    const auto r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "reconstruct"));
    CHECK(cli({"reconstruct", "--help"}).code == 0);
  }

  TEST_CASE("reconstruct tfp on a saturated stream is all white") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--intensity", "255", "--width", "6", "--height", "4", "--ticks", "128", "-o",
                 ws("s.spks")})
                .code == 0);
    for (const std::string gamma : {"0", "2.2"}) {
      const auto r = cli({"reconstruct", ws("s.spks"), "--method", "tfp", "--window", "64", "--at", "100",
                          "--gamma", gamma, "--out-dir", ws("out")});
      REQUIRE(r.code == 0);
      const auto img = read_pgm(fs::path(ws("out")) / "frame_0000100.pgm");
      CHECK(img.width == 6);
      for (auto v : img.pixels) CHECK(v == 255);
    }
  }

  TEST_CASE("reconstruct tfi before the second spike is all black") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--intensity", "51", "--width", "4", "--height", "4", "--ticks", "40", "-o",
                 ws("s.spks")})
                .code == 0);
    const auto r = cli({"reconstruct", ws("s.spks"), "--method", "tfi", "--at", "0,8,9,39", "--gamma", "0",
                        "--out-dir", ws("out")});
    REQUIRE(r.code == 0);
    auto frame = [&](const std::string& name) { return read_pgm(fs::path(ws("out")) / name); };
    for (auto v : frame("frame_0000000.pgm").pixels) CHECK(v == 0);
    for (auto v : frame("frame_0000008.pgm").pixels) CHECK(v == 0);
    for (auto v : frame("frame_0000009.pgm").pixels) CHECK(v == 51);
    for (auto v : frame("frame_0000039.pgm").pixels) CHECK(v == 51);
    CHECK(contains(r.out, "frame_0000039.pgm"));
  }

  TEST_CASE("reconstruct frame selection and defaults") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--width", "4", "--height", "4", "--ticks", "100", "-o", ws("s.spks")}).code == 0);
    auto r = cli({"reconstruct", ws("s.spks"), "--method", "tfi", "--every", "25", "--out-dir", ws("e")});
    REQUIRE(r.code == 0);
    for (const char* name : {"frame_0000024.pgm", "frame_0000049.pgm", "frame_0000074.pgm", "frame_0000099.pgm"}) {
      CHECK(fs::exists(fs::path(ws("e")) / name));
    }
    CHECK(std::distance(fs::directory_iterator(ws("e")), fs::directory_iterator{}) == 4);

    r = cli({"reconstruct", ws("s.spks"), "--method", "tfa", "--out-dir", ws("last")});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(fs::path(ws("last")) / "frame_0000099.pgm"));

    r = cli({"reconstruct", ws("s.spks"), "--method", "tfi", "-C", "1000", "--gamma", "0", "--out-dir", ws("c")});
    REQUIRE(r.code == 0);
    const auto img = read_pgm(fs::path(ws("c")) / "frame_0000099.pgm");
    CHECK(img.maxval == 1000);
    CHECK(img.pixels[0] == 500);  // I=128 -> ISI 2 -> 1000 / 2
  }

  TEST_CASE("reconstruct usage and runtime errors") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--width", "4", "--height", "4", "--ticks", "10", "-o", ws("s.spks")}).code == 0);
    CHECK(cli({"reconstruct", ws("s.spks"), "--method", "tfp"}).code == 2);  // no --window
    CHECK(cli({"reconstruct", ws("s.spks")}).code == 2);                     // no --method
    CHECK(cli({"reconstruct", ws("s.spks"), "--method", "tfx"}).code == 2);
    const auto late = cli({"reconstruct", ws("s.spks"), "--method", "tfi", "--at", "10", "--out-dir", ws("o")});
    CHECK(late.code == 2);
    CHECK(contains(late.err, "out of range"));
    CHECK(cli({"reconstruct", ws("s.spks"), "--method", "tfi", "--gamma", "-1"}).code == 2);
    CHECK(cli({"reconstruct", ws("s.spks"), "--method", "tfa", "--tau", "0"}).code == 2);
    CHECK(cli({"reconstruct", ws("missing.spks"), "--method", "tfi"}).code == 1);
  }

  TEST_CASE("events: static scene gives an empty CSV, step gives one row per changed pixel") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--width", "8", "--height", "8", "--ticks", "400", "-o", ws("static.spks")}).code == 0);
    auto r = cli({"events", ws("static.spks")});
    REQUIRE(r.code == 0);
    CHECK(r.out == "tick,x,y,polarity\n");
    CHECK(contains(r.err, "0 events"));

    REQUIRE(cli({"simulate", "--scene", "step", "--width", "8", "--height", "8", "--ticks", "400",
                 "--step-tick", "200", "--step-region", "2,2,3,4", "-o", ws("step.spks")})
                .code == 0);
    r = cli({"events", ws("step.spks"), "-o", ws("ev.csv"), "--frames-dir", ws("frames"), "--bin", "100"});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "12 events (on: 12, off: 0)"));
    std::istringstream csv(slurp(ws("ev.csv")));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "tick,x,y,polarity");
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      CHECK(line.substr(line.size() - 2) == ",1");
    }
    CHECK(rows == 12);
    CHECK(std::distance(fs::directory_iterator(ws("frames")), fs::directory_iterator{}) == 4);
    const auto quiet = read_pgm(fs::path(ws("frames")) / "events_0000000.pgm");
    for (auto v : quiet.pixels) CHECK(v == 128);
    const auto busy = read_pgm(fs::path(ws("frames")) / "events_0000200.pgm");
    CHECK(busy.at(2, 2) == 255);
    CHECK(busy.at(0, 0) == 128);
    CHECK(cli({"events", ws("step.spks"), "--theta", "0"}).code == 2);
  }

  TEST_CASE("stats: periodic pixel, empty pixel, bad region") {
    Workspace ws;
    StreamHeader h;
    h.width = 3;
    h.height = 2;
    h.num_ticks = 50;
    SpikeStream s(h);
    for (std::uint64_t t = 0; t < 50; t += 5) s.set_spike(1, 1, t);
    save_stream(s, ws("p.spks"));
    auto r = cli({"stats", ws("p.spks"), "--pixel", "1,1"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "isi,count\n5,9\n");
    r = cli({"stats", ws("p.spks"), "--pixel", "0,0", "--split"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "isi,count\n# split none (fewer than two peaks)\n");
    CHECK(cli({"stats", ws("p.spks"), "--pixel", "3,0"}).code == 2);
    CHECK(cli({"stats", ws("p.spks"), "--region", "0,0,4,2"}).code == 2);
    r = cli({"stats", ws("p.spks"), "-o", ws("h.csv")});
    REQUIRE(r.code == 0);
    CHECK(slurp(ws("h.csv")) == "isi,count\n5,9\n");
  }

  TEST_CASE("bench report format") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--width", "16", "--height", "16", "--ticks", "500", "-o", ws("b.spks")}).code == 0);
    for (const std::string method : {"tfi", "tfp", "tfa"}) {
      const auto r = cli({"bench", ws("b.spks"), "--method", method, "--every", "100"});
      REQUIRE(r.code == 0);
      CHECK(contains(r.out, "geometry: 16×16 @ 40000 Hz, 500 ticks"));
      CHECK(contains(r.out, "method: " + method));
      CHECK(contains(r.out, "repeats: 5"));
      CHECK(contains(r.out, "ticks/s: "));
      CHECK(contains(r.out, "frames/s: "));
      CHECK((contains(r.out, "status: REALTIME") || contains(r.out, "status: BELOW_REALTIME")));
    }
    CHECK(contains(cli({"bench", ws("b.spks"), "--repeat", "3"}).out, "repeats: 3"));
    CHECK(cli({"bench", ws("b.spks"), "--repeat", "0"}).code == 2);
  }

  TEST_CASE("info: default geometry and a full-length 400x250 header") {
    Workspace ws;
    REQUIRE(cli({"simulate", "--width", "400", "--height", "250", "--ticks", "3", "-o", ws("d.spks")}).code == 0);
    auto r = cli({"info", ws("d.spks")});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "12500 bytes/tick"));
    CHECK(contains(r.out, "format: SPKS v1"));

    // Full-length file without materializing 1.9 GB of planes: sparse resize.
    StreamHeader h;
    h.num_ticks = 153600;
    {
      std::ofstream f(ws("t1.spks"), std::ios::binary);
      write_header(h, f);
    }
    fs::resize_file(ws("t1.spks"), kHeaderBytes + h.plane_bytes() * h.num_ticks);
    r = cli({"info", ws("t1.spks")});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "400×250 @ 40000 Hz, 153600 ticks"));
    CHECK(contains(r.out, "12500 bytes/tick"));

    fs::resize_file(ws("t1.spks"), kHeaderBytes + 12500);
    r = cli({"info", ws("t1.spks")});
    CHECK(r.code == 1);
    CHECK(contains(r.err, "truncated stream"));
    fs::remove(ws("t1.spks"));

    std::ofstream(ws("junk.spks")) << "not a stream at all, just text padding the header out";
    r = cli({"info", ws("junk.spks")});
    CHECK(r.code == 1);
    CHECK(contains(r.err, "not a spike stream"));
  }

  TEST_CASE("config file and flags give identical outputs; flags win") {
    Workspace ws;
    std::ofstream(ws("sim.cfg")) << "# scene\nscene = step\nwidth=12\nheight = 5\nticks=300\nstep-tick=120\n"
                                 << "reset=subtract\n\noutput=" << ws("cfg.spks") << "\n";
    REQUIRE(cli({"simulate", "--config", ws("sim.cfg")}).code == 0);
    REQUIRE(cli({"simulate", "--scene", "step", "--width", "12", "--height", "5", "--ticks", "300", "--step-tick",
                 "120", "--reset", "subtract", "-o", ws("flags.spks")})
                .code == 0);
    CHECK(slurp(ws("cfg.spks")) == slurp(ws("flags.spks")));

    REQUIRE(cli({"simulate", "--config", ws("sim.cfg"), "--width", "7", "-o", ws("override.spks")}).code == 0);
    const auto h = inspect_stream(ws("override.spks"));
    CHECK(h.width == 7);
    CHECK(h.height == 5);

    std::ofstream(ws("rec.cfg")) << "method=tfp\nwindow=32\nat=100,200\ngamma=0\nout-dir=" << ws("rc") << "\n";
    REQUIRE(cli({"reconstruct", ws("flags.spks"), "--config", ws("rec.cfg")}).code == 0);
    REQUIRE(cli({"reconstruct", ws("flags.spks"), "--method", "tfp", "--window", "32", "--at", "100,200",
                 "--gamma", "0", "--out-dir", ws("rf")})
                .code == 0);
    for (const char* name : {"frame_0000100.pgm", "frame_0000200.pgm"}) {
      CHECK(slurp((fs::path(ws("rc")) / name).string()) == slurp((fs::path(ws("rf")) / name).string()));
    }

    std::ofstream(ws("stats.cfg")) << "split=true\npixel=0,0\n";
    CHECK(contains(cli({"stats", ws("flags.spks"), "--config", ws("stats.cfg")}).out, "# split"));
    std::ofstream(ws("info.cfg")) << "input=" << ws("flags.spks") << "\n";
    CHECK(contains(cli({"info", "--config", ws("info.cfg")}).out, "12×5 @ 40000 Hz, 300 ticks"));

    std::ofstream(ws("bad.cfg")) << "no-such-key=1\n";
    CHECK(cli({"simulate", "--config", ws("bad.cfg"), "-o", ws("x.spks")}).code == 2);
    std::ofstream(ws("bad2.cfg")) << "just words\n";
    CHECK(cli({"simulate", "--config", ws("bad2.cfg"), "-o", ws("x.spks")}).code == 2);
    CHECK(cli({"simulate", "--config", ws("missing.cfg"), "-o", ws("x.spks")}).code == 2);
  }
}
