#include "spikectl/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "spikecam/core_model.hpp"
#include "spikecam/event_bridge.hpp"
#include "spikecam/isi_stats.hpp"
#include "spikecam/pgm.hpp"
#include "spikecam/reconstruct.hpp"
#include "spikecam/scene_forge.hpp"
#include "spikecam/stream_codec.hpp"

namespace spikectl {

using namespace spikecam;
namespace fs = std::filesystem;

namespace {

// Bad flag values found after CLI parsing; reported with the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Tfi, Tfp, Tfa };

const char* to_string(Method m) {
  switch (m) {
    case Method::Tfi:
      return "tfi";
    case Method::Tfp:
      return "tfp";
    case Method::Tfa:
      return "tfa";
  }
  return "?";
}

struct SimulateOpts {
  SceneSpec scene;
  SamplerConfig sampler;
  std::vector<std::uint32_t> step_region;
  std::string output;
};

struct TfaOpts {
  TfaConfig config;
};

struct ReconstructOpts {
  std::string input;
  Method method = Method::Tfi;
  std::vector<std::uint64_t> at;
  std::uint64_t every = 0;
  std::uint64_t window = 0;
  std::optional<double> gamma;
  std::uint32_t range = kDefaultRange;
  std::string out_dir = ".";
  TfaConfig tfa;
};

struct EventsOpts {
  std::string input;
  double theta = EventConfig{}.theta;
  std::string output = "-";
  std::string frames_dir;
  std::uint64_t bin = 0;
};

struct StatsOpts {
  std::string input;
  std::vector<std::uint32_t> pixel;
  std::vector<std::uint32_t> region;
  std::string output = "-";
  bool split = false;
};

struct BenchOpts {
  std::string input;
  Method method = Method::Tfi;
  unsigned repeat = 5;
  std::uint64_t window = 512;
  std::uint64_t every = 400;
  TfaConfig tfa;
};

struct InfoOpts {
  std::string input;
};

struct Options {
  SimulateOpts simulate;
  ReconstructOpts reconstruct;
  EventsOpts events;
  StatsOpts stats;
  BenchOpts bench;
  InfoOpts info;
  std::string config;
};

const std::map<std::string, Method> kMethods{{"tfi", Method::Tfi}, {"tfp", Method::Tfp}, {"tfa", Method::Tfa}};

void add_tfa_flags(CLI::App* sub, TfaConfig& c) {
  sub->add_option("--tau", c.tau, "TFA kernel time constant (ticks)")->capture_default_str();
  sub->add_option("--delay", c.delay, "TFA kernel delay (ticks)")->capture_default_str();
  sub->add_option("--history", c.window, "TFA spike-count window T (ticks)")->capture_default_str();
  sub->add_option("--theta0", c.theta0, "TFA initial threshold")->capture_default_str();
  sub->add_option("--horizon", c.horizon, "TFA kernel truncation K (ticks, 0 = automatic)")->capture_default_str();
  sub->add_flag("--count-output,!--count-input", c.count_output_spikes,
                "TFA threshold adapts on model firings (default) or, with --count-input, on input spikes");
}

// Declares every subcommand and binds it to `o`. Built twice per run: once to
// find which flags were given explicitly, once with config values filled in.
void build_app(CLI::App& app, Options& o) {
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Sample a synthetic or image scene into a .spks stream");
  auto& s = o.simulate;
  sim->add_option("--scene", s.scene.kind, "Scene kind")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, SceneKind>{{"constant", SceneKind::Constant},
                                           {"step", SceneKind::Step},
                                           {"bar", SceneKind::MovingBar},
                                           {"disc", SceneKind::SpinningDisc},
                                           {"images", SceneKind::ImageSequence}},
          CLI::ignore_case));
  sim->add_option("--width", s.scene.width, "Width in pixels")->capture_default_str();
  sim->add_option("--height", s.scene.height, "Height in pixels")->capture_default_str();
  sim->add_option("--ticks", s.scene.num_ticks, "Number of ticks")->capture_default_str();
  sim->add_option("--rate", s.scene.tick_rate, "Tick rate (Hz)")->capture_default_str();
  sim->add_option("--intensity", s.scene.intensity, "Constant scene intensity")->capture_default_str();
  sim->add_option("--step-from", s.scene.step_from, "Step scene level before the step")->capture_default_str();
  sim->add_option("--step-to", s.scene.step_to, "Step scene level after the step")->capture_default_str();
  sim->add_option("--step-tick", s.scene.step_tick, "Tick at which the step happens")->capture_default_str();
  sim->add_option("--step-region", s.step_region, "Region x,y,w,h that steps (default: whole frame)")
      ->expected(4)
      ->delimiter(',');
  sim->add_option("--bar-width", s.scene.bar_width, "Bar width (pixels)")->capture_default_str();
  sim->add_option("--bar-speed", s.scene.bar_speed, "Bar speed (pixels/tick)")->capture_default_str();
  sim->add_option("--bar-intensity", s.scene.bar_intensity)->capture_default_str();
  sim->add_option("--background", s.scene.background, "Bar scene background")->capture_default_str();
  sim->add_option("--rpm", s.scene.rpm, "Disc revolutions per minute")->capture_default_str();
  sim->add_option("--pattern-intensity", s.scene.pattern_intensity)->capture_default_str();
  sim->add_option("--disc-intensity", s.scene.disc_intensity)->capture_default_str();
  sim->add_option("--outside-intensity", s.scene.outside_intensity)->capture_default_str();
  sim->add_option("--disc-radius", s.scene.disc_radius, "Disc radius (pixels, 0 = auto)")->capture_default_str();
  sim->add_option("--mask", s.scene.mask_path, "Square PGM pattern mask for the disc");
  sim->add_option("--images", s.scene.image_paths, "PGM frames (comma separated)")->delimiter(',');
  sim->add_option("--interp", s.scene.interpolation, "Image interpolation")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Interpolation>{{"hold", Interpolation::Hold}, {"linear", Interpolation::Linear}},
          CLI::ignore_case));
  sim->add_option("--ticks-per-frame", s.scene.ticks_per_frame)->capture_default_str();
  sim->add_option("--phi", s.sampler.phi, "Dispatch threshold")->capture_default_str();
  sim->add_option("--reset", s.sampler.reset_mode, "Reset mode")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ResetMode>{{"drain", ResetMode::Drain}, {"subtract", ResetMode::Subtract}},
          CLI::ignore_case));
  sim->add_option("--imax", s.sampler.i_max, "Maximum per-tick intensity")->capture_default_str();
  sim->add_option("-o,--output", s.output, "Output .spks file")->required();
  sim->add_option("--config", o.config, "key=value config file");

  auto* rec = app.add_subcommand("reconstruct", "Decode frames from a spike stream");
  auto& r = o.reconstruct;
  rec->add_option("input", r.input, "Input .spks file")->required();
  rec->add_option("--method", r.method)->required()->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case));
  rec->add_option("--at", r.at, "Ticks to reconstruct (comma separated)")->delimiter(',');
  rec->add_option("--every", r.every, "Emit a frame every N ticks");
  rec->add_option("--window", r.window, "TFP window (ticks)");
  rec->add_option("--gamma", r.gamma, "Gamma for display (0 disables; default 2.2 for tfi/tfp, off for tfa)");
  rec->add_option("-C,--range", r.range, "Maximum dynamic range")->capture_default_str();
  rec->add_option("--out-dir", r.out_dir, "Directory for PGM frames")->capture_default_str();
  add_tfa_flags(rec, r.tfa);
  rec->add_option("--config", o.config, "key=value config file");

  auto* ev = app.add_subcommand("events", "Convert a spike stream into DVS-style events");
  auto& e = o.events;
  ev->add_option("input", e.input, "Input .spks file")->required();
  ev->add_option("--theta", e.theta, "Log-ISI contrast threshold (nats)")->capture_default_str();
  ev->add_option("-o,--output", e.output, "CSV output ('-' for stdout)")->capture_default_str();
  ev->add_option("--frames-dir", e.frames_dir, "Also render event frames as PGM here");
  ev->add_option("--bin", e.bin, "Ticks per rendered event frame (0 = one frame)")->capture_default_str();
  ev->add_option("--config", o.config, "key=value config file");

  auto* st = app.add_subcommand("stats", "ISI histogram of a pixel or region");
  auto& t = o.stats;
  st->add_option("input", t.input, "Input .spks file")->required();
  auto* pixel = st->add_option("--pixel", t.pixel, "Pixel x,y")->expected(2)->delimiter(',');
  st->add_option("--region", t.region, "Region x,y,w,h (default: whole frame)")
      ->expected(4)
      ->delimiter(',')
      ->excludes(pixel);
  st->add_option("-o,--output", t.output, "CSV output ('-' for stdout)")->capture_default_str();
  st->add_flag("--split", t.split, "Report a two-cluster split at the histogram valley");
  st->add_option("--config", o.config, "key=value config file");

  auto* be = app.add_subcommand("bench", "Measure ingestion and decode throughput");
  auto& b = o.bench;
  be->add_option("input", b.input, "Input .spks file")->required();
  be->add_option("--method", b.method)->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case));
  be->add_option("--repeat", b.repeat, "Number of timed runs")->capture_default_str()->check(CLI::PositiveNumber);
  be->add_option("--window", b.window, "TFP window (ticks)")->capture_default_str();
  be->add_option("--every", b.every, "Decode a frame every N ingested ticks")->capture_default_str();
  add_tfa_flags(be, b.tfa);
  be->add_option("--config", o.config, "key=value config file");

  auto* in = app.add_subcommand("info", "Print a stream header summary");
  in->add_option("input", o.info.input, "Input .spks file")->required();
  in->add_option("--config", o.config, "key=value config file");
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return pairs;
}

struct ConfigTokens {
  std::vector<std::string> positional;
  std::vector<std::string> options;
};

// Turns config pairs into argument tokens for every option not given on the
// command line.
ConfigTokens config_tokens(const CLI::App& sub, const std::string& path) {
  ConfigTokens tokens;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config") throw UsageError(path + ": 'config' cannot be set from a config file");
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) opt = sub.get_option_no_throw(key);
    if (opt == nullptr) throw UsageError(path + ": unknown key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    if (opt->nonpositional()) {
      tokens.options.push_back("--" + key + "=" + value);
    } else {
      tokens.positional.push_back(value);
    }
  }
  return tokens;
}

// ---- shared helpers -------------------------------------------------------

std::string geometry(const StreamHeader& h) {
  std::ostringstream os;
  os << h.width << "×" << h.height << " @ " << h.tick_rate << " Hz, " << h.num_ticks << " ticks";
  return os.str();
}

void write_frame(const Frame& frame, const fs::path& path) {
  write_pgm(path, frame.width, frame.height, frame.range, frame.pixels);
}

class OutputStream {
 public:
  OutputStream(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
      out_ = file_.get();
    }
  }
  std::ostream& get() { return *out_; }
  bool is_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

// ---- simulate --------------------------------------------------------------

int cmd_simulate(SimulateOpts& o, std::ostream& out) {
  if (!o.step_region.empty()) {
    o.scene.step_region = Rect{o.step_region[0], o.step_region[1], o.step_region[2], o.step_region[3]};
  }
  o.scene.i_max = o.sampler.i_max;
  try {
    o.sampler.validate();
    o.scene.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SceneRenderer renderer(o.scene);

  StreamHeader header;
  header.width = renderer.width();
  header.height = renderer.height();
  header.tick_rate = o.scene.tick_rate;
  header.num_ticks = renderer.num_ticks();
  header.reset_mode = o.sampler.reset_mode;
  header.phi = o.sampler.phi;

  std::ofstream file(o.output, std::ios::binary);
  if (!file) throw StreamError(StreamError::Kind::Io, "cannot open " + o.output + " for writing");
  StreamWriter writer(file, header);
  Sampler sampler(header.width, header.height, o.sampler);
  std::vector<std::uint16_t> intensities(header.pixel_count());
  std::uint64_t spikes = 0;
  for (std::uint64_t t = 0; t < header.num_ticks; ++t) {
    renderer.render(t, intensities);
    const BitPlane plane = sampler.step(intensities);
    spikes += plane.count();
    writer.write_plane(plane);
  }
  writer.finish();

  out << "wrote " << o.output << "\n"
      << "geometry: " << geometry(header) << "\n"
      << "scene: " << to_string(o.scene.kind) << ", reset: " << to_string(header.reset_mode)
      << ", phi: " << header.phi << "\n"
      << "total spikes: " << spikes << "\n";
  return kExitOk;
}

// ---- reconstruct -----------------------------------------------------------

int cmd_reconstruct(ReconstructOpts& o, std::ostream& out) {
  if (o.method == Method::Tfp && o.window == 0) throw UsageError("--window is required for --method tfp");
  if (o.range == 0 || o.range > 65535) throw UsageError("-C must be in [1, 65535]");
  const double gamma = o.gamma.value_or(o.method == Method::Tfa ? 0.0 : kDefaultGamma);
  if (gamma < 0 || !std::isfinite(gamma)) throw UsageError("--gamma must be >= 0");
  if (o.method == Method::Tfa) {
    try {
      o.tfa.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  std::ifstream file(o.input, std::ios::binary);
  if (!file) throw StreamError(StreamError::Kind::Io, "cannot open " + o.input);
  StreamReader reader(file);
  const StreamHeader& h = reader.header();
  if (h.num_ticks == 0) throw UsageError("stream has no ticks to reconstruct");

  std::vector<std::uint64_t> ticks = o.at;
  if (o.every > 0) {
    for (std::uint64_t t = o.every - 1; t < h.num_ticks; t += o.every) ticks.push_back(t);
  }
  if (ticks.empty()) ticks.push_back(h.num_ticks - 1);
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  if (ticks.back() >= h.num_ticks) {
    throw UsageError("tick " + std::to_string(ticks.back()) + " out of range (stream has " +
                     std::to_string(h.num_ticks) + " ticks)");
  }
  fs::create_directories(o.out_dir);

  std::optional<TfiDecoder> tfi;
  std::optional<TfpDecoder> tfp;
  std::optional<TfaState> tfa;
  switch (o.method) {
    case Method::Tfi:
      tfi.emplace(h.width, h.height);
      break;
    case Method::Tfp:
      tfp.emplace(h.width, h.height, o.window);
      break;
    case Method::Tfa:
      tfa.emplace(h.width, h.height, o.tfa);
      break;
  }

  std::vector<std::uint8_t> plane(h.plane_bytes());
  std::size_t next = 0;
  for (std::uint64_t t = 0; next < ticks.size() && reader.next(plane); ++t) {
    if (tfi) tfi->ingest(plane);
    if (tfp) tfp->ingest(plane);
    if (tfa) tfa_step(*tfa, plane);
    if (t != ticks[next]) continue;
    ++next;
    Frame frame = tfi ? tfi->frame(o.range) : tfp ? tfp->frame(o.range) : tfa_texture(*tfa, o.range);
    gamma_correct(frame, gamma);
    const fs::path path = fs::path(o.out_dir) / frame_filename(t);
    write_frame(frame, path);
    out << path.string() << "\n";
  }
  return kExitOk;
}

// ---- events ----------------------------------------------------------------

int cmd_events(EventsOpts& o, std::ostream& out, std::ostream& err) {
  EventConfig config{o.theta};
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SpikeStream stream = load_stream(o.input);
  const auto events = spikes_to_events(SpikeIndex(stream), config);

  OutputStream csv(o.output, out);
  write_events_csv(csv.get(), events);

  if (!o.frames_dir.empty() && stream.num_ticks() > 0) {
    fs::create_directories(o.frames_dir);
    const std::uint64_t bin = o.bin == 0 ? stream.num_ticks() : o.bin;
    for (std::uint64_t first = 0; first < stream.num_ticks(); first += bin) {
      const std::uint64_t last = std::min(first + bin, stream.num_ticks()) - 1;
      const Frame frame = render_events(events, stream.width(), stream.height(), first, last);
      write_frame(frame, fs::path(o.frames_dir) / frame_filename(first, "events_"));
    }
  }

  const auto on = std::count_if(events.begin(), events.end(), [](const Event& e) { return e.polarity == Polarity::On; });
  std::ostream& report = csv.is_file() ? out : err;
  report << events.size() << " events (on: " << on << ", off: " << events.size() - on << ")\n";
  return kExitOk;
}

// ---- stats -----------------------------------------------------------------

int cmd_stats(StatsOpts& o, std::ostream& out) {
  const SpikeStream stream = load_stream(o.input);
  Rect region{0, 0, stream.width(), stream.height()};
  if (!o.pixel.empty()) region = Rect{o.pixel[0], o.pixel[1], 1, 1};
  if (!o.region.empty()) region = Rect{o.region[0], o.region[1], o.region[2], o.region[3]};
  if (region.width == 0 || region.height == 0 || std::uint64_t{region.x} + region.width > stream.width() ||
      std::uint64_t{region.y} + region.height > stream.height()) {
    throw UsageError("region is outside the " + std::to_string(stream.width()) + "x" +
                     std::to_string(stream.height()) + " stream");
  }
  const IsiHistogram hist = isi_histogram(SpikeIndex(stream), region);

  OutputStream csv(o.output, out);
  write_histogram_csv(csv.get(), hist);
  if (o.split) {
    std::ostream& report = csv.get();
    if (const auto s = split_isi_histogram(hist)) {
      report << "# split threshold=" << s->threshold << " short_peak=" << s->short_peak
             << " long_peak=" << s->long_peak << " valley_count=" << s->valley_count << "\n"
             << "# short_cluster count=" << s->short_count << " mean=" << s->short_mean << "\n"
             << "# long_cluster count=" << s->long_count << " mean=" << s->long_mean << "\n"
             << "# bimodal=" << (s->bimodal ? "yes" : "no") << "\n";
    } else {
      report << "# split none (fewer than two peaks)\n";
    }
  }
  return kExitOk;
}

// ---- bench -----------------------------------------------------------------

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(BenchOpts& o, std::ostream& out) {
  using clock = std::chrono::steady_clock;
  if (o.method == Method::Tfp && o.window == 0) throw UsageError("--window must be at least 1");
  if (o.every == 0) throw UsageError("--every must be at least 1");
  const SpikeStream stream = load_stream(o.input);
  const StreamHeader& h = stream.header();
  if (h.num_ticks == 0) throw UsageError("stream has no ticks to benchmark");

  std::vector<double> ingest_rates;
  std::vector<double> decode_rates;
  volatile std::uint64_t sink = 0;
  for (unsigned r = 0; r < o.repeat; ++r) {
    std::optional<TfiDecoder> tfi;
    std::optional<TfpDecoder> tfp;
    std::optional<TfaState> tfa;
    if (o.method == Method::Tfi) tfi.emplace(h.width, h.height);
    if (o.method == Method::Tfp) tfp.emplace(h.width, h.height, o.window);
    if (o.method == Method::Tfa) tfa.emplace(h.width, h.height, o.tfa);
    auto decode = [&]() {
      return tfi ? tfi->frame() : tfp ? tfp->frame() : tfa_texture(*tfa);
    };

    const auto start = clock::now();
    for (std::uint64_t t = 0; t < h.num_ticks; ++t) {
      const auto plane = stream.plane(t);
      if (tfi) tfi->ingest(plane);
      if (tfp) tfp->ingest(plane);
      if (tfa) tfa_step(*tfa, plane);
      if ((t + 1) % o.every == 0) sink = sink + decode().pixels[0];
    }
    const double ingest_s = std::chrono::duration<double>(clock::now() - start).count();
    ingest_rates.push_back(static_cast<double>(h.num_ticks) / std::max(ingest_s, 1e-9));

    constexpr int kFrames = 20;
    const auto dstart = clock::now();
    for (int k = 0; k < kFrames; ++k) sink = sink + decode().pixels[0];
    const double decode_s = std::chrono::duration<double>(clock::now() - dstart).count();
    decode_rates.push_back(kFrames / std::max(decode_s, 1e-9));
  }

  const double ticks_per_s = median(ingest_rates);
  const double frames_per_s = median(decode_rates);
  out << std::fixed << std::setprecision(1);
  out << "geometry: " << geometry(h) << "\n"
      << "method: " << to_string(o.method) << "\n"
      << "repeats: " << o.repeat << "\n"
      << "ticks/s: " << ticks_per_s << " (median, ingestion + a frame every " << o.every << " ticks)\n"
      << "frames/s: " << frames_per_s << " (median, decode only)\n"
      << "status: " << (ticks_per_s >= h.tick_rate ? "REALTIME" : "BELOW_REALTIME") << "\n";
  return kExitOk;
}

// ---- info ------------------------------------------------------------------

int cmd_info(InfoOpts& o, std::ostream& out) {
  const StreamHeader h = inspect_stream(o.input);
  out << "file: " << o.input << "\n"
      << "format: SPKS v" << kStreamVersion << "\n"
      << "geometry: " << geometry(h) << "\n"
      << "reset: " << to_string(h.reset_mode) << "\n"
      << "phi: " << h.phi << "\n"
      << h.plane_bytes() << " bytes/tick\n"
      << "body: " << h.plane_bytes() * h.num_ticks << " bytes\n";
  return kExitOk;
}

int dispatch(CLI::App& app, Options& o, std::ostream& out, std::ostream& err) {
  if (app.got_subcommand("simulate")) return cmd_simulate(o.simulate, out);
  if (app.got_subcommand("reconstruct")) return cmd_reconstruct(o.reconstruct, out);
  if (app.got_subcommand("events")) return cmd_events(o.events, out, err);
  if (app.got_subcommand("stats")) return cmd_stats(o.stats, out);
  if (app.got_subcommand("bench")) return cmd_bench(o.bench, out);
  if (app.got_subcommand("info")) return cmd_info(o.info, out);
  return kExitUsage;
}

}  // namespace

void gamma_correct(Frame& frame, double gamma) {
  if (gamma == 0.0) return;
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive (or 0 to disable)");
  const double c = frame.range;
  for (auto& p : frame.pixels) p = quantize(c * std::pow(p / c, 1.0 / gamma), frame.range);
}

std::string frame_filename(std::uint64_t tick, const std::string& prefix) {
  std::ostringstream os;
  os << prefix << std::setw(7) << std::setfill('0') << tick << ".pgm";
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // CLI11 wants argv in reverse order when given a vector.
  auto reversed = [](std::vector<std::string> v) {
    std::reverse(v.begin(), v.end());
    return v;
  };

  auto parse = [&](CLI::App& app, const std::vector<std::string>& argv) -> std::optional<int> {
    try {
      app.parse(reversed(argv));
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    return std::nullopt;
  };

  try {
    std::vector<std::string> effective = args;

    // Probe pass with nothing required: learn the subcommand, the config path
    // and which options were given explicitly.
    {
      Options probe_opts;
      CLI::App probe("spikectl", "spikectl");
      build_app(probe, probe_opts);
      for (const auto* sub : probe.get_subcommands({})) {
        for (auto* opt : sub->get_options()) const_cast<CLI::Option*>(opt)->required(false);
      }
      bool parsed = true;
      try {
        probe.parse(reversed(args));
      } catch (const CLI::ParseError&) {
        // The strict pass below reports it (or prints help).
        parsed = false;
      }
      if (parsed && !probe_opts.config.empty()) {
        const CLI::App* sub = probe.get_subcommands().front();
        const auto extra = config_tokens(*sub, probe_opts.config);
        // Positionals go right after the subcommand and options after
        // everything else, so neither lands inside a multi-value option.
        effective.clear();
        bool inserted = false;
        for (const auto& a : args) {
          effective.push_back(a);
          if (!inserted && a == sub->get_name()) {
            effective.insert(effective.end(), extra.positional.begin(), extra.positional.end());
            inserted = true;
          }
        }
        effective.insert(effective.end(), extra.options.begin(), extra.options.end());
      }
    }

    Options opts;
    CLI::App app("Spike camera simulator and texture reconstruction toolkit", "spikectl");
    build_app(app, opts);
    if (auto code = parse(app, effective)) return *code;
    return dispatch(app, opts, out, err);
  } catch (const UsageError& e) {
    err << "spikectl: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "spikectl: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace spikectl
