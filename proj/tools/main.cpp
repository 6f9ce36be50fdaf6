#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

#include "powersense/csi_file.hpp"
#include "powersense/error.hpp"
#include "powersense/pipeline.hpp"
#include "powersense/runners.hpp"
#include "powersense/udp.hpp"

using namespace powersense;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  bool debug_tensors = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "System configuration file (key = value)");
  app->add_option("--seed", c.seed, "Random seed for synthetic data");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_flag("--debug-tensors", c.debug_tensors, "Dump per-CPI feature tensors");
}

SystemConfig load(const Common& c) { return c.config.empty() ? SystemConfig::defaults() : load_config(c.config); }

void print_histogram(const std::vector<double>& v) {
  const double edges[] = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0};
  std::size_t counts[std::size(edges) + 1] = {};
  for (double x : v) {
    std::size_t b = 0;
    while (b < std::size(edges) && x > edges[b]) ++b;
    ++counts[b];
  }
  double lo = 0.0;
  for (std::size_t b = 0; b <= std::size(edges); ++b) {
    if (b < std::size(edges)) {
      std::printf("  %5.2f - %5.2f ms : %zu\n", lo, edges[b], counts[b]);
      lo = edges[b];
    } else {
      std::printf("  > %5.2f ms       : %zu\n", lo, counts[b]);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration-free bistatic CSI tracker"};
  app.require_subcommand(1);

  Common sim_c, track_c, md_c, bench_c;

  auto* sim = app.add_subcommand("simulate", "Synthesize a CSI file from a scene");
  add_common(sim, sim_c);
  std::string scene_path, send_to;
  double duration = 0.0, rate = 0.0;
  sim->add_option("--scene", scene_path, "Scene file; a built-in walk is used when absent");
  sim->add_option("--duration", duration, "Override the scene duration (s)");
  sim->add_option("--send-udp", send_to, "Also stream the samples to host:port");
  sim->add_option("--rate", rate, "Datagram rate when streaming (Hz, 0 = as fast as possible)");

  auto* trk = app.add_subcommand("track", "Detect and track from a CSI file or UDP stream");
  add_common(trk, track_c);
  TrackOptions topt;
  trk->add_option("--input", topt.input, "CSI file");
  trk->add_option("--udp", topt.udp_bind, "Listen address host:port");
  trk->add_option("--udp-wait", topt.udp_first_timeout, "Seconds to wait for the first datagram");
  trk->add_option("--udp-idle", topt.udp_idle_timeout, "Seconds of silence that end the stream");

  auto* md = app.add_subcommand("microdoppler", "Build a micro-Doppler spectrogram from a CSI file");
  add_common(md, md_c);
  std::string md_input, md_format = "both";
  md->add_option("--input", md_input, "CSI file")->required();
  md->add_option("--format", md_format, "bin, pgm or both")->check(CLI::IsMember({"bin", "pgm", "both"}));

  auto* bench = app.add_subcommand("bench", "Per-CPI latency on synthetic data");
  add_common(bench, bench_c);
  std::size_t cpis = 10000;
  bench->add_option("--cpis", cpis, "Number of CPIs")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const SystemConfig cfg = load(sim_c);
      Scene scene = scene_path.empty() ? parse_scene(default_scene_text(), cfg) : load_scene(scene_path, cfg);
      if (sim->count("--seed") > 0) scene.impairments.seed = sim_c.seed;
      if (duration > 0.0) scene.duration = duration;
      const auto s = run_simulate(scene, cfg, sim_c.out);
      std::printf("wrote %zu records to %s\n", s.records, s.csi_path.c_str());
      if (!send_to.empty()) {
        CsiReader reader(s.csi_path);
        UdpSender tx(send_to);
        std::uint32_t seq = 0;
        const auto start = std::chrono::steady_clock::now();
        while (auto rec = reader.next()) {
          if (rate > 0.0) std::this_thread::sleep_until(start + std::chrono::duration<double>(seq / rate));
          tx.send(encode_datagram(seq++, *rec));
        }
        std::printf("sent %u datagrams to %s\n", seq, send_to.c_str());
      }
    } else if (trk->parsed()) {
      topt.debug_tensors = track_c.debug_tensors;
      const auto s = run_track(load(track_c), topt, track_c.out);
      std::printf("records %zu, CPIs %zu (skipped %zu), detections %zu, fused %zu, confirmed tracks %zu, deletions %zu\n",
                  s.records, s.cpis, s.skipped_cpis, s.detections, s.fused, s.confirmed_tracks, s.deletions);
    } else if (md->parsed()) {
      const auto fmt = md_format == "bin"   ? SpectrogramFormat::Binary
                       : md_format == "pgm" ? SpectrogramFormat::Graymap
                                            : SpectrogramFormat::Both;
      const auto s = run_microdoppler(load(md_c), md_input, md_c.out, fmt);
      std::printf("CPIs %zu, valid coefficients %zu, windows %zu\n", s.cpis, s.valid, s.windows);
    } else if (bench->parsed()) {
      const auto r = run_bench(load(bench_c), cpis, bench_c.seed);
      std::printf("CPIs %zu\n", r.latency_ms.size());
      std::printf("p50 %.3f ms\np98 %.3f ms\nmean %.3f ms\nmax %.3f ms\n", r.p50, r.p98, r.mean, r.max);
      print_histogram(r.latency_ms);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
