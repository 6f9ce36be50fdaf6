#include "powersense/runners.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "powersense/assembler.hpp"
#include "powersense/csi_file.hpp"
#include "powersense/error.hpp"
#include "powersense/outputs.hpp"
#include "powersense/pipeline.hpp"
#include "powersense/udp.hpp"

namespace powersense {

namespace {

std::string in_dir(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// Feeds every CPI of a CSI file to `fn`; returns (records, skipped windows).
std::pair<std::size_t, std::size_t> for_each_cpi(const SystemConfig& cfg, CsiReader& reader,
                                                 const std::function<void(const CpiCube&)>& fn) {
  CpiAssembler assembler(cfg);
  std::size_t records = 0;
  while (auto rec = reader.next()) {
    ++records;
    for (const auto& cube : assembler.push(*rec)) fn(cube);
  }
  return {records, assembler.skipped()};
}

}  // namespace

std::string default_scene_text() {
  return R"(# direct path and one wall reflection
direct_path_amplitude = 1.0
static_path = 0.4 4.0e-8 35
# torso walking back and forth at 1 m/s
scatterer = 0.3
waypoint = 0 1.0 3.0
waypoint = 10 3.588 12.659
waypoint = 20 1.0 3.0
waypoint = 30 3.588 12.659
# limbs swinging along the walking direction
limb = 0.08 0.25 1.0 0
limb = 0.08 0.25 1.0 180
noise_std = 0.05
to_jitter_s = 5e-8
cfo_hz = 150
seed = 1
)";
}

SimulateSummary run_simulate(const Scene& scene, const SystemConfig& cfg, const std::string& out_dir) {
  SimulateSummary s;
  s.csi_path = in_dir(out_dir, "csi.bin");
  s.truth_path = in_dir(out_dir, "truth.csv");
  if (!(scene.duration > 0.0)) throw Error(Errc::InvalidConfig, "scene duration must be positive");
  const auto count = static_cast<std::uint64_t>(std::llround(scene.duration / cfg.sample_interval));

  CsiWriter writer(s.csi_path, CsiFileHeader::from_config(cfg));
  std::ofstream truth(s.truth_path);
  if (!truth) throw Error(Errc::Io, "cannot create " + s.truth_path);
  truth << "time,x,y,vx,vy,delay_s,aoa_deg,doppler_hz\n";
  for (std::uint64_t n = 0; n < count; ++n) {
    const CsiRecord rec = synth_sample(scene, cfg, n);
    writer.write(rec);
    if (!scene.scatterers.empty() && n % cfg.cpi_stride == 0) {
      const auto& tr = scene.scatterers.front().trajectory;
      const Vec2 p = tr.position(rec.timestamp);
      const Vec2 v = tr.velocity(rec.timestamp);
      const auto b = bistatic_truth(p, v, cfg);
      truth << format_number(rec.timestamp) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
            << format_number(v.x) << ',' << format_number(v.y) << ',' << format_number(b.delay) << ','
            << format_number(rad_to_deg(b.aoa)) << ',' << format_number(b.doppler) << '\n';
    }
  }
  writer.close();
  truth.close();
  s.records = count;
  return s;
}

TrackSummary run_track(const SystemConfig& base, const TrackOptions& opt, const std::string& out_dir) {
  TrackSummary sum;
  std::optional<CsiReader> reader;
  SystemConfig cfg = base;
  if (!opt.input.empty()) {
    reader.emplace(opt.input);
    cfg = apply_header(base, reader->header());
  } else if (opt.udp_bind.empty()) {
    throw Error(Errc::InvalidConfig, "track needs an input file or a UDP address");
  }

  Pipeline pipe(cfg);
  TrackCsvWriter tracks(in_dir(out_dir, "tracks.csv"));
  FusedCsvWriter fused(in_dir(out_dir, "fused.csv"));
  std::optional<TensorDumper> dumper;
  if (opt.debug_tensors) dumper.emplace(in_dir(out_dir, "tensors.bin"));
  std::set<int> confirmed;

  auto on_cube = [&](const CpiCube& cube) {
    const FrameResult r = pipe.process(cube);
    ++sum.cpis;
    if (r.detection) ++sum.detections;
    if (r.fused) {
      ++sum.fused;
      fused.write(*r.fused, r.fused_position);
    }
    tracks.write(r.time, pipe.tracker().tracks());
    for (const auto& t : pipe.tracker().tracks()) {
      if (t.confirmed) confirmed.insert(t.id);
    }
    if (dumper) dumper->write(pipe.last_tensor());
  };

  if (reader) {
    const auto [records, skipped] = for_each_cpi(cfg, *reader, on_cube);
    sum.records = records;
    sum.skipped_cpis = skipped;
  } else {
    UdpReceiver rx(opt.udp_bind, cfg.num_subcarriers() * cfg.num_antennas);
    ReorderBuffer reorder(cfg.reorder_window);
    CpiAssembler assembler(cfg);
    auto feed = [&](std::vector<StreamEvent> events) {
      for (auto& e : events) {
        std::vector<CpiCube> cubes = e.is_gap() ? assembler.push_gap(e.missing) : assembler.push(*e.record);
        if (!e.is_gap()) ++sum.records;
        for (const auto& c : cubes) on_cube(c);
      }
    };
    bool started = false;
    while (true) {
      auto d = rx.pop(started ? opt.udp_idle_timeout : opt.udp_first_timeout);
      if (!d) break;
      started = true;
      feed(reorder.push(d->seq, std::move(d->record)));
    }
    feed(reorder.flush());
    rx.stop();
    sum.gaps = reorder.gaps();
    sum.skipped_cpis = assembler.skipped();
  }

  tracks.close();
  fused.close();
  if (dumper) dumper->close();
  sum.confirmed_tracks = confirmed.size();
  sum.deletions = pipe.tracker().deletions().size();
  return sum;
}

MicroDopplerSummary run_microdoppler(const SystemConfig& base, const std::string& input, const std::string& out_dir,
                                     SpectrogramFormat format) {
  CsiReader reader(input);
  const SystemConfig cfg = apply_header(base, reader.header());
  Pipeline pipe(cfg);
  MicroDopplerSummary sum;
  for_each_cpi(cfg, reader, [&](const CpiCube& cube) {
    const FrameResult r = pipe.process(cube);
    ++sum.cpis;
    if (r.coefficient_valid) ++sum.valid;
  });
  const Spectrogram s = build_spectrogram(pipe.series(), cfg);
  sum.windows = s.windows;
  if (format != SpectrogramFormat::Graymap) write_spectrogram_bin(in_dir(out_dir, "spectrogram.f32"), s);
  if (format != SpectrogramFormat::Binary) write_spectrogram_pgm(in_dir(out_dir, "spectrogram.pgm"), s);
  return sum;
}

}  // namespace powersense
