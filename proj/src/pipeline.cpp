#include "nucsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "nucsynth/image_io.hpp"
#include "nucsynth/postproc.hpp"

namespace nucsynth {

namespace {

std::string fstr(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not a number");
  }
  if (used != value.size())
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not a number");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v))
    throw std::invalid_argument("config key '" + key + "' expects an integer, got '" + value + "'");
  return static_cast<std::int64_t>(v);
}

void require(bool ok, const std::string& key, const std::string& accepted) {
  if (!ok) throw std::invalid_argument("config key '" + key + "' out of range (accepted: " +
                                       accepted + ")");
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "preset") {
    cfg.preset = value;
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "count") {
    const auto v = parse_int(key, value);
    require(v >= 1 && v <= 1000000, key, "1..1000000");
    cfg.count = static_cast<int>(v);
  } else if (key == "size") {
    const auto v = parse_int(key, value);
    require(v >= 8 && v <= 65536, key, "8..65536");
    cfg.size = static_cast<Index>(v);
  } else if (key == "keep_fraction") {
    const double v = parse_double(key, value);
    require(v >= 0.0 && v <= 1.0, key, "0..1");
    cfg.keep_fraction = v;
  } else if (key == "ordering") {
    cfg.ordering = parse_ordering(value);
  } else if (key == "epsilon") {
    const double v = parse_double(key, value);
    require(v > 0.0, key, "> 0");
    cfg.epsilon = v;
  } else if (key == "payload_side") {
    const auto v = parse_int(key, value);
    require(v >= 1 && v <= 4096, key, "1..4096");
    cfg.payload_side = static_cast<int>(v);
  } else if (key == "band_fraction") {
    const double v = parse_double(key, value);
    require(v > 0.0 && v <= 0.5, key, "(0, 0.5]");
    cfg.band_fraction = v;
  } else if (key == "threshold") {
    cfg.threshold = parse_double(key, value);
  } else if (key == "max_hole_area") {
    const auto v = parse_int(key, value);
    require(v >= 0, key, ">= 0");
    cfg.max_hole_area = v;
  } else if (key == "min_marker_distance") {
    const double v = parse_double(key, value);
    require(v >= 0.0, key, ">= 0");
    cfg.min_marker_distance = v;
  } else if (key == "min_marker_height") {
    const double v = parse_double(key, value);
    require(v >= 0.0, key, ">= 0");
    cfg.min_marker_height = v;
  } else if (key == "tau") {
    std::vector<double> taus;
    std::stringstream parts(value);
    std::string part;
    while (std::getline(parts, part, ',')) {
      const double t = parse_double(key, part);
      require(t >= 0.5 && t <= 1.0, key, "0.5..1, comma separated");
      taus.push_back(t);
    }
    require(!taus.empty(), key, "at least one threshold");
    cfg.taus = std::move(taus);
  } else if (key == "seed") {
    try {
      cfg.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("config key 'seed': '" + value + "' is not an integer");
    }
  } else if (key == "jobs") {
    const auto v = parse_int(key, value);
    require(v >= 1 && v <= 256, key, "1..256");
    cfg.jobs = static_cast<int>(v);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

std::vector<std::string> config_lines(const PipelineConfig& cfg) {
  // out_dir is deliberately not echoed: the manifest lives inside it, and
  // leaving it out keeps manifests from runs into different directories
  // byte-comparable
  std::vector<std::string> lines;
  lines.push_back("preset=" + cfg.preset);
  lines.push_back("count=" + std::to_string(cfg.count));
  lines.push_back("size=" + std::to_string(cfg.size));
  lines.push_back("keep_fraction=" + fstr(cfg.keep_fraction));
  lines.push_back("ordering=" + ordering_name(cfg.ordering));
  lines.push_back("epsilon=" + fstr(cfg.epsilon));
  lines.push_back("payload_side=" + std::to_string(cfg.payload_side));
  lines.push_back("band_fraction=" + fstr(cfg.band_fraction));
  lines.push_back("threshold=" + fstr(cfg.threshold));
  lines.push_back("max_hole_area=" + std::to_string(cfg.max_hole_area));
  lines.push_back("min_marker_distance=" + fstr(cfg.min_marker_distance));
  lines.push_back("min_marker_height=" + fstr(cfg.min_marker_height));
  std::string taus;
  for (std::size_t i = 0; i < cfg.taus.size(); ++i)
    taus += (i ? "," : "") + fstr(cfg.taus[i]);
  lines.push_back("tau=" + taus);
  lines.push_back("seed=" + std::to_string(cfg.seed));
  lines.push_back("jobs=" + std::to_string(cfg.jobs));
  return lines;
}

Image render_carrier(const InstanceMask& gt, Rng& rng) {
  constexpr double background = -0.55;
  constexpr double foreground = 0.45;
  constexpr double noise_sigma = 0.08;
  Grid<double> values(gt.rows(), gt.cols());
  const std::int32_t* labels = gt.labels().data();
  double* out = values.data();
  for (Index i = 0; i < values.size(); ++i) {
    const double base = labels[i] > 0 ? foreground : background;
    out[i] = std::clamp(base + rng.gaussian(0.0, noise_sigma), -1.0, 1.0);
  }
  return Image(std::move(values), ValueRange{-1.0, 1.0});
}

namespace {

struct StageClock {
  std::atomic<std::int64_t> synth_ns{0}, carrier_ns{0}, stego_ns{0}, filter_ns{0},
      postproc_ns{0}, eval_ns{0}, io_ns{0};
};

class Stopwatch {
 public:
  explicit Stopwatch(std::atomic<std::int64_t>& sink)
      : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    sink_ += ns;
  }

 private:
  std::atomic<std::int64_t>& sink_;
  std::chrono::steady_clock::time_point start_;
};

std::string image_tag(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

InstanceMask instances_from_image(const Image& img, const PipelineConfig& cfg) {
  BinaryMask fg = binarize(img, cfg.threshold);
  fg = fill_holes(fg, cfg.max_hole_area);
  const DistanceMap dist = distance_transform(fg);
  return watershed_instances(dist, fg, cfg.min_marker_distance, cfg.min_marker_height);
}

TauEval evaluate_at(const InstanceMask& pred, const InstanceMask& gt, double tau) {
  const MatchResult m = match_instances(pred, gt, tau);
  TauEval e;
  e.tau = tau;
  e.tp = m.tp;
  e.fp = m.fp;
  e.fn = m.fn;
  e.scores = prf_scores(m);
  return e;
}

Scores scores_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  MatchResult m;
  m.tp = static_cast<int>(tp);
  m.fp = static_cast<int>(fp);
  m.fn = static_cast<int>(fn);
  return prf_scores(m);
}

void process_image(ImageRecord& rec, const PipelineConfig& cfg, const SynthesisPreset& preset,
                   const FrequencyMask& filter_mask, const StegoConfig& stego_cfg,
                   StageClock& clock) {
  Rng rng(rec.seed);
  std::string stage = "synth";
  try {
    InstanceMask gt;
    {
      Stopwatch watch(clock.synth_ns);
      SynthesisResult synth = synthesize_mask(preset, rng);
      rec.requested = synth.requested;
      rec.placed = synth.placed;
      rec.warnings = std::move(synth.warnings);
      gt = std::move(synth.mask);
    }

    stage = "carrier";
    Image carrier;
    {
      Stopwatch watch(clock.carrier_ns);
      carrier = render_carrier(gt, rng);
    }

    stage = "stego";
    Image stego;
    BinaryMask pooled;
    {
      Stopwatch watch(clock.stego_ns);
      const BinaryMask payload = gt.foreground();
      pooled = downsample_majority(payload, stego_cfg.payload_side);
      stego = embed(carrier, payload, stego_cfg);
      rec.psnr_db = psnr(carrier, stego);
      rec.ber_prefilter = bit_error_ratio(extract(stego, stego_cfg), pooled);
    }

    stage = "filter";
    Image filtered_stego, filtered_carrier;
    {
      Stopwatch watch(clock.filter_ns);
      filtered_stego = lowpass_filter(stego, filter_mask);
      filtered_carrier = lowpass_filter(carrier, filter_mask);
      rec.ber_postfilter = bit_error_ratio(extract(filtered_stego, stego_cfg), pooled);
    }

    stage = "postproc";
    InstanceMask pred_clean, pred_stego;
    {
      Stopwatch watch(clock.postproc_ns);
      pred_clean = instances_from_image(filtered_carrier, cfg);
      pred_stego = instances_from_image(filtered_stego, cfg);
    }

    stage = "eval";
    {
      Stopwatch watch(clock.eval_ns);
      for (const double tau : cfg.taus) {
        rec.content_eval.push_back(evaluate_at(pred_clean, gt, tau));
        rec.stego_eval.push_back(evaluate_at(pred_stego, gt, tau));
      }
    }

    stage = "io";
    {
      Stopwatch watch(clock.io_ns);
      const std::string tag = image_tag(rec.index);
      auto emit = [&](const std::string& name, auto&& writer) {
        const std::filesystem::path path = cfg.out_dir / name;
        writer(path);
        rec.files.emplace_back(name, file_digest(path));
      };
      emit("gt_" + tag + ".png", [&](const auto& p) { save_instance_mask(gt, p); });
      emit("carrier_" + tag + ".png", [&](const auto& p) { save_image(carrier, p, 16); });
      emit("stego_" + tag + ".png", [&](const auto& p) { save_image(stego, p, 16); });
      emit("filtered_" + tag + ".png", [&](const auto& p) { save_image(filtered_stego, p, 16); });
      emit("pred_clean_" + tag + ".png", [&](const auto& p) { save_instance_mask(pred_clean, p); });
      emit("pred_stego_" + tag + ".png", [&](const auto& p) { save_instance_mask(pred_stego, p); });
    }
  } catch (const std::exception& err) {
    rec.error_stage = stage;
    rec.error_message = err.what();
  }
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  SynthesisPreset preset = load_preset(cfg.preset);
  preset.canvas_rows = cfg.size;
  preset.canvas_cols = cfg.size;
  const FrequencyMask filter_mask =
      build_frequency_mask(cfg.size, cfg.size, cfg.keep_fraction, cfg.ordering);
  StegoConfig stego_cfg;
  stego_cfg.payload_side = cfg.payload_side;
  stego_cfg.epsilon = cfg.epsilon;
  stego_cfg.band_fraction = cfg.band_fraction;
  // fail on an undersized band before any work happens
  embedding_band(cfg.size, cfg.size, stego_cfg);

  std::filesystem::create_directories(cfg.out_dir);

  PipelineSummary summary;
  summary.images.resize(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    summary.images[static_cast<std::size_t>(i)].index = i;
    summary.images[static_cast<std::size_t>(i)].seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(i));
  }

  StageClock clock;
  std::atomic<int> next{0};
  std::atomic<bool> abort{false};
  const int workers = std::max(1, std::min(cfg.jobs, cfg.count));
  auto worker = [&] {
    while (!abort.load()) {
      const int i = next.fetch_add(1);
      if (i >= cfg.count) return;
      ImageRecord& rec = summary.images[static_cast<std::size_t>(i)];
      process_image(rec, cfg, preset, filter_mask, stego_cfg, clock);
      if (!rec.error_stage.empty()) abort.store(true);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // untouched slots were never scheduled (an earlier image failed)
  for (ImageRecord& rec : summary.images)
    if (rec.error_stage.empty() && rec.files.empty() && rec.content_eval.empty() &&
        abort.load())
      rec.error_stage = "skipped";

  const ImageRecord* failed = nullptr;
  for (const ImageRecord& rec : summary.images)
    if (!rec.error_stage.empty() && rec.error_stage != "skipped" && !failed) failed = &rec;

  // aggregates over completed images
  int completed = 0;
  for (const double tau : cfg.taus) {
    TauEval content_pool, stego_pool;
    content_pool.tau = stego_pool.tau = tau;
    Scores content_sum;
    int n = 0;
    for (const ImageRecord& rec : summary.images) {
      if (!rec.error_stage.empty()) continue;
      for (const TauEval& e : rec.content_eval)
        if (e.tau == tau) {
          content_pool.tp += e.tp;
          content_pool.fp += e.fp;
          content_pool.fn += e.fn;
          content_sum.precision += e.scores.precision;
          content_sum.recall += e.scores.recall;
          content_sum.f1 += e.scores.f1;
          ++n;
        }
      for (const TauEval& e : rec.stego_eval)
        if (e.tau == tau) {
          stego_pool.tp += e.tp;
          stego_pool.fp += e.fp;
          stego_pool.fn += e.fn;
        }
    }
    content_pool.scores = scores_from_counts(content_pool.tp, content_pool.fp, content_pool.fn);
    stego_pool.scores = scores_from_counts(stego_pool.tp, stego_pool.fp, stego_pool.fn);
    TauEval content_mean = content_pool;
    if (n > 0) {
      content_mean.scores.precision = content_sum.precision / n;
      content_mean.scores.recall = content_sum.recall / n;
      content_mean.scores.f1 = content_sum.f1 / n;
    }
    summary.content_pooled.push_back(content_pool);
    summary.content_mean.push_back(content_mean);
    summary.stego_pooled.push_back(stego_pool);
    completed = n;
  }
  double psnr_sum = 0.0, pre_sum = 0.0, post_sum = 0.0;
  for (const ImageRecord& rec : summary.images) {
    if (!rec.error_stage.empty()) continue;
    psnr_sum += rec.psnr_db;
    pre_sum += rec.ber_prefilter;
    post_sum += rec.ber_postfilter;
  }
  if (completed > 0) {
    summary.mean_psnr_db = psnr_sum / completed;
    summary.mean_ber_prefilter = pre_sum / completed;
    summary.mean_ber_postfilter = post_sum / completed;
  }
  summary.ok = failed == nullptr;

  // manifest: '#' lines are volatile (timestamp, timings), the rest is
  // reproducible for a fixed config + seed
  summary.manifest_path = cfg.out_dir / "manifest.txt";
  std::ofstream out(summary.manifest_path);
  if (!out) throw std::runtime_error("cannot write manifest at " + summary.manifest_path.string());
  out << "nucsynth-manifest v1\n";
  {
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated_at " << stamp << "\n";
  }
  for (const std::string& line : config_lines(cfg)) out << "config " << line << "\n";
  for (const ImageRecord& rec : summary.images) {
    if (rec.error_stage == "skipped") {
      out << "image " << rec.index << " skipped\n";
      continue;
    }
    if (!rec.error_stage.empty()) {
      out << "image " << rec.index << " FAILED stage=" << rec.error_stage << " error="
          << rec.error_message << "\n";
      continue;
    }
    out << "image " << rec.index << " seed=" << rec.seed << " requested=" << rec.requested
        << " placed=" << rec.placed << " warnings=" << rec.warnings.size()
        << " psnr_db=" << fstr(rec.psnr_db) << " ber_pre=" << fstr(rec.ber_prefilter)
        << " ber_post=" << fstr(rec.ber_postfilter) << "\n";
    for (const std::string& w : rec.warnings)
      out << "image " << rec.index << " warning " << w << "\n";
    auto eval_line = [&](const char* path_name, const TauEval& e) {
      out << "image " << rec.index << " eval " << path_name << " tau=" << fstr(e.tau)
          << " tp=" << e.tp << " fp=" << e.fp << " fn=" << e.fn
          << " precision=" << fstr(e.scores.precision) << " recall=" << fstr(e.scores.recall)
          << " f1=" << fstr(e.scores.f1) << "\n";
    };
    for (const TauEval& e : rec.content_eval) eval_line("content", e);
    for (const TauEval& e : rec.stego_eval) eval_line("stego", e);
    for (const auto& [name, digest] : rec.files)
      out << "image " << rec.index << " file " << name << " fnv1a=" << digest << "\n";
  }
  auto aggregate_line = [&](const char* path_name, const char* kind, const TauEval& e,
                            bool with_counts) {
    out << "aggregate " << path_name << " " << kind << " tau=" << fstr(e.tau);
    if (with_counts) out << " tp=" << e.tp << " fp=" << e.fp << " fn=" << e.fn;
    out << " precision=" << fstr(e.scores.precision) << " recall=" << fstr(e.scores.recall)
        << " f1=" << fstr(e.scores.f1) << "\n";
  };
  for (const TauEval& e : summary.content_pooled) aggregate_line("content", "pooled", e, true);
  for (const TauEval& e : summary.content_mean) aggregate_line("content", "mean", e, false);
  for (const TauEval& e : summary.stego_pooled) aggregate_line("stego", "pooled", e, true);
  out << "aggregate psnr_db mean=" << fstr(summary.mean_psnr_db) << "\n";
  out << "aggregate ber mean_pre=" << fstr(summary.mean_ber_prefilter)
      << " mean_post=" << fstr(summary.mean_ber_postfilter) << "\n";
  auto stage_line = [&](const char* name, const std::atomic<std::int64_t>& ns) {
    out << "# stage " << name << " total_ms=" << ns.load() / 1000000 << "\n";
  };
  stage_line("synth", clock.synth_ns);
  stage_line("carrier", clock.carrier_ns);
  stage_line("stego", clock.stego_ns);
  stage_line("filter", clock.filter_ns);
  stage_line("postproc", clock.postproc_ns);
  stage_line("eval", clock.eval_ns);
  stage_line("io", clock.io_ns);
  if (failed)
    out << "result FAILED stage=" << failed->error_stage << " image=" << failed->index << "\n";
  else
    out << "result OK\n";
  out.close();
  return summary;
}

}  // namespace nucsynth
