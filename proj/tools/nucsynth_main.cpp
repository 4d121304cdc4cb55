#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "nucsynth/image_io.hpp"
#include "nucsynth/pipeline.hpp"
#include "nucsynth/postproc.hpp"

namespace fs = std::filesystem;
using namespace nucsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitStageFailure = 2;

int guess_bit_depth(const Image& img) {
  return img.range.hi > 255.0 ? 16 : 8;
}

struct SynthArgs {
  std::string preset = "dsb";
  int count = 10;
  Index size = 256;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int max_attempts = 100;
};

int run_synth(const SynthArgs& args) {
  const SynthesisPreset base = load_preset(args.preset);
  SynthesisPreset preset = base;
  preset.canvas_rows = args.size;
  preset.canvas_cols = args.size;

  fs::create_directories(args.out_dir);
  std::ofstream manifest(fs::path(args.out_dir) / "manifest.txt");
  if (!manifest) {
    std::cerr << "error: cannot write manifest in " << args.out_dir << "\n";
    return kExitStageFailure;
  }
  manifest << "nucsynth-manifest v1\n";
  manifest << "command synth\n";
  manifest << "config preset=" << args.preset << "\n";
  manifest << "config count=" << args.count << "\n";
  manifest << "config size=" << args.size << "\n";
  manifest << "config seed=" << args.seed << "\n";

  for (int i = 0; i < args.count; ++i) {
    const std::uint64_t seed = Rng::derive(args.seed, static_cast<std::uint64_t>(i));
    Rng rng(seed);
    const SynthesisResult result = synthesize_mask(preset, rng, args.max_attempts);
    char name[32];
    std::snprintf(name, sizeof name, "mask_%04d.png", i);
    const fs::path path = fs::path(args.out_dir) / name;
    save_instance_mask(result.mask, path);
    manifest << "image " << i << " seed=" << seed << " requested=" << result.requested
             << " placed=" << result.placed << " warnings=" << result.warnings.size() << "\n";
    for (const std::string& w : result.warnings)
      manifest << "image " << i << " warning " << w << "\n";
    manifest << "image " << i << " file " << name << " fnv1a=" << file_digest(path) << "\n";
  }
  manifest << "result OK\n";
  return kExitOk;
}

struct FilterArgs {
  std::string in_path;
  std::string out_path;
  double keep_fraction = 0.5;
  std::string ordering = "radial";
  std::string mask_out;
};

int run_filter(const FilterArgs& args) {
  const Image img = load_image(args.in_path);
  const FrequencyMask mask =
      build_frequency_mask(img.rows(), img.cols(), args.keep_fraction, parse_ordering(args.ordering));
  const Image filtered = lowpass_filter(img, mask);
  save_image(filtered, args.out_path, guess_bit_depth(img));
  if (!args.mask_out.empty()) save_frequency_mask(mask, args.mask_out);
  return kExitOk;
}

struct StegoDemoArgs {
  std::string carrier_path;
  std::string payload_path;
  double epsilon = 0.01;
  int payload_side = 16;
  double band_fraction = 0.5;
  double keep_fraction = 0.5;
  std::string ordering = "radial";
  std::string out_dir = ".";
};

int run_stego_demo(const StegoDemoArgs& args) {
  const Image carrier_raw = load_image(args.carrier_path);
  const Image carrier = normalize(carrier_raw, ValueRange{-1.0, 1.0});
  const Image payload_img = load_image(args.payload_path);
  const BinaryMask payload = payload_img.values >= payload_img.range.midpoint();

  StegoConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.payload_side = args.payload_side;
  cfg.band_fraction = args.band_fraction;
  const FrequencyMask filter_mask = build_frequency_mask(
      carrier.rows(), carrier.cols(), args.keep_fraction, parse_ordering(args.ordering));

  const Image stego = embed(carrier, payload, cfg);
  const Image filtered = lowpass_filter(stego, filter_mask);
  const StegoReport report = stego_report(carrier, payload, cfg, filter_mask);

  Grid<double> diff = (stego.values - filtered.values).abs();
  const double peak = std::max(diff.maxCoeff(), 1e-12);
  const Image diff_img(std::move(diff), ValueRange{0.0, peak});

  fs::create_directories(args.out_dir);
  save_image(stego, fs::path(args.out_dir) / "stego.png", 16);
  save_image(filtered, fs::path(args.out_dir) / "filtered.png", 16);
  save_image(diff_img, fs::path(args.out_dir) / "difference.png", 8);

  std::printf("psnr_db %.6g\n", report.psnr_db);
  std::printf("ber_prefilter %.6g\n", report.ber_prefilter);
  std::printf("ber_postfilter %.6g\n", report.ber_postfilter);
  return kExitOk;
}

struct PostprocArgs {
  std::string in_path;
  std::string out_path;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::int64_t max_hole_area = 64;
  double min_marker_distance = 5.0;
  double min_marker_height = 2.0;
};

int run_postproc(const PostprocArgs& args) {
  const Image img = load_image(args.in_path);
  std::optional<double> threshold;
  if (!std::isnan(args.threshold)) threshold = args.threshold;
  BinaryMask fg = binarize(img, threshold);
  fg = fill_holes(fg, args.max_hole_area);
  const DistanceMap dist = distance_transform(fg);
  const InstanceMask instances =
      watershed_instances(dist, fg, args.min_marker_distance, args.min_marker_height);
  save_instance_mask(instances, args.out_path);
  std::printf("instances %d\n", instances.count());
  return kExitOk;
}

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string taus = "0.5,0.75";
};

int run_eval(const EvalArgs& args) {
  std::vector<double> taus;
  {
    std::stringstream parts(args.taus);
    std::string part;
    while (std::getline(parts, part, ',')) taus.push_back(std::stod(part));
  }
  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(args.gt_dir))
    if (entry.path().extension() == ".png") gt_files.push_back(entry.path());
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) {
    std::cerr << "error: no .png label maps in " << args.gt_dir << "\n";
    return kExitValidation;
  }

  std::printf("image\ttau\ttp\tfp\tfn\tprecision\trecall\tf1\n");
  std::map<double, std::array<std::int64_t, 3>> pooled;
  std::map<double, std::array<double, 3>> mean_sum;
  for (const fs::path& gt_path : gt_files) {
    const fs::path pred_path = fs::path(args.pred_dir) / gt_path.filename();
    if (!fs::exists(pred_path)) {
      std::cerr << "error: missing prediction for " << gt_path.filename().string() << "\n";
      return kExitValidation;
    }
    const InstanceMask gt = load_instance_mask(gt_path);
    const InstanceMask pred = load_instance_mask(pred_path);
    for (const double tau : taus) {
      const MatchResult m = match_instances(pred, gt, tau);
      const Scores s = prf_scores(m);
      std::printf("%s\t%g\t%d\t%d\t%d\t%.6g\t%.6g\t%.6g\n", gt_path.filename().c_str(), tau,
                  m.tp, m.fp, m.fn, s.precision, s.recall, s.f1);
      pooled[tau][0] += m.tp;
      pooled[tau][1] += m.fp;
      pooled[tau][2] += m.fn;
      mean_sum[tau][0] += s.precision;
      mean_sum[tau][1] += s.recall;
      mean_sum[tau][2] += s.f1;
    }
  }
  const double n = static_cast<double>(gt_files.size());
  for (const double tau : taus) {
    MatchResult m;
    m.tp = static_cast<int>(pooled[tau][0]);
    m.fp = static_cast<int>(pooled[tau][1]);
    m.fn = static_cast<int>(pooled[tau][2]);
    const Scores s = prf_scores(m);
    std::printf("ALL(pooled)\t%g\t%d\t%d\t%d\t%.6g\t%.6g\t%.6g\n", tau, m.tp, m.fp, m.fn,
                s.precision, s.recall, s.f1);
    std::printf("ALL(mean)\t%g\t-\t-\t-\t%.6g\t%.6g\t%.6g\n", tau, mean_sum[tau][0] / n,
                mean_sum[tau][1] / n, mean_sum[tau][2] / n);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic nuclei dataset toolkit: mask synthesis, frequency-domain "
               "filtering, hidden-signal demo, instance post-processing, evaluation"};
  app.require_subcommand(1);

  // global flags; subcommand-local flags of the same name win
  std::uint64_t g_seed = 0;
  std::string g_config, g_out_dir;
  int g_jobs = 0;
  auto* g_seed_opt = app.add_option("--seed", g_seed, "base seed for any subcommand");
  auto* g_config_opt = app.add_option("--config", g_config, "pipeline key=value config file");
  auto* g_out_opt = app.add_option("--out-dir", g_out_dir, "output directory");
  auto* g_jobs_opt = app.add_option("--jobs", g_jobs, "worker threads for the pipeline");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate instance masks from a preset");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--preset", synth_args.preset, "built-in name (dsb, bbbc039) or file");
  synth_cmd->add_option("--count", synth_args.count, "number of masks")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", synth_args.size, "canvas side in pixels")
      ->check(CLI::PositiveNumber);
  auto* synth_seed = synth_cmd->add_option("--seed", synth_args.seed, "base seed");
  auto* synth_out = synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory");
  synth_cmd->add_option("--max-attempts", synth_args.max_attempts,
                        "placement attempts before skipping a nucleus");

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "low-pass filter an image in the DCT domain");
  filter_cmd->add_option("--in", filter_args.in_path, "input image")->required();
  filter_cmd->add_option("--out", filter_args.out_path, "output PNG")->required();
  filter_cmd->add_option("--keep-fraction", filter_args.keep_fraction,
                         "fraction of lowest frequencies kept");
  filter_cmd->add_option("--ordering", filter_args.ordering, "radial or diagonal");
  filter_cmd->add_option("--mask-out", filter_args.mask_out,
                         "also write the keep/zero pattern as an 8-bit PNG");

  StegoDemoArgs stego_args;
  auto* stego_cmd = app.add_subcommand(
      "stego-demo", "embed a payload in a carrier, filter it back out, report PSNR and BER");
  stego_cmd->add_option("--carrier", stego_args.carrier_path, "carrier image")->required();
  stego_cmd->add_option("--payload", stego_args.payload_path, "payload mask image")->required();
  stego_cmd->add_option("--epsilon", stego_args.epsilon, "embedding amplitude");
  stego_cmd->add_option("--payload-side", stego_args.payload_side, "payload bits per side");
  stego_cmd->add_option("--band-fraction", stego_args.band_fraction,
                        "top spectrum slice reserved for embedding");
  stego_cmd->add_option("--keep-fraction", stego_args.keep_fraction,
                        "filter keep fraction");
  stego_cmd->add_option("--ordering", stego_args.ordering, "radial or diagonal");
  auto* stego_out =
      stego_cmd->add_option("--out-dir", stego_args.out_dir, "where stego/filtered/difference go");
  stego_cmd->fallthrough();

  PostprocArgs post_args;
  auto* post_cmd =
      app.add_subcommand("postproc", "near-binary image to instance labels via watershed");
  post_cmd->add_option("--in", post_args.in_path, "input image")->required();
  post_cmd->add_option("--out", post_args.out_path, "output 16-bit label PNG")->required();
  post_cmd->add_option("--threshold", post_args.threshold,
                       "binarization threshold (default: range midpoint)");
  post_cmd->add_option("--max-hole-area", post_args.max_hole_area, "largest hole to fill");
  post_cmd->add_option("--min-marker-distance", post_args.min_marker_distance,
                       "minimum spacing between watershed markers");
  post_cmd->add_option("--min-marker-height", post_args.min_marker_height,
                       "minimum distance value for a marker");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score predicted label maps against ground truth");
  eval_cmd->add_option("--pred-dir", eval_args.pred_dir, "predicted label PNGs")->required();
  eval_cmd->add_option("--gt-dir", eval_args.gt_dir, "ground-truth label PNGs")->required();
  eval_cmd->add_option("--tau", eval_args.taus, "comma-separated IoU thresholds (>= 0.5)");

  auto* pipe_cmd = app.add_subcommand(
      "pipeline", "synth -> carrier -> embed -> filter -> postproc -> eval, with manifest");
  pipe_cmd->fallthrough();
  std::string cfg_path;
  std::map<std::string, std::string> flag_values;
  auto* pipe_config = pipe_cmd->add_option("--config", cfg_path, "key=value config file");
  const char* pipeline_keys[] = {"preset",      "count",        "size",
                                 "keep_fraction", "ordering",   "epsilon",
                                 "payload_side",  "band_fraction", "threshold",
                                 "max_hole_area", "min_marker_distance", "min_marker_height",
                                 "tau",           "seed",       "jobs",
                                 "out_dir"};
  for (const char* key : pipeline_keys) {
    std::string flag = "--" + std::string(key);
    std::replace(flag.begin(), flag.end(), '_', '-');
    pipe_cmd->add_option(flag, flag_values[key], std::string("config key ") + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  // global flags feed any subcommand that did not set its own
  if (g_seed_opt->count() && !synth_seed->count()) synth_args.seed = g_seed;
  if (g_out_opt->count()) {
    if (!synth_out->count()) synth_args.out_dir = g_out_dir;
    if (!stego_out->count()) stego_args.out_dir = g_out_dir;
  }

  try {
    if (*synth_cmd) return run_synth(synth_args);
    if (*filter_cmd) return run_filter(filter_args);
    if (*stego_cmd) return run_stego_demo(stego_args);
    if (*post_cmd) return run_postproc(post_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*pipe_cmd) {
      PipelineConfig cfg;
      try {
        if (g_config_opt->count() && !pipe_config->count()) cfg_path = g_config;
        if (!cfg_path.empty()) cfg = parse_config(cfg_path);
        if (g_seed_opt->count() && flag_values["seed"].empty())
          flag_values["seed"] = std::to_string(g_seed);
        if (g_out_opt->count() && flag_values["out_dir"].empty())
          flag_values["out_dir"] = g_out_dir;
        if (g_jobs_opt->count() && flag_values["jobs"].empty())
          flag_values["jobs"] = std::to_string(g_jobs);
        for (const char* key : pipeline_keys) {
          const std::string& value = flag_values[key];
          if (!value.empty()) apply_config_entry(cfg, key, value);
        }
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
      }
      const PipelineSummary summary = run_pipeline(cfg);
      std::printf("manifest %s\n", summary.manifest_path.c_str());
      for (const TauEval& e : summary.content_pooled)
        std::printf("content pooled tau=%g precision=%.4f recall=%.4f f1=%.4f\n", e.tau,
                    e.scores.precision, e.scores.recall, e.scores.f1);
      std::printf("mean psnr_db=%.4g ber_pre=%.4g ber_post=%.4g\n", summary.mean_psnr_db,
                  summary.mean_ber_prefilter, summary.mean_ber_postfilter);
      if (!summary.ok) {
        std::cerr << "error: a pipeline stage failed; see manifest\n";
        return kExitStageFailure;
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitValidation;
}
