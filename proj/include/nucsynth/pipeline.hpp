#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nucsynth/dct.hpp"
#include "nucsynth/grid.hpp"
#include "nucsynth/metrics.hpp"
#include "nucsynth/stego.hpp"
#include "nucsynth/synth.hpp"

namespace nucsynth {

/// Resolved settings for one end-to-end run. Flat key=value config files and
/// CLI flags both land here; flags win.
struct PipelineConfig {
  std::string preset = "bbbc039";
  std::filesystem::path out_dir = "out";
  int count = 50;
  Index size = 256;
  double keep_fraction = 0.5;
  FrequencyOrdering ordering = FrequencyOrdering::radial;
  double epsilon = 0.01;
  int payload_side = 16;
  double band_fraction = 0.5;
  double threshold = 0.0;  // carriers are rendered in [-1, 1]
  std::int64_t max_hole_area = 64;
  double min_marker_distance = 5.0;
  double min_marker_height = 2.0;
  std::vector<double> taus = {0.5, 0.75};
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// Applies one key=value pair; throws naming the key and the accepted range
/// on anything unknown or out of range.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Parses a flat key=value file ('#' comments, blank lines ignored).
PipelineConfig parse_config(const std::filesystem::path& path);

/// One key=value line per setting, in a fixed order.
std::vector<std::string> config_lines(const PipelineConfig& cfg);

struct TauEval {
  double tau = 0.0;
  std::int64_t tp = 0, fp = 0, fn = 0;
  Scores scores;
};

struct ImageRecord {
  int index = 0;
  std::uint64_t seed = 0;
  int requested = 0;
  int placed = 0;
  std::vector<std::string> warnings;
  double psnr_db = 0.0;
  double ber_prefilter = 0.0;
  double ber_postfilter = 0.0;
  std::vector<TauEval> content_eval;  // filtered clean carrier -> instances vs ground truth
  std::vector<TauEval> stego_eval;    // filtered stego image   -> instances vs ground truth
  std::vector<std::pair<std::string, std::string>> files;  // relative path, digest
  std::string error_stage;    // empty on success
  std::string error_message;
};

struct PipelineSummary {
  std::vector<ImageRecord> images;
  std::vector<TauEval> content_pooled;
  std::vector<TauEval> content_mean;  // per-image scores averaged; counts stay pooled
  std::vector<TauEval> stego_pooled;
  double mean_psnr_db = 0.0;
  double mean_ber_prefilter = 0.0;
  double mean_ber_postfilter = 0.0;
  bool ok = false;
  std::filesystem::path manifest_path;
};

/// Synthesizes masks, renders textured carriers, embeds each mask into its
/// carrier, filters, post-processes, and scores the recovered instances
/// against the synthesized ground truth. Artifacts and a line-oriented
/// manifest land in cfg.out_dir; manifest lines starting with '#' hold the
/// volatile fields (timestamp, timings), everything else is reproducible
/// bit-for-bit for a fixed config and seed.
PipelineSummary run_pipeline(const PipelineConfig& cfg);

/// Procedural stand-in for a generated microscopy image: noisy dark
/// background with brighter instance interiors, clamped to [-1, 1].
Image render_carrier(const InstanceMask& gt, Rng& rng);

}  // namespace nucsynth
