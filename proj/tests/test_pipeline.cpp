#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "nucsynth/image_io.hpp"
#include "nucsynth/pipeline.hpp"

using namespace nucsynth;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nucsynth_pipe_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.count = 2;
  cfg.size = 64;
  cfg.payload_side = 8;
  cfg.preset = "bbbc039";
  cfg.out_dir = out;
  cfg.seed = 11;
  return cfg;
}

std::vector<std::string> stable_manifest_lines(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("config entries validate and apply") {
  PipelineConfig cfg;
  apply_config_entry(cfg, "keep_fraction", "0.25");
  CHECK(cfg.keep_fraction == 0.25);
  apply_config_entry(cfg, "ordering", "diagonal");
  CHECK(cfg.ordering == FrequencyOrdering::diagonal);
  apply_config_entry(cfg, "tau", "0.5,0.75");
  CHECK(cfg.taus.size() == 2);
  apply_config_entry(cfg, "seed", "12345");
  CHECK(cfg.seed == 12345);

  CHECK_THROWS_WITH_AS(apply_config_entry(cfg, "keep_fraction", "1.5"),
                       doctest::Contains("keep_fraction"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_config_entry(cfg, "no_such_key", "1"),
                       doctest::Contains("unknown config key"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_entry(cfg, "count", "2.5"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_entry(cfg, "tau", "0.3"), std::invalid_argument);
}

TEST_CASE("config files parse with comments and whitespace; empty file means defaults") {
  const fs::path dir = fresh_dir("config");
  const fs::path file = dir / "run.cfg";
  {
    std::ofstream out(file);
    out << "# a comment\n";
    out << "keep_fraction = 0.4\n";
    out << "\n";
    out << "preset=dsb   # trailing\n";
  }
  const PipelineConfig cfg = parse_config(file);
  CHECK(cfg.keep_fraction == 0.4);
  CHECK(cfg.preset == "dsb");
  CHECK(cfg.count == PipelineConfig{}.count);

  const fs::path empty = dir / "empty.cfg";
  std::ofstream(empty).close();
  const PipelineConfig defaults = parse_config(empty);
  CHECK(defaults.keep_fraction == PipelineConfig{}.keep_fraction);
  CHECK(defaults.preset == PipelineConfig{}.preset);

  const fs::path bad = dir / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "keep_fraction 0.4\n";
  }
  CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
}

TEST_CASE("carrier rendering separates the classes and stays in range") {
  SynthesisPreset preset = load_preset("bbbc039");
  preset.canvas_rows = preset.canvas_cols = 96;
  Rng rng(3);
  const SynthesisResult synth = synthesize_mask(preset, rng);
  const Image carrier = render_carrier(synth.mask, rng);
  CHECK(carrier.range == ValueRange{-1.0, 1.0});
  CHECK(carrier.values.minCoeff() >= -1.0);
  CHECK(carrier.values.maxCoeff() <= 1.0);

  double fg_mean = 0.0, bg_mean = 0.0;
  Index fg_n = 0, bg_n = 0;
  for (Index r = 0; r < carrier.rows(); ++r)
    for (Index c = 0; c < carrier.cols(); ++c) {
      if (synth.mask.labels()(r, c) > 0) {
        fg_mean += carrier.values(r, c);
        ++fg_n;
      } else {
        bg_mean += carrier.values(r, c);
        ++bg_n;
      }
    }
  fg_mean /= static_cast<double>(fg_n);
  bg_mean /= static_cast<double>(bg_n);
  CHECK(fg_mean > 0.3);
  CHECK(bg_mean < -0.4);
}

TEST_CASE("a small run produces a coherent manifest and artifacts") {
  const fs::path out = fresh_dir("smoke");
  const PipelineConfig cfg = small_config(out);
  const PipelineSummary summary = run_pipeline(cfg);
  CHECK(summary.ok);
  REQUIRE(summary.images.size() == 2);
  for (const ImageRecord& rec : summary.images) {
    CHECK(rec.error_stage.empty());
    CHECK(rec.ber_prefilter == 0.0);
    CHECK(rec.psnr_db >= 40.0);
    CHECK(rec.files.size() == 6);
    for (const auto& [name, digest] : rec.files) {
      CHECK(fs::exists(out / name));
      CHECK(file_digest(out / name) == digest);
    }
  }
  CHECK(fs::exists(summary.manifest_path));
  const auto lines = stable_manifest_lines(summary.manifest_path);
  CHECK(lines.front() == "nucsynth-manifest v1");
  CHECK(lines.back() == "result OK");

  // ground truth instances recovered through the clean content path
  for (const TauEval& e : summary.content_pooled)
    if (e.tau == 0.5) CHECK(e.scores.f1 > 0.8);
}

TEST_CASE("identity filter keeps the channel readable end to end") {
  const fs::path out = fresh_dir("identity");
  PipelineConfig cfg = small_config(out);
  cfg.keep_fraction = 1.0;
  const PipelineSummary summary = run_pipeline(cfg);
  CHECK(summary.ok);
  CHECK(summary.mean_ber_prefilter == 0.0);
  CHECK(summary.mean_ber_postfilter == 0.0);
}

TEST_CASE("two runs with the same seed are bit-identical, a different seed is not") {
  const fs::path out_a = fresh_dir("repro_a");
  const fs::path out_b = fresh_dir("repro_b");
  const fs::path out_c = fresh_dir("repro_c");

  PipelineConfig cfg_a = small_config(out_a);
  PipelineConfig cfg_b = small_config(out_b);
  PipelineConfig cfg_c = small_config(out_c);
  cfg_c.seed = 999;

  const PipelineSummary a = run_pipeline(cfg_a);
  const PipelineSummary b = run_pipeline(cfg_b);
  const PipelineSummary c = run_pipeline(cfg_c);

  REQUIRE(a.ok);
  REQUIRE(b.ok);
  REQUIRE(c.ok);
  CHECK(stable_manifest_lines(a.manifest_path) == stable_manifest_lines(b.manifest_path));
  CHECK(stable_manifest_lines(a.manifest_path) != stable_manifest_lines(c.manifest_path));
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    REQUIRE(a.images[i].files.size() == b.images[i].files.size());
    for (std::size_t f = 0; f < a.images[i].files.size(); ++f)
      CHECK(a.images[i].files[f].second == b.images[i].files[f].second);
  }
}

TEST_CASE("worker count does not change the result") {
  const fs::path out_1 = fresh_dir("jobs_1");
  const fs::path out_4 = fresh_dir("jobs_4");
  PipelineConfig cfg_1 = small_config(out_1);
  cfg_1.count = 4;
  PipelineConfig cfg_4 = cfg_1;
  cfg_4.out_dir = out_4;
  cfg_4.jobs = 4;
  const PipelineSummary s1 = run_pipeline(cfg_1);
  const PipelineSummary s4 = run_pipeline(cfg_4);
  REQUIRE(s1.ok);
  REQUIRE(s4.ok);
  CHECK(stable_manifest_lines(s1.manifest_path) == stable_manifest_lines(s4.manifest_path));
}

TEST_CASE("an impossible stego configuration is rejected up front") {
  const fs::path out = fresh_dir("failure");
  PipelineConfig cfg = small_config(out);
  cfg.payload_side = 60;  // 3600 bits > half of 64*64
  CHECK_THROWS_AS(run_pipeline(cfg), std::invalid_argument);
}

TEST_CASE("a failing stage leaves a FAILED marker and keeps earlier artifacts") {
  const fs::path out = fresh_dir("failure_marker");
  PipelineConfig cfg = small_config(out);
  cfg.count = 1;
  // a directory squatting on the first output path makes the io stage fail
  fs::create_directories(out / "gt_0000.png");
  const PipelineSummary summary = run_pipeline(cfg);
  CHECK_FALSE(summary.ok);
  CHECK(summary.images[0].error_stage == "io");
  const auto lines = stable_manifest_lines(summary.manifest_path);
  CHECK(lines.back().rfind("result FAILED stage=io", 0) == 0);
}
