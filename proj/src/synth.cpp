#include "nucsynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nucsynth {

double EllipseParams::eccentricity() const {
  const double ratio = semi_minor / semi_major;
  return std::sqrt(1.0 - ratio * ratio);
}

double minor_axis(double a, double e) {
  if (a <= 0.0) throw std::invalid_argument("semi-major axis must be positive");
  if (e < 0.0 || e >= 1.0) throw std::invalid_argument("eccentricity must lie in [0, 1)");
  return a * std::sqrt(1.0 - e * e);
}

EllipseParams sample_ellipse(const PresetRow& row, Rng& rng) {
  EllipseParams e;
  e.semi_major = rng.uniform(row.major_lo, row.major_hi);
  const double ecc = rng.uniform(row.ecc_lo, row.ecc_hi);
  e.semi_minor = minor_axis(e.semi_major, ecc);
  e.rotation_deg = rng.uniform(0.0, 179.0);
  return e;
}

namespace {

// Pixel centers inside the rotated ellipse, restricted to the canvas.
std::vector<std::pair<Index, Index>> ellipse_pixels(const EllipseParams& e, Index rows,
                                                    Index cols) {
  const double rad = e.rotation_deg * M_PI / 180.0;
  const double cos_t = std::cos(rad);
  const double sin_t = std::sin(rad);
  const double extent = e.semi_major + 1.0;

  const Index r0 = std::max<Index>(0, static_cast<Index>(std::floor(e.center_row - extent)));
  const Index r1 = std::min<Index>(rows - 1, static_cast<Index>(std::ceil(e.center_row + extent)));
  const Index c0 = std::max<Index>(0, static_cast<Index>(std::floor(e.center_col - extent)));
  const Index c1 = std::min<Index>(cols - 1, static_cast<Index>(std::ceil(e.center_col + extent)));

  std::vector<std::pair<Index, Index>> pixels;
  for (Index r = r0; r <= r1; ++r) {
    const double dy = static_cast<double>(r) - e.center_row;
    for (Index c = c0; c <= c1; ++c) {
      const double dx = static_cast<double>(c) - e.center_col;
      // rotate the offset by -theta into the ellipse frame
      const double x = dx * cos_t + dy * sin_t;
      const double y = -dx * sin_t + dy * cos_t;
      const double u = x / e.semi_major;
      const double v = y / e.semi_minor;
      if (u * u + v * v <= 1.0) pixels.emplace_back(r, c);
    }
  }
  return pixels;
}

}  // namespace

BinaryMask rasterize_ellipse(const EllipseParams& e, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("canvas must be at least 1x1");
  BinaryMask mask = BinaryMask::Constant(rows, cols, false);
  for (const auto& [r, c] : ellipse_pixels(e, rows, cols)) mask(r, c) = true;
  return mask;
}

SynthesisResult synthesize_mask(const SynthesisPreset& preset, Rng& rng, int max_attempts) {
  if (preset.rows.empty()) throw std::invalid_argument("preset has no rows");
  const Index rows = preset.canvas_rows;
  const Index cols = preset.canvas_cols;

  const std::size_t row_idx =
      static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(preset.rows.size()) - 1));
  const PresetRow& row = preset.rows[row_idx];
  const int wanted = static_cast<int>(rng.uniform_int(row.count_lo, row.count_hi));

  Grid<std::int32_t> labels = Grid<std::int32_t>::Constant(rows, cols, 0);
  SynthesisResult result;
  result.requested = wanted;

  for (int n = 0; n < wanted; ++n) {
    EllipseParams shape = sample_ellipse(row, rng);
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      shape.center_row = rng.uniform(0.0, static_cast<double>(rows));
      shape.center_col = rng.uniform(0.0, static_cast<double>(cols));
      const auto pixels = ellipse_pixels(shape, rows, cols);
      if (pixels.empty()) continue;  // degenerate sliver missed every pixel center
      bool collides = false;
      for (const auto& [r, c] : pixels)
        if (labels(r, c) > 0) {
          collides = true;
          break;
        }
      if (collides) continue;
      const std::int32_t label = static_cast<std::int32_t>(result.placed) + 1;
      for (const auto& [r, c] : pixels) labels(r, c) = label;
      result.placed_ellipses.push_back(shape);
      result.placed += 1;
      placed = true;
    }
    if (!placed)
      result.warnings.push_back("nucleus " + std::to_string(n + 1) + "/" +
                                std::to_string(wanted) + " skipped after " +
                                std::to_string(max_attempts) + " rejected positions");
  }
  result.mask = InstanceMask(std::move(labels));
  return result;
}

namespace {

SynthesisPreset preset_from_rows(std::vector<PresetRow> rows) {
  SynthesisPreset preset;
  preset.rows = std::move(rows);
  return preset;
}

void validate_row(const PresetRow& r, const std::string& where) {
  const bool ok = r.major_lo > 0.0 && r.major_hi >= r.major_lo && r.count_lo >= 1 &&
                  r.count_hi >= r.count_lo && r.ecc_lo >= 0.0 && r.ecc_hi >= r.ecc_lo &&
                  r.ecc_hi < 1.0;
  if (!ok) throw std::invalid_argument(where + ": invalid preset row");
}

}  // namespace

SynthesisPreset load_preset(const std::string& name_or_path) {
  if (name_or_path == "dsb") {
    return preset_from_rows({{5, 10, 1, 150, 0.4, 0.9},
                             {10, 15, 1, 40, 0.4, 0.9},
                             {15, 20, 1, 40, 0.4, 0.9},
                             {20, 25, 1, 40, 0.4, 0.9},
                             {25, 30, 1, 20, 0.4, 0.9},
                             {30, 35, 1, 20, 0.4, 0.9}});
  }
  if (name_or_path == "bbbc039") {
    return preset_from_rows({{10, 20, 20, 60, 0.6, 0.9}, {20, 40, 20, 30, 0.6, 0.9}});
  }

  std::ifstream in(name_or_path);
  if (!in)
    throw std::runtime_error("unknown preset '" + name_or_path +
                             "' (not a built-in name and not a readable file)");
  std::vector<PresetRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    PresetRow row;
    if (!(fields >> row.major_lo)) continue;  // blank line
    if (!(fields >> row.major_hi >> row.count_lo >> row.count_hi >> row.ecc_lo >> row.ecc_hi))
      throw std::runtime_error(name_or_path + ":" + std::to_string(line_no) +
                               ": expected 6 fields (a_lo a_hi n_lo n_hi e_lo e_hi)");
    std::string extra;
    if (fields >> extra)
      throw std::runtime_error(name_or_path + ":" + std::to_string(line_no) +
                               ": trailing content '" + extra + "'");
    validate_row(row, name_or_path + ":" + std::to_string(line_no));
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(name_or_path + ": preset file has no rows");
  return preset_from_rows(std::move(rows));
}

}  // namespace nucsynth
