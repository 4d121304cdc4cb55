#pragma once

#include <string>
#include <vector>

#include "nucsynth/grid.hpp"
#include "nucsynth/rng.hpp"

namespace nucsynth {

/// One nucleus: rotated ellipse with sub-pixel center.
struct EllipseParams {
  double center_row = 0.0;
  double center_col = 0.0;
  double semi_major = 1.0;   // a, pixels
  double semi_minor = 1.0;   // b, pixels; a >= b > 0
  double rotation_deg = 0.0; // in [0, 179]

  double eccentricity() const;
};

/// Sampling ranges for one subset of a dataset's nuclei population.
struct PresetRow {
  double major_lo = 1.0, major_hi = 1.0;  // semi-major axis, pixels
  int count_lo = 1, count_hi = 1;         // nuclei per image, inclusive
  double ecc_lo = 0.0, ecc_hi = 0.0;      // in [0, 1)
};

struct SynthesisPreset {
  std::vector<PresetRow> rows;
  Index canvas_rows = 256;
  Index canvas_cols = 256;
};

struct SynthesisResult {
  InstanceMask mask;
  int requested = 0;  // sampled nucleus count
  int placed = 0;
  std::vector<EllipseParams> placed_ellipses;  // in label order
  std::vector<std::string> warnings;
};

/// b = a * sqrt(1 - e^2).
double minor_axis(double a, double e);

/// Draws axis length, eccentricity, and rotation uniformly from the row's
/// ranges. The center is left at (0,0); placement assigns it.
EllipseParams sample_ellipse(const PresetRow& row, Rng& rng);

/// Foreground = pixel centers inside the rotated ellipse; clipped to canvas.
BinaryMask rasterize_ellipse(const EllipseParams& e, Index rows, Index cols);

/// Places nuclei by rejection: a candidate position is accepted iff its
/// pixels hit no already-placed instance (touching is fine, overlap is not).
/// After max_attempts failed positions a nucleus is skipped with a warning.
SynthesisResult synthesize_mask(const SynthesisPreset& preset, Rng& rng, int max_attempts = 100);

/// Built-in names "dsb" and "bbbc039", or a path to a preset text file
/// (one row per line: a_lo a_hi n_lo n_hi e_lo e_hi; '#' comments).
SynthesisPreset load_preset(const std::string& name_or_path);

}  // namespace nucsynth
