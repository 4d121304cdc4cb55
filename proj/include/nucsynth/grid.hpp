#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "nucsynth/rng.hpp"

namespace nucsynth {

/// Dense 2D raster, indexed (row, col). Row-major so a raster maps 1:1 onto
/// the scanline order used by the file formats.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// Foreground/background raster.
using BinaryMask = Grid<bool>;

/// Closed interval a grid's values are declared to lie in.
struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }

  /// Smallest range covering both `*this` and [mn, mx].
  ValueRange hull(double mn, double mx) const {
    return {lo < mn ? lo : mn, hi > mx ? hi : mx};
  }
};

inline bool operator==(const ValueRange& a, const ValueRange& b) {
  return a.lo == b.lo && a.hi == b.hi;
}

/// Grayscale image: real-valued raster plus the range its values are asserted
/// to lie in. The range records provenance (e.g. [0,255] for an 8-bit source)
/// and drives normalization and file output scaling.
struct Image {
  Grid<double> values;
  ValueRange range;

  Image() : values(), range{0.0, 1.0} {}
  Image(Grid<double> v, ValueRange r);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Labeled raster: 0 = background, instances carry labels 1..count() with no
/// gaps. Validated on construction; a pixel belongs to at most one instance
/// by representation.
class InstanceMask {
 public:
  InstanceMask() : labels_(), count_(0) {}
  explicit InstanceMask(Grid<std::int32_t> labels);

  const Grid<std::int32_t>& labels() const { return labels_; }
  std::int32_t count() const { return count_; }
  Index rows() const { return labels_.rows(); }
  Index cols() const { return labels_.cols(); }

  BinaryMask foreground() const { return labels_ > 0; }

 private:
  Grid<std::int32_t> labels_;
  std::int32_t count_;
};

/// Affine remap of `img.range` onto `target`. The source range must have
/// nonzero width.
Image normalize(const Image& img, ValueRange target);

/// Contiguous square sub-grid of side `size` at a uniformly drawn offset.
Image crop_random(const Image& img, Index size, Rng& rng);

/// Per-pixel additive Gaussian noise; the declared range widens to cover any
/// values pushed outside it. sigma == 0 returns the input unchanged.
Image inject_gaussian_noise(const Image& img, double sigma, Rng& rng);

inline double sum_squares(const Grid<double>& g) { return (g * g).sum(); }

}  // namespace nucsynth
