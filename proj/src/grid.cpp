#include "nucsynth/grid.hpp"

#include <vector>

namespace nucsynth {

Image::Image(Grid<double> v, ValueRange r) : values(std::move(v)), range(r) {
  if (values.rows() < 1 || values.cols() < 1)
    throw std::invalid_argument("image must be at least 1x1");
  if (range.width() < 0.0) throw std::invalid_argument("image range is inverted");
  const double mn = values.minCoeff();
  const double mx = values.maxCoeff();
  if (mn < range.lo || mx > range.hi)
    throw std::invalid_argument("image values [" + std::to_string(mn) + ", " +
                                std::to_string(mx) + "] escape declared range [" +
                                std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]");
}

InstanceMask::InstanceMask(Grid<std::int32_t> labels) : labels_(std::move(labels)), count_(0) {
  if (labels_.rows() < 1 || labels_.cols() < 1)
    throw std::invalid_argument("instance mask must be at least 1x1");
  const std::int32_t mx = labels_.maxCoeff();
  if (labels_.minCoeff() < 0) throw std::invalid_argument("instance labels must be non-negative");
  std::vector<bool> seen(static_cast<std::size_t>(mx) + 1, false);
  const std::int32_t* p = labels_.data();
  for (Index i = 0; i < labels_.size(); ++i) seen[static_cast<std::size_t>(p[i])] = true;
  for (std::int32_t k = 1; k <= mx; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw std::invalid_argument("instance labels have a gap at " + std::to_string(k));
  count_ = mx;
}

Image normalize(const Image& img, ValueRange target) {
  if (img.range.width() == 0.0)
    throw std::invalid_argument("cannot normalize from a zero-width range");
  const double scale = target.width() / img.range.width();
  Grid<double> out = (img.values - img.range.lo) * scale + target.lo;
  return Image(std::move(out), target);
}

Image crop_random(const Image& img, Index size, Rng& rng) {
  if (size < 1 || size > img.rows() || size > img.cols())
    throw std::invalid_argument("crop size " + std::to_string(size) +
                                " exceeds image dimensions");
  const Index r0 = static_cast<Index>(rng.uniform_int(0, img.rows() - size));
  const Index c0 = static_cast<Index>(rng.uniform_int(0, img.cols() - size));
  return Image(img.values.block(r0, c0, size, size), img.range);
}

Image inject_gaussian_noise(const Image& img, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  if (sigma == 0.0) return img;
  Grid<double> out = img.values;
  double* p = out.data();
  for (Index i = 0; i < out.size(); ++i) p[i] += rng.gaussian(0.0, sigma);
  const ValueRange widened = img.range.hull(out.minCoeff(), out.maxCoeff());
  return Image(std::move(out), widened);
}

}  // namespace nucsynth
