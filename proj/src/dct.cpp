#include "nucsynth/dct.hpp"

#include <algorithm>
#include <cmath>

namespace nucsynth {

FrequencyOrdering parse_ordering(const std::string& name) {
  if (name == "radial") return FrequencyOrdering::radial;
  if (name == "diagonal") return FrequencyOrdering::diagonal;
  throw std::invalid_argument("unknown frequency ordering '" + name +
                              "' (expected radial or diagonal)");
}

std::string ordering_name(FrequencyOrdering ord) {
  return ord == FrequencyOrdering::radial ? "radial" : "diagonal";
}

Eigen::MatrixXd dct_basis(Index n) {
  Eigen::MatrixXd basis(n, n);
  const double base = std::sqrt(2.0 / static_cast<double>(n));
  const double dc = std::sqrt(1.0 / static_cast<double>(n));
  for (Index i = 0; i < n; ++i) {
    const double scale = i == 0 ? dc : base;
    for (Index x = 0; x < n; ++x) {
      const double angle = M_PI * (2.0 * static_cast<double>(x) + 1.0) *
                           static_cast<double>(i) / (2.0 * static_cast<double>(n));
      basis(i, x) = scale * std::cos(angle);
    }
  }
  return basis;
}

DctCoeffs dct2(const Grid<double>& values) {
  const Eigen::MatrixXd row_basis = dct_basis(values.rows());
  const Eigen::MatrixXd col_basis = dct_basis(values.cols());
  return (row_basis * values.matrix() * col_basis.transpose()).array();
}

DctCoeffs dct2(const Image& img) { return dct2(img.values); }

Grid<double> idct2_values(const DctCoeffs& coeffs) {
  const Eigen::MatrixXd row_basis = dct_basis(coeffs.rows());
  const Eigen::MatrixXd col_basis = dct_basis(coeffs.cols());
  return (row_basis.transpose() * coeffs.matrix() * col_basis).array();
}

Image idct2(const DctCoeffs& coeffs, ValueRange range_hint) {
  Grid<double> values = idct2_values(coeffs);
  const ValueRange range = range_hint.hull(values.minCoeff(), values.maxCoeff());
  return Image(std::move(values), range);
}

std::vector<std::pair<Index, Index>> frequency_ranking(Index n, Index m, FrequencyOrdering ord) {
  std::vector<std::pair<Index, Index>> positions;
  positions.reserve(static_cast<std::size_t>(n * m));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) positions.emplace_back(i, j);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  auto key = [=](const std::pair<Index, Index>& p) {
    const double fi = static_cast<double>(p.first) * inv_n;
    const double fj = static_cast<double>(p.second) * inv_m;
    return ord == FrequencyOrdering::radial ? fi * fi + fj * fj : fi + fj;
  };
  std::stable_sort(positions.begin(), positions.end(),
                   [&](const auto& a, const auto& b) {
                     const double ka = key(a), kb = key(b);
                     if (ka != kb) return ka < kb;
                     return a < b;
                   });
  return positions;
}

FrequencyMask build_frequency_mask(Index n, Index m, double keep_fraction,
                                   FrequencyOrdering ord) {
  if (keep_fraction < 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("keep_fraction must lie in [0, 1]");
  const auto ranking = frequency_ranking(n, m, ord);
  std::size_t kept = static_cast<std::size_t>(
      std::llround(keep_fraction * static_cast<double>(n * m)));
  // DC survives whenever anything is kept at all.
  if (keep_fraction > 0.0 && kept == 0) kept = 1;

  FrequencyMask mask;
  mask.keep = Grid<bool>::Constant(n, m, false);
  mask.keep_fraction = keep_fraction;
  mask.ordering = ord;
  for (std::size_t k = 0; k < kept; ++k)
    mask.keep(ranking[k].first, ranking[k].second) = true;
  return mask;
}

Image lowpass_filter(const Image& img, const FrequencyMask& mask) {
  if (mask.rows() != img.rows() || mask.cols() != img.cols())
    throw std::invalid_argument("frequency mask shape does not match image");
  DctCoeffs coeffs = dct2(img);
  coeffs = mask.keep.select(coeffs, 0.0);
  return idct2(coeffs, img.range);
}

}  // namespace nucsynth
