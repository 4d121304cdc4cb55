#pragma once

#include <utility>
#include <vector>

#include "nucsynth/grid.hpp"

namespace nucsynth {

/// Frequency-domain coefficient grid of the same shape as the source image.
/// Coefficient (0,0) is the DC term, (N-1,M-1) the highest frequency.
using DctCoeffs = Grid<double>;

enum class FrequencyOrdering { radial, diagonal };

FrequencyOrdering parse_ordering(const std::string& name);
std::string ordering_name(FrequencyOrdering ord);

/// Binary keep/zero pattern over a coefficient grid. The kept set is
/// downward-closed under the chosen frequency ordering and always includes
/// the DC term when keep_fraction > 0.
struct FrequencyMask {
  Grid<bool> keep;
  double keep_fraction = 1.0;
  FrequencyOrdering ordering = FrequencyOrdering::radial;

  Index rows() const { return keep.rows(); }
  Index cols() const { return keep.cols(); }
};

/// Orthonormal 1D DCT-II basis as an N x N orthogonal matrix; row i holds the
/// frequency-i basis vector.
Eigen::MatrixXd dct_basis(Index n);

/// All coefficient positions of an N x M grid sorted ascending by frequency.
/// Keys: radial (i/N)^2 + (j/M)^2, diagonal i/N + j/M; ties break on
/// (i, j) lexicographic.
std::vector<std::pair<Index, Index>> frequency_ranking(Index n, Index m, FrequencyOrdering ord);

/// Orthonormal 2D DCT-II, computed separably (rows then columns).
DctCoeffs dct2(const Image& img);
DctCoeffs dct2(const Grid<double>& values);

/// Exact inverse of dct2. The declared range of the result is `range_hint`
/// widened to cover the reconstructed values.
Image idct2(const DctCoeffs& coeffs, ValueRange range_hint);
Grid<double> idct2_values(const DctCoeffs& coeffs);

/// Keep/zero pattern retaining the round(keep_fraction * N * M) lowest
/// frequencies (at least the DC term whenever keep_fraction > 0).
FrequencyMask build_frequency_mask(Index n, Index m, double keep_fraction,
                                   FrequencyOrdering ord = FrequencyOrdering::radial);

/// idct2(dct2(img) with masked coefficients zeroed). Never increases energy.
Image lowpass_filter(const Image& img, const FrequencyMask& mask);

}  // namespace nucsynth
