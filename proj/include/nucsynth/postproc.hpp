#pragma once

#include <optional>

#include "nucsynth/grid.hpp"

namespace nucsynth {

/// Euclidean distance of every foreground pixel to the nearest background
/// pixel; exactly 0 on background. +inf when the mask has no background.
using DistanceMap = Grid<double>;

/// Foreground iff value >= threshold; the default threshold is the midpoint
/// of the declared range.
BinaryMask binarize(const Image& img, std::optional<double> threshold = std::nullopt);

/// Fills 4-connected background pockets of at most max_hole_area pixels that
/// do not touch the image border.
BinaryMask fill_holes(const BinaryMask& mask, std::int64_t max_hole_area);

/// Exact squared Euclidean distance to the nearest background pixel
/// (two-pass dimensional reduction). Values are exact integers.
Grid<double> squared_distance_transform(const BinaryMask& mask);

/// sqrt of squared_distance_transform.
DistanceMap distance_transform(const BinaryMask& mask);

/// Splits merged foreground into instances. Markers are 8-neighborhood local
/// maxima of `dist` at least min_marker_height tall, thinned so accepted
/// markers sit at least min_marker_distance apart (taller wins, ties resolve
/// lexicographically by position); any foreground component left without a
/// marker gets one at its tallest pixel so the labels always partition the
/// foreground. Flooding pops (distance, row, col) in decreasing-distance
/// order over 8-connected foreground.
InstanceMask watershed_instances(const DistanceMap& dist, const BinaryMask& mask,
                                 double min_marker_distance = 5.0,
                                 double min_marker_height = 2.0);

}  // namespace nucsynth
