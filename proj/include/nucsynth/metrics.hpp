#pragma once

#include <vector>

#include "nucsynth/grid.hpp"

namespace nucsynth {

struct InstanceMatch {
  std::int32_t pred_label = 0;
  std::int32_t gt_label = 0;
  double iou = 0.0;
};

/// One-to-one matching outcome at a fixed IoU threshold.
struct MatchResult {
  double tau = 0.5;
  std::vector<InstanceMatch> matches;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Loss weights used when combining the consistency terms.
struct LossConfig {
  double lambda_g = 10.0;
  double lambda_f = 15.0;
};

/// |a n b| / |a u b| over the two labels' pixel sets.
double iou(const InstanceMask& a, std::int32_t label_a, const InstanceMask& b,
           std::int32_t label_b);

/// Greedy descending-IoU one-to-one matching. Requires tau >= 0.5, where at
/// most one counterpart per instance can clear the threshold and greedy
/// matching is optimal.
MatchResult match_instances(const InstanceMask& pred, const InstanceMask& gt, double tau);

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 their harmonic mean;
/// 0/0 counts as 0 throughout.
Scores prf_scores(const MatchResult& m);

/// Mean absolute pixel difference between an image and its round trip.
double cycle_loss(const Image& original, const Image& cycled);

/// log d_real + log(1 - d_fake), with both logs clamped at 1e-7 so the value
/// stays finite at the extremes.
double adversarial_loss_terms(double d_real, double d_fake);

}  // namespace nucsynth
