#include "nucsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nucsynth {

double iou(const InstanceMask& a, std::int32_t label_a, const InstanceMask& b,
           std::int32_t label_b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("instance masks differ in shape");
  const std::int32_t* pa = a.labels().data();
  const std::int32_t* pb = b.labels().data();
  std::int64_t inter = 0, only_a = 0, only_b = 0;
  for (Index i = 0; i < a.labels().size(); ++i) {
    const bool in_a = pa[i] == label_a;
    const bool in_b = pb[i] == label_b;
    inter += in_a && in_b;
    only_a += in_a && !in_b;
    only_b += !in_a && in_b;
  }
  const std::int64_t uni = inter + only_a + only_b;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_instances(const InstanceMask& pred, const InstanceMask& gt, double tau) {
  if (tau < 0.5 || tau > 1.0)
    throw std::invalid_argument("tau must lie in [0.5, 1]; below 0.5 one-to-one greedy "
                                "matching is no longer optimal");
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("instance masks differ in shape");

  std::vector<std::int64_t> pred_area(static_cast<std::size_t>(pred.count()) + 1, 0);
  std::vector<std::int64_t> gt_area(static_cast<std::size_t>(gt.count()) + 1, 0);
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> inter;

  const std::int32_t* pp = pred.labels().data();
  const std::int32_t* pg = gt.labels().data();
  for (Index i = 0; i < pred.labels().size(); ++i) {
    if (pp[i] > 0) ++pred_area[static_cast<std::size_t>(pp[i])];
    if (pg[i] > 0) ++gt_area[static_cast<std::size_t>(pg[i])];
    if (pp[i] > 0 && pg[i] > 0) ++inter[{pp[i], pg[i]}];
  }

  std::vector<InstanceMatch> candidates;
  for (const auto& [pair, overlap] : inter) {
    const auto [p, g] = pair;
    const std::int64_t uni = pred_area[static_cast<std::size_t>(p)] +
                             gt_area[static_cast<std::size_t>(g)] - overlap;
    const double score = static_cast<double>(overlap) / static_cast<double>(uni);
    if (score >= tau) candidates.push_back({p, g, score});
  }
  std::sort(candidates.begin(), candidates.end(), [](const InstanceMatch& a, const InstanceMatch& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred_label != b.pred_label) return a.pred_label < b.pred_label;
    return a.gt_label < b.gt_label;
  });

  MatchResult result;
  result.tau = tau;
  std::vector<bool> pred_used(pred_area.size(), false);
  std::vector<bool> gt_used(gt_area.size(), false);
  for (const InstanceMatch& c : candidates) {
    if (pred_used[static_cast<std::size_t>(c.pred_label)] ||
        gt_used[static_cast<std::size_t>(c.gt_label)])
      continue;
    pred_used[static_cast<std::size_t>(c.pred_label)] = true;
    gt_used[static_cast<std::size_t>(c.gt_label)] = true;
    result.matches.push_back(c);
  }
  result.tp = static_cast<int>(result.matches.size());
  result.fp = pred.count() - result.tp;
  result.fn = gt.count() - result.tp;
  return result;
}

Scores prf_scores(const MatchResult& m) {
  Scores s;
  const double tp = static_cast<double>(m.tp);
  s.precision = m.tp + m.fp == 0 ? 0.0 : tp / static_cast<double>(m.tp + m.fp);
  s.recall = m.tp + m.fn == 0 ? 0.0 : tp / static_cast<double>(m.tp + m.fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0
                                       : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double cycle_loss(const Image& original, const Image& cycled) {
  if (original.rows() != cycled.rows() || original.cols() != cycled.cols())
    throw std::invalid_argument("images differ in shape");
  return (original.values - cycled.values).abs().mean();
}

double adversarial_loss_terms(double d_real, double d_fake) {
  if (d_real < 0.0 || d_real > 1.0 || d_fake < 0.0 || d_fake > 1.0)
    throw std::invalid_argument("discriminator outputs must lie in [0, 1]");
  constexpr double floor = 1e-7;
  const double a = std::max(d_real, floor);
  const double b = std::max(1.0 - d_fake, floor);
  return std::log(a) + std::log(b);
}

}  // namespace nucsynth
