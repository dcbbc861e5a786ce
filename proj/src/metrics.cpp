#include "has/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "has/error.hpp"

namespace has {

void validate(const EvalConfig& cfg) {
  require(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0, "IoU threshold must lie in (0, 1)");
}

bool passes(double iou_value, const EvalConfig& cfg) {
  return cfg.strict ? iou_value > cfg.iou_threshold : iou_value >= cfg.iou_threshold;
}

double best_iou(const std::optional<BBox>& box, std::span<const BBox> gt_boxes) {
  if (!box) return 0.0;
  double best = 0.0;
  for (const auto& gt : gt_boxes) best = std::max(best, iou(*box, gt));
  return best;
}

namespace {

void check_records(std::span<const EvalRecord> records, const EvalConfig& cfg) {
  validate(cfg);
  require(!records.empty(), "no evaluation records");
  for (const auto& r : records) {
    require(!r.gt_boxes.empty(), "record '" + r.image_id + "' has no ground-truth boxes");
  }
}

}  // namespace

double gt_known_loc(std::span<const EvalRecord> records, const EvalConfig& cfg) {
  check_records(records, cfg);
  const auto correct = std::ranges::count_if(
      records, [&](const EvalRecord& r) { return passes(best_iou(r.box_for_gt_class, r.gt_boxes), cfg); });
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double top1_loc(std::span<const EvalRecord> records, const EvalConfig& cfg) {
  check_records(records, cfg);
  const auto correct = std::ranges::count_if(records, [&](const EvalRecord& r) {
    return r.pred_class == r.gt_class && passes(best_iou(r.box_for_pred_class, r.gt_boxes), cfg);
  });
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double average_precision(std::span<const TemporalPrediction> predictions, const TemporalGroundTruth& ground_truth,
                         const EvalConfig& cfg) {
  validate(cfg);
  std::size_t n_gt = 0;
  for (const auto& [video, instances] : ground_truth) n_gt += instances.size();
  if (n_gt == 0) return 0.0;

  std::vector<const TemporalPrediction*> ranked;
  ranked.reserve(predictions.size());
  for (const auto& p : predictions) {
    require(std::isfinite(p.score), "prediction scores must be finite");
    ranked.push_back(&p);
  }
  std::ranges::stable_sort(ranked, [](const TemporalPrediction* a, const TemporalPrediction* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->interval.t0() != b->interval.t0()) return a->interval.t0() < b->interval.t0();
    return a->video_id < b->video_id;
  });

  std::map<std::string, std::vector<bool>> claimed;
  for (const auto& [video, instances] : ground_truth) claimed[video].assign(instances.size(), false);

  std::size_t tp = 0;
  double ap = 0.0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const auto& pred = *ranked[rank];
    const auto gt_it = ground_truth.find(pred.video_id);
    if (gt_it == ground_truth.end()) continue;
    auto& used = claimed[pred.video_id];
    int best = -1;
    double best_overlap = 0.0;
    for (std::size_t j = 0; j < gt_it->second.size(); ++j) {
      if (used[j]) continue;
      const double overlap = iou(pred.interval, gt_it->second[j]);
      if (passes(overlap, cfg) && (best < 0 || overlap > best_overlap)) {
        best = static_cast<int>(j);
        best_overlap = overlap;
      }
    }
    if (best < 0) continue;
    used[static_cast<std::size_t>(best)] = true;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
  }
  return ap / static_cast<double>(n_gt);
}

MeanApReport mean_ap_report(const TemporalEvalSet& set, const EvalConfig& cfg) {
  validate(cfg);
  MeanApReport report;
  static const std::vector<TemporalPrediction> kNone;
  for (const auto& [cls, gt] : set.ground_truth) {
    const bool has_gt = std::ranges::any_of(gt, [](const auto& kv) { return !kv.second.empty(); });
    if (!has_gt) continue;
    const auto it = set.predictions.find(cls);
    report.per_class[cls] = average_precision(it == set.predictions.end() ? kNone : it->second, gt, cfg);
  }
  if (!report.per_class.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ap] : report.per_class) sum += ap;
    report.mean_ap = sum / static_cast<double>(report.per_class.size());
  }
  return report;
}

double mean_ap(const TemporalEvalSet& set, const EvalConfig& cfg) { return mean_ap_report(set, cfg).mean_ap; }

}  // namespace has
