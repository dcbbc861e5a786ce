#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "has/geometry.hpp"

namespace has {

struct EvalConfig {
  double iou_threshold = 0.5;
  /// true: a match needs IoU > threshold; false: IoU >= threshold.
  bool strict = true;
};

void validate(const EvalConfig& cfg);
bool passes(double iou_value, const EvalConfig& cfg);

/// One image's localization outcome. A missing box (e.g. a CAM with no
/// positive activation) always counts as a miss.
struct EvalRecord {
  std::string image_id;
  int gt_class = 0;
  std::vector<BBox> gt_boxes;
  int pred_class = 0;
  std::optional<BBox> box_for_pred_class;
  std::optional<BBox> box_for_gt_class;
};

/// Best IoU of `box` against any ground-truth box, 0 when `box` is absent.
double best_iou(const std::optional<BBox>& box, std::span<const BBox> gt_boxes);

/// Fraction of records whose gt-class box matches some gt box.
double gt_known_loc(std::span<const EvalRecord> records, const EvalConfig& cfg = {});
/// Fraction with the right top-1 class and a matching box for that class.
double top1_loc(std::span<const EvalRecord> records, const EvalConfig& cfg = {});

struct TemporalPrediction {
  std::string video_id;
  Interval interval;
  double score;
};

/// Ground-truth instances of one class, keyed by video id.
using TemporalGroundTruth = std::map<std::string, std::vector<Interval>>;

/// Non-interpolated all-point AP for a single class. Predictions are ranked
/// by score (desc), then t0 (asc), then video id; each one greedily claims
/// the unmatched same-video instance with the highest IoU if it passes the
/// threshold. Returns 0 when the class has no ground truth.
double average_precision(std::span<const TemporalPrediction> predictions, const TemporalGroundTruth& ground_truth,
                         const EvalConfig& cfg);

struct TemporalEvalSet {
  std::map<int, TemporalGroundTruth> ground_truth;
  std::map<int, std::vector<TemporalPrediction>> predictions;
};

struct MeanApReport {
  double mean_ap = 0.0;
  /// Classes with at least one ground-truth instance.
  std::map<int, double> per_class;
};

MeanApReport mean_ap_report(const TemporalEvalSet& set, const EvalConfig& cfg);
double mean_ap(const TemporalEvalSet& set, const EvalConfig& cfg);

}  // namespace has
