#pragma once

#include <cstdint>
#include <vector>

#include "has/geometry.hpp"
#include "has/tensor.hpp"

namespace has {

/// N x M classifier weights W(c, i): row c scores class c from M pooled maps.
class ClassWeights {
 public:
  ClassWeights(int classes, int maps, std::vector<float> data);
  /// Rank-2 HAST tensors carry (N, M) in their (T, C) slots.
  static ClassWeights from_tensor(const Tensor1& t);

  int classes() const { return classes_; }
  int maps() const { return maps_; }
  float at(int c, int i) const { return data_[static_cast<std::size_t>(c) * maps_ + i]; }

 private:
  int classes_;
  int maps_;
  std::vector<float> data_;
};

/// CAM(c) = sum_i W(c, i) * F_i, returned as H x W x 1.
Tensor3 compute_cam(const Tensor3& feature_maps, const ClassWeights& weights, int class_id);
/// Temporal CAM over a T x M feature sequence, returned as T x 1.
Tensor1 compute_cam(const Tensor1& features, const ClassWeights& weights, int class_id);

struct LocalizeConfig {
  /// Foreground is cam >= threshold_frac * max(cam).
  double threshold_frac = 0.2;
  int connectivity = 8;
};

void validate(const LocalizeConfig& cfg);

struct BinaryMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> fg;

  bool at(int y, int x) const { return fg[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Throws ValidationError("no positive activation") when max(cam) <= 0.
BinaryMap threshold_cam(const Tensor3& cam, double threshold_frac);

struct Component {
  int pixel_count = 0;
  BBox extent;
  /// Row-major index of the component's first pixel.
  int first_pixel = 0;
};

struct Labeling {
  int height = 0;
  int width = 0;
  /// Component id per pixel, -1 for background.
  std::vector<int> labels;
  /// Ordered by first_pixel, so ids follow row-major discovery order.
  std::vector<Component> components;
};

Labeling connected_components(const BinaryMap& map, int connectivity);

/// Tight box around the largest foreground component; ties go to the
/// component whose first pixel comes first in row-major order.
BBox largest_component_bbox(const Tensor3& cam, const LocalizeConfig& cfg);

struct ScoredInterval {
  Interval interval;
  double score;
};

/// Maximal runs with cam >= threshold_frac * max(cam), sorted by start,
/// each scored by its mean CAM value.
std::vector<ScoredInterval> localize_segments(const Tensor1& cam, double threshold_frac);

}  // namespace has
