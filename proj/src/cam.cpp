#include "has/cam.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "has/error.hpp"

namespace has {

ClassWeights::ClassWeights(int classes, int maps, std::vector<float> data)
    : classes_(classes), maps_(maps), data_(std::move(data)) {
  require(classes > 0 && maps > 0, "class weight matrix must be non-empty");
  require(data_.size() == static_cast<std::size_t>(classes) * maps, "class weight data does not match N*M");
}

ClassWeights ClassWeights::from_tensor(const Tensor1& t) {
  return ClassWeights(t.length(), t.channels(), std::vector<float>(t.data().begin(), t.data().end()));
}

namespace {

void check_class(const ClassWeights& weights, int maps, int class_id) {
  require(maps == weights.maps(), "feature maps have " + std::to_string(maps) + " channels, weights expect " +
                                      std::to_string(weights.maps()));
  require(class_id >= 0 && class_id < weights.classes(),
          "class " + std::to_string(class_id) + " out of range [0, " + std::to_string(weights.classes()) + ")");
}

float weighted_sum(std::span<const float> maps, const ClassWeights& weights, int class_id) {
  double acc = 0.0;
  for (int i = 0; i < weights.maps(); ++i) acc += static_cast<double>(weights.at(class_id, i)) * maps[i];
  return static_cast<float>(acc);
}

}  // namespace

Tensor3 compute_cam(const Tensor3& feature_maps, const ClassWeights& weights, int class_id) {
  check_class(weights, feature_maps.channels(), class_id);
  Tensor3 cam(feature_maps.height(), feature_maps.width(), 1);
  for (int y = 0; y < feature_maps.height(); ++y) {
    for (int x = 0; x < feature_maps.width(); ++x) {
      cam.at(y, x) = weighted_sum(feature_maps.pixel(y, x), weights, class_id);
    }
  }
  return cam;
}

Tensor1 compute_cam(const Tensor1& features, const ClassWeights& weights, int class_id) {
  check_class(weights, features.channels(), class_id);
  Tensor1 cam(features.length(), 1);
  for (int t = 0; t < features.length(); ++t) cam.at(t) = weighted_sum(features.step(t), weights, class_id);
  return cam;
}

void validate(const LocalizeConfig& cfg) {
  require(cfg.threshold_frac > 0.0 && cfg.threshold_frac <= 1.0, "threshold fraction tau must lie in (0, 1]");
  require(cfg.connectivity == 4 || cfg.connectivity == 8, "connectivity must be 4 or 8");
}

namespace {

double positive_threshold(std::span<const float> values, double threshold_frac) {
  require(threshold_frac > 0.0 && threshold_frac <= 1.0, "threshold fraction tau must lie in (0, 1]");
  const float peak = *std::ranges::max_element(values);
  if (!(peak > 0.0f)) throw ValidationError("no positive activation");
  return threshold_frac * static_cast<double>(peak);
}

}  // namespace

BinaryMap threshold_cam(const Tensor3& cam, double threshold_frac) {
  require(cam.channels() == 1, "CAM must have a single channel");
  const double thr = positive_threshold(cam.data(), threshold_frac);
  BinaryMap map{cam.height(), cam.width(), std::vector<std::uint8_t>(cam.size())};
  for (std::size_t i = 0; i < cam.size(); ++i) map.fg[i] = static_cast<double>(cam.data()[i]) >= thr ? 1 : 0;
  return map;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;

  int make() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Labeling connected_components(const BinaryMap& map, int connectivity) {
  require(connectivity == 4 || connectivity == 8, "connectivity must be 4 or 8");
  require(map.fg.size() == static_cast<std::size_t>(map.height) * map.width, "binary map size mismatch");
  const int h = map.height;
  const int w = map.width;
  Labeling out{h, w, std::vector<int>(map.fg.size(), -1), {}};

  // First pass: provisional labels from the already-visited neighbours
  // (W, NW, N, NE), merged through a disjoint set.
  DisjointSet sets;
  auto& labels = out.labels;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!map.at(y, x)) continue;
      int label = -1;
      auto visit = [&](int ny, int nx) {
        if (ny < 0 || nx < 0 || nx >= w) return;
        const int other = labels[static_cast<std::size_t>(ny) * w + nx];
        if (other < 0) return;
        if (label < 0) {
          label = other;
        } else {
          sets.unite(label, other);
        }
      };
      visit(y, x - 1);
      visit(y - 1, x);
      if (connectivity == 8) {
        visit(y - 1, x - 1);
        visit(y - 1, x + 1);
      }
      labels[static_cast<std::size_t>(y) * w + x] = label >= 0 ? label : sets.make();
    }
  }

  // Second pass: resolve roots and renumber in row-major order of first pixel.
  std::vector<int> final_id(sets.parent.size(), -1);
  struct Extent {
    int count, x0, y0, x1, y1, first;
  };
  std::vector<Extent> extents;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (labels[i] < 0) continue;
      const int root = sets.find(labels[i]);
      if (final_id[root] < 0) {
        final_id[root] = static_cast<int>(extents.size());
        extents.push_back({0, x, y, x + 1, y + 1, static_cast<int>(i)});
      }
      const int id = final_id[root];
      labels[i] = id;
      auto& e = extents[id];
      ++e.count;
      e.x0 = std::min(e.x0, x);
      e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x + 1);
      e.y1 = std::max(e.y1, y + 1);
    }
  }
  out.components.reserve(extents.size());
  for (const auto& e : extents) out.components.push_back({e.count, BBox(e.x0, e.y0, e.x1, e.y1), e.first});
  return out;
}

BBox largest_component_bbox(const Tensor3& cam, const LocalizeConfig& cfg) {
  validate(cfg);
  const auto labeling = connected_components(threshold_cam(cam, cfg.threshold_frac), cfg.connectivity);
  if (labeling.components.empty()) throw ValidationError("empty foreground");
  const Component* best = &labeling.components.front();
  for (const auto& comp : labeling.components) {
    if (comp.pixel_count > best->pixel_count) best = &comp;
  }
  return best->extent;
}

std::vector<ScoredInterval> localize_segments(const Tensor1& cam, double threshold_frac) {
  require(cam.channels() == 1, "temporal CAM must have a single channel");
  const double thr = positive_threshold(cam.data(), threshold_frac);
  std::vector<ScoredInterval> out;
  int t = 0;
  const int len = cam.length();
  while (t < len) {
    if (static_cast<double>(cam.at(t)) < thr) {
      ++t;
      continue;
    }
    const int start = t;
    double sum = 0.0;
    while (t < len && static_cast<double>(cam.at(t)) >= thr) sum += cam.at(t++);
    out.push_back({Interval(start, t), sum / (t - start)});
  }
  return out;
}

}  // namespace has
