#include "has/geometry.hpp"

#include <algorithm>

#include "has/error.hpp"

namespace has {

BBox::BBox(int x0, int y0, int x1, int y1) : x0_(x0), y0_(y0), x1_(x1), y1_(y1) {
  require(x0 >= 0 && y0 >= 0, "box coordinates must be non-negative: " + to_string());
  require(x0 < x1 && y0 < y1, "box must be non-empty: " + to_string());
}

std::string BBox::to_string() const {
  return "(" + std::to_string(x0_) + "," + std::to_string(y0_) + "," + std::to_string(x1_) + "," +
         std::to_string(y1_) + ")";
}

Interval::Interval(int t0, int t1) : t0_(t0), t1_(t1) {
  require(t0 >= 0, "interval start must be non-negative");
  require(t0 < t1, "interval must be non-empty: [" + std::to_string(t0) + "," + std::to_string(t1) + ")");
}

double iou(const BBox& a, const BBox& b) {
  const long long iw = std::max(0, std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
  const long long ih = std::max(0, std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const Interval& a, const Interval& b) {
  const long long inter = std::max(0, std::min(a.t1(), b.t1()) - std::max(a.t0(), b.t0()));
  const long long uni = static_cast<long long>(a.length()) + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace has
