#pragma once

#include <string>

namespace has {

/// Half-open pixel box: covers x0 <= x < x1, y0 <= y < y1. Never empty.
class BBox {
 public:
  BBox(int x0, int y0, int x1, int y1);

  int x0() const { return x0_; }
  int y0() const { return y0_; }
  int x1() const { return x1_; }
  int y1() const { return y1_; }
  int width() const { return x1_ - x0_; }
  int height() const { return y1_ - y0_; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool contains(int x, int y) const { return x >= x0_ && x < x1_ && y >= y0_ && y < y1_; }

  std::string to_string() const;
  bool operator==(const BBox&) const = default;

 private:
  int x0_, y0_, x1_, y1_;
};

/// Half-open index range t0 <= t < t1. Never empty.
class Interval {
 public:
  Interval(int t0, int t1);

  int t0() const { return t0_; }
  int t1() const { return t1_; }
  int length() const { return t1_ - t0_; }

  bool operator==(const Interval&) const = default;

 private:
  int t0_, t1_;
};

double iou(const BBox& a, const BBox& b);
double iou(const Interval& a, const Interval& b);

}  // namespace has
