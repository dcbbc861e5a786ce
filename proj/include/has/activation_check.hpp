#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "has/hide_image.hpp"
#include "has/rng.hpp"
#include "has/tensor.hpp"

namespace has {

enum class PlacementCase : std::uint8_t { FullyVisible, FullyHidden, Partial };

const char* to_string(PlacementCase c);

/// K x K x C filter; tap (dy, dx) channel c is weights[(dy * K + dx) * C + c].
struct ConvFilter {
  int kernel = 1;
  int channels = 1;
  std::vector<float> weights;

  void validate() const;
  double tap_sum(std::span<const float> pixel_value) const;
};

/// Valid-placement case for every filter position, stride 1.
struct PlacementGrid {
  int rows = 0;
  int cols = 0;
  std::vector<PlacementCase> cases;

  PlacementCase at(int y, int x) const { return cases[static_cast<std::size_t>(y) * cols + x]; }
  std::size_t count(PlacementCase c) const;
};

PlacementGrid classify_placements(const HideMask& mask, int kernel);

/// Valid cross-correlation with stride 1 and a single output channel.
/// Accumulates in double and rounds once.
Tensor3 conv_forward(const Tensor3& img, const ConvFilter& filter);

/// |conv(all-fill patch) - sum_i w_i . v| divided by sum_i |w_i . v|
/// (0 when both sides are exactly zero).
double case2_exactness(const ConvFilter& filter, const std::vector<float>& fill);

/// Pixels drawn i.i.d. per channel from U[mean - half_width, mean + half_width].
struct PixelDistribution {
  std::vector<float> mean;
  std::vector<float> half_width;
};

struct ExpectationConfig {
  int image_side = 32;
  int patch_size = 8;
  double p_hide = 0.5;
  std::vector<float> fill;
  /// Placements to collect from hidden images (and again from unhidden ones).
  std::int64_t n_samples = 100000;
  std::uint64_t seed = 0;
};

struct MomentSummary {
  std::int64_t count = 0;
  double mean = 0.0;
  /// Standard error of the mean; 0 with fewer than two samples.
  double stderr_mean = 0.0;
};

struct ExpectationReport {
  /// Indexed by PlacementCase.
  std::array<MomentSummary, 3> per_case;
  /// FullyHidden + Partial placements of hidden images.
  MomentSummary touched;
  MomentSummary hidden_images;
  MomentSummary unhidden_images;
  double analytic_mean = 0.0;  // sum_i w_i . mu
  double analytic_fill = 0.0;  // sum_i w_i . v
  double analytic_gap = 0.0;   // sum_i w_i . (v - mu)
  double difference = 0.0;     // hidden_images.mean - unhidden_images.mean
  /// |touched.mean - analytic_mean| <= 3 stderr (plus float rounding slack).
  bool touched_matches = false;
  /// |hidden_images.mean - analytic_mean| <= 3 stderr (plus slack).
  bool hidden_matches = false;
};

/// Monte-Carlo comparison of conv activations on hidden vs unhidden random
/// images. Placements are taken on a stride-K lattice so that, for i.i.d.
/// pixels, the sampled activations are independent and the standard errors
/// are honest.
ExpectationReport expectation_match(const ConvFilter& filter, const PixelDistribution& dist,
                                    const ExpectationConfig& cfg);

}  // namespace has
