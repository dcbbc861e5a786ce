#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "has/geometry.hpp"
#include "has/rng.hpp"
#include "has/tensor.hpp"

namespace has {

struct HideConfig {
  int patch_size = 56;
  double p_hide = 0.5;
  /// Per-channel fill value, normally the dataset mean.
  std::vector<float> fill;
  /// Allow a patch size that does not divide H or W; trailing cells are then
  /// smaller rectangles.
  bool allow_partial_edge = false;
};

/// Hidden/visible flag per grid cell, row-major over ceil(H/S) x ceil(W/S).
class HideMask {
 public:
  HideMask(int image_height, int image_width, int patch_size, std::vector<std::uint8_t> cells);

  int image_height() const { return image_height_; }
  int image_width() const { return image_width_; }
  int patch_size() const { return patch_size_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }
  int hidden_count() const;

  bool hidden(int row, int col) const { return cells_[static_cast<std::size_t>(row) * cols_ + col] != 0; }
  /// Whether image pixel (y, x) falls inside a hidden cell.
  bool pixel_hidden(int y, int x) const { return hidden(y / patch_size_, x / patch_size_); }

  bool operator==(const HideMask&) const = default;

 private:
  int image_height_;
  int image_width_;
  int patch_size_;
  int rows_;
  int cols_;
  std::vector<std::uint8_t> cells_;
};

/// Draws one Bernoulli(p_hide) per cell in row-major order from `key`'s stream.
HideMask sample_mask(int height, int width, const HideConfig& cfg, const RngKey& key);

/// Copies `img` with every pixel of a hidden cell set to cfg.fill. No rescaling.
Tensor3 apply_hide(const Tensor3& img, const HideMask& mask, const HideConfig& cfg);

Tensor3 hide_patches(const Tensor3& img, const HideConfig& cfg, const RngKey& key);

/// Uniform choice over patch sizes, where std::nullopt means "no hiding".
struct MixedHidePolicy {
  std::vector<std::optional<int>> choices;
  bool allow_partial_edge = false;

  /// {16, 32, 44, 56, none}; 44 does not divide 224, so partial edges are on.
  static MixedHidePolicy default_224();
  /// Parses "16,32,44,56,none".
  static MixedHidePolicy parse(std::string_view spec, bool allow_partial_edge);
};

/// Index into policy.choices that hide_mixed would pick for `key`.
std::size_t mixed_choice(const MixedHidePolicy& policy, const RngKey& key);

/// One draw from `key` picks the size; the mask then comes from key.child(1).
Tensor3 hide_mixed(const Tensor3& img, const MixedHidePolicy& policy, double p_hide,
                   const std::vector<float>& fill, const RngKey& key);

/// Conv-layer variant: one 2D mask shared by every channel, partial edge
/// cells allowed, hidden cells set to `fill` in all channels.
Tensor3 hide_feature_map(const Tensor3& fm, int patch_size, double p_hide, float fill, const RngKey& key);

/// Rectangle chosen by random erasing, with the area fraction it was drawn for.
struct EraseRect {
  BBox rect;
  double area_fraction;
};

/// Up to 100 attempts: area fraction ~ U(area_range), aspect (h/w) ~ U(aspect_range),
/// h = round(sqrt(A * aspect)), w = round(sqrt(A / aspect)). nullopt when every
/// attempt fails to fit.
std::optional<EraseRect> sample_erase_rect(int height, int width, std::pair<double, double> area_range,
                                           std::pair<double, double> aspect_range, const RngKey& key);

/// Random Erasing baseline: fills the sampled rectangle, identity if none fits.
Tensor3 random_erase(const Tensor3& img, std::pair<double, double> area_range,
                     std::pair<double, double> aspect_range, const std::vector<float>& fill, const RngKey& key);

/// Pixel-level dropout baseline: each pixel replaced by `fill` with probability `rate`.
Tensor3 pixel_dropout(const Tensor3& img, double rate, const std::vector<float>& fill, const RngKey& key);

}  // namespace has
