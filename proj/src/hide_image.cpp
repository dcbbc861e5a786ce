#include "has/hide_image.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "has/error.hpp"

namespace has {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void check_probability(double p, const char* name) {
  require(p >= 0.0 && p <= 1.0, std::string(name) + " must lie in [0, 1]");
}

void check_fill(const std::vector<float>& fill, int channels) {
  require(static_cast<int>(fill.size()) == channels,
          "fill has " + std::to_string(fill.size()) + " channels, image has " + std::to_string(channels));
  for (float v : fill) require(std::isfinite(v), "fill values must be finite");
}

void check_patch_size(int height, int width, int size, bool allow_partial_edge) {
  require(size > 0, "patch size must be positive");
  require(size <= std::min(height, width),
          "patch size " + std::to_string(size) + " exceeds image side " + std::to_string(std::min(height, width)));
  if (!allow_partial_edge) {
    require(height % size == 0 && width % size == 0,
            "patch size " + std::to_string(size) + " does not divide " + std::to_string(height) + "x" +
                std::to_string(width) + " (enable partial edges to allow this)");
  }
}

void fill_pixel(Tensor3& t, int y, int x, const std::vector<float>& fill) {
  auto px = t.pixel(y, x);
  std::copy(fill.begin(), fill.end(), px.begin());
}

}  // namespace

HideMask::HideMask(int image_height, int image_width, int patch_size, std::vector<std::uint8_t> cells)
    : image_height_(image_height), image_width_(image_width), patch_size_(patch_size) {
  require(image_height > 0 && image_width > 0 && patch_size > 0, "mask dimensions must be positive");
  rows_ = ceil_div(image_height, patch_size);
  cols_ = ceil_div(image_width, patch_size);
  require(cells.size() == static_cast<std::size_t>(rows_) * cols_, "mask cell count does not match grid");
  cells_ = std::move(cells);
}

int HideMask::hidden_count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](std::uint8_t v) { return v != 0; }));
}

HideMask sample_mask(int height, int width, const HideConfig& cfg, const RngKey& key) {
  require(height > 0 && width > 0, "image dimensions must be positive");
  check_patch_size(height, width, cfg.patch_size, cfg.allow_partial_edge);
  check_probability(cfg.p_hide, "p_hide");
  const int rows = ceil_div(height, cfg.patch_size);
  const int cols = ceil_div(width, cfg.patch_size);
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(rows) * cols);
  Rng rng(key);
  for (auto& cell : cells) cell = rng.bernoulli(cfg.p_hide) ? 1 : 0;
  return HideMask(height, width, cfg.patch_size, std::move(cells));
}

Tensor3 apply_hide(const Tensor3& img, const HideMask& mask, const HideConfig& cfg) {
  require(mask.image_height() == img.height() && mask.image_width() == img.width(),
          "mask was sampled for a different image size");
  require(mask.patch_size() == cfg.patch_size, "mask patch size does not match config");
  check_fill(cfg.fill, img.channels());
  Tensor3 out = img;
  const int s = mask.patch_size();
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask.hidden(r, c)) continue;
      const int y_end = std::min(img.height(), (r + 1) * s);
      const int x_end = std::min(img.width(), (c + 1) * s);
      for (int y = r * s; y < y_end; ++y) {
        for (int x = c * s; x < x_end; ++x) fill_pixel(out, y, x, cfg.fill);
      }
    }
  }
  return out;
}

Tensor3 hide_patches(const Tensor3& img, const HideConfig& cfg, const RngKey& key) {
  check_fill(cfg.fill, img.channels());
  return apply_hide(img, sample_mask(img.height(), img.width(), cfg, key), cfg);
}

MixedHidePolicy MixedHidePolicy::default_224() { return {{16, 32, 44, 56, std::nullopt}, true}; }

MixedHidePolicy MixedHidePolicy::parse(std::string_view spec, bool allow_partial_edge) {
  MixedHidePolicy policy{{}, allow_partial_edge};
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    std::string_view item = spec.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "none") {
      policy.choices.emplace_back(std::nullopt);
    } else {
      int size = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), size);
      require(ec == std::errc() && ptr == item.data() + item.size() && size > 0,
              "bad mixed-policy entry '" + std::string(item) + "'");
      policy.choices.emplace_back(size);
    }
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  require(!policy.choices.empty(), "mixed policy must not be empty");
  return policy;
}

std::size_t mixed_choice(const MixedHidePolicy& policy, const RngKey& key) {
  require(!policy.choices.empty(), "mixed policy must not be empty");
  Rng rng(key);
  return static_cast<std::size_t>(rng.uniform_index(policy.choices.size()));
}

Tensor3 hide_mixed(const Tensor3& img, const MixedHidePolicy& policy, double p_hide,
                   const std::vector<float>& fill, const RngKey& key) {
  require(!policy.choices.empty(), "mixed policy must not be empty");
  for (const auto& choice : policy.choices) {
    if (choice) check_patch_size(img.height(), img.width(), *choice, policy.allow_partial_edge);
  }
  check_probability(p_hide, "p_hide");
  check_fill(fill, img.channels());
  const auto& choice = policy.choices[mixed_choice(policy, key)];
  if (!choice) return img;
  HideConfig cfg{*choice, p_hide, fill, policy.allow_partial_edge};
  return hide_patches(img, cfg, key.child(1));
}

Tensor3 hide_feature_map(const Tensor3& fm, int patch_size, double p_hide, float fill, const RngKey& key) {
  HideConfig cfg{patch_size, p_hide, std::vector<float>(static_cast<std::size_t>(fm.channels()), fill), true};
  return hide_patches(fm, cfg, key);
}

std::optional<EraseRect> sample_erase_rect(int height, int width, std::pair<double, double> area_range,
                                           std::pair<double, double> aspect_range, const RngKey& key) {
  require(height > 0 && width > 0, "image dimensions must be positive");
  require(area_range.first > 0.0 && area_range.first <= area_range.second && area_range.second <= 1.0,
          "area fraction range must satisfy 0 < lo <= hi <= 1");
  require(aspect_range.first > 0.0 && aspect_range.first <= aspect_range.second && std::isfinite(aspect_range.second),
          "aspect range must satisfy 0 < lo <= hi");
  Rng rng(key);
  const double total = static_cast<double>(height) * width;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double frac = rng.uniform(area_range.first, area_range.second);
    const double aspect = rng.uniform(aspect_range.first, aspect_range.second);
    const double target = frac * total;
    const int h = static_cast<int>(std::floor(std::sqrt(target * aspect) + 0.5));
    const int w = static_cast<int>(std::floor(std::sqrt(target / aspect) + 0.5));
    if (h < 1 || w < 1 || h > height || w > width) continue;
    const int y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height - h + 1)));
    const int x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width - w + 1)));
    return EraseRect{BBox(x0, y0, x0 + w, y0 + h), frac};
  }
  return std::nullopt;
}

Tensor3 random_erase(const Tensor3& img, std::pair<double, double> area_range,
                     std::pair<double, double> aspect_range, const std::vector<float>& fill, const RngKey& key) {
  check_fill(fill, img.channels());
  const auto pick = sample_erase_rect(img.height(), img.width(), area_range, aspect_range, key);
  if (!pick) return img;
  Tensor3 out = img;
  for (int y = pick->rect.y0(); y < pick->rect.y1(); ++y) {
    for (int x = pick->rect.x0(); x < pick->rect.x1(); ++x) fill_pixel(out, y, x, fill);
  }
  return out;
}

Tensor3 pixel_dropout(const Tensor3& img, double rate, const std::vector<float>& fill, const RngKey& key) {
  check_probability(rate, "dropout rate");
  check_fill(fill, img.channels());
  Tensor3 out = img;
  Rng rng(key);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (rng.bernoulli(rate)) fill_pixel(out, y, x, fill);
    }
  }
  return out;
}

}  // namespace has
