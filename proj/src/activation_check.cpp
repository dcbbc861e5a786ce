#include "has/activation_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "has/error.hpp"

namespace has {

const char* to_string(PlacementCase c) {
  switch (c) {
    case PlacementCase::FullyVisible:
      return "fully_visible";
    case PlacementCase::FullyHidden:
      return "fully_hidden";
    case PlacementCase::Partial:
      return "partial";
  }
  return "unknown";
}

void ConvFilter::validate() const {
  require(kernel > 0 && channels > 0, "filter dimensions must be positive");
  require(weights.size() == static_cast<std::size_t>(kernel) * kernel * channels,
          "filter weight count must be K*K*C");
  for (float w : weights) require(std::isfinite(w), "filter weights must be finite");
}

double ConvFilter::tap_sum(std::span<const float> pixel_value) const {
  require(static_cast<int>(pixel_value.size()) == channels, "pixel value length must match filter channels");
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<double>(weights[i]) * pixel_value[i % static_cast<std::size_t>(channels)];
  }
  return acc;
}

std::size_t PlacementGrid::count(PlacementCase c) const { return static_cast<std::size_t>(std::ranges::count(cases, c)); }

PlacementGrid classify_placements(const HideMask& mask, int kernel) {
  const int h = mask.image_height();
  const int w = mask.image_width();
  require(kernel > 0 && kernel <= h && kernel <= w, "kernel size must fit inside the image");

  // Integral image of hidden pixels.
  std::vector<int> integral(static_cast<std::size_t>(h + 1) * (w + 1), 0);
  auto at = [&](int y, int x) -> int& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      at(y + 1, x + 1) = at(y, x + 1) + at(y + 1, x) - at(y, x) + (mask.pixel_hidden(y, x) ? 1 : 0);
    }
  }

  PlacementGrid grid{h - kernel + 1, w - kernel + 1, {}};
  grid.cases.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
  const int taps = kernel * kernel;
  for (int y = 0; y < grid.rows; ++y) {
    for (int x = 0; x < grid.cols; ++x) {
      const int hidden = at(y + kernel, x + kernel) - at(y, x + kernel) - at(y + kernel, x) + at(y, x);
      grid.cases.push_back(hidden == 0       ? PlacementCase::FullyVisible
                           : hidden == taps ? PlacementCase::FullyHidden
                                            : PlacementCase::Partial);
    }
  }
  return grid;
}

Tensor3 conv_forward(const Tensor3& img, const ConvFilter& filter) {
  filter.validate();
  require(filter.channels == img.channels(), "filter channels do not match image channels");
  const int k = filter.kernel;
  require(k <= img.height() && k <= img.width(), "kernel larger than image");
  Tensor3 out(img.height() - k + 1, img.width() - k + 1, 1);
  const int c = img.channels();
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      double acc = 0.0;
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          const auto px = img.pixel(y + dy, x + dx);
          const float* w = filter.weights.data() + static_cast<std::size_t>(dy * k + dx) * c;
          for (int ch = 0; ch < c; ++ch) acc += static_cast<double>(w[ch]) * px[ch];
        }
      }
      out.at(y, x) = static_cast<float>(acc);
    }
  }
  return out;
}

double case2_exactness(const ConvFilter& filter, const std::vector<float>& fill) {
  filter.validate();
  require(static_cast<int>(fill.size()) == filter.channels, "fill length must match filter channels");
  Tensor3 patch(filter.kernel, filter.kernel, filter.channels);
  for (int y = 0; y < filter.kernel; ++y) {
    for (int x = 0; x < filter.kernel; ++x) std::ranges::copy(fill, patch.pixel(y, x).begin());
  }
  const double conv = conv_forward(patch, filter).at(0, 0);
  const double analytic = filter.tap_sum(fill);
  double scale = 0.0;
  for (std::size_t i = 0; i < filter.weights.size(); ++i) {
    scale += std::abs(static_cast<double>(filter.weights[i]) * fill[i % fill.size()]);
  }
  const double diff = std::abs(conv - analytic);
  if (scale == 0.0) return diff;
  return diff / scale;
}

namespace {

class Moments {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  MomentSummary summary() const {
    MomentSummary s{n_, mean_, 0.0};
    if (n_ > 1) s.stderr_mean = std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
    return s;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

Tensor3 random_image(int side, const PixelDistribution& dist, Rng& rng) {
  const int c = static_cast<int>(dist.mean.size());
  Tensor3 img(side, side, c);
  auto data = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t ch = i % static_cast<std::size_t>(c);
    data[i] = static_cast<float>(rng.uniform(static_cast<double>(dist.mean[ch]) - dist.half_width[ch],
                                             static_cast<double>(dist.mean[ch]) + dist.half_width[ch]));
  }
  return img;
}

bool within(const MomentSummary& s, double target, double slack) {
  return std::abs(s.mean - target) <= 3.0 * s.stderr_mean + slack;
}

}  // namespace

ExpectationReport expectation_match(const ConvFilter& filter, const PixelDistribution& dist,
                                    const ExpectationConfig& cfg) {
  filter.validate();
  require(dist.mean.size() == static_cast<std::size_t>(filter.channels) && dist.half_width.size() == dist.mean.size(),
          "pixel distribution must have one mean and half-width per filter channel");
  for (float hw : dist.half_width) require(hw >= 0.0f && std::isfinite(hw), "half-widths must be finite and >= 0");
  require(cfg.n_samples >= 1, "need at least one sample");
  require(cfg.image_side >= filter.kernel, "image side must be at least the kernel size");
  require(static_cast<int>(cfg.fill.size()) == filter.channels, "fill length must match filter channels");

  const int k = filter.kernel;
  const HideConfig hide{cfg.patch_size, cfg.p_hide, cfg.fill, true};
  Moments cases[3];
  Moments touched;
  Moments hidden_all;
  Moments unhidden_all;

  Rng pixels(RngKey{cfg.seed, 0});
  std::uint64_t image_index = 0;
  while (hidden_all.summary().count < cfg.n_samples) {
    const Tensor3 img = random_image(cfg.image_side, dist, pixels);
    const HideMask mask = sample_mask(img.height(), img.width(), hide, derive_stream(cfg.seed, image_index, 0));
    ++image_index;
    const Tensor3 hidden_img = apply_hide(img, mask, hide);
    const Tensor3 act = conv_forward(hidden_img, filter);
    const PlacementGrid grid = classify_placements(mask, k);
    for (int y = 0; y + k <= cfg.image_side; y += k) {
      for (int x = 0; x + k <= cfg.image_side; x += k) {
        if (hidden_all.summary().count >= cfg.n_samples) break;
        const double v = act.at(y, x);
        const auto pc = grid.at(y, x);
        cases[static_cast<int>(pc)].add(v);
        if (pc != PlacementCase::FullyVisible) touched.add(v);
        hidden_all.add(v);
      }
    }
  }
  while (unhidden_all.summary().count < cfg.n_samples) {
    const Tensor3 act = conv_forward(random_image(cfg.image_side, dist, pixels), filter);
    for (int y = 0; y + k <= cfg.image_side; y += k) {
      for (int x = 0; x + k <= cfg.image_side; x += k) {
        if (unhidden_all.summary().count >= cfg.n_samples) break;
        unhidden_all.add(act.at(y, x));
      }
    }
  }

  ExpectationReport report;
  for (int i = 0; i < 3; ++i) report.per_case[i] = cases[i].summary();
  report.touched = touched.summary();
  report.hidden_images = hidden_all.summary();
  report.unhidden_images = unhidden_all.summary();
  report.analytic_mean = filter.tap_sum(dist.mean);
  report.analytic_fill = filter.tap_sum(cfg.fill);
  report.analytic_gap = report.analytic_fill - report.analytic_mean;
  report.difference = report.hidden_images.mean - report.unhidden_images.mean;

  // Each activation is rounded to float once; allow for that.
  double scale = 0.0;
  for (std::size_t i = 0; i < filter.weights.size(); ++i) {
    const std::size_t ch = i % dist.mean.size();
    scale += std::abs(static_cast<double>(filter.weights[i])) *
             (std::abs(static_cast<double>(dist.mean[ch])) + dist.half_width[ch] + std::abs(cfg.fill[ch]));
  }
  const double slack = 1e-6 * scale;
  report.touched_matches = report.touched.count == 0 || within(report.touched, report.analytic_mean, slack);
  report.hidden_matches = within(report.hidden_images, report.analytic_mean, slack);
  return report;
}

}  // namespace has
