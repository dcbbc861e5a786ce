#include "has/hide_temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "has/error.hpp"

namespace has {

namespace {

void check_config(const TemporalHideConfig& cfg) {
  require(cfg.f_total > 0, "F_total must be positive");
  require(cfg.f_segment > 0, "F_segment must be positive");
  require(cfg.f_total % cfg.f_segment == 0, "F_segment " + std::to_string(cfg.f_segment) +
                                                " does not divide F_total " + std::to_string(cfg.f_total));
  require(cfg.p_hide >= 0.0 && cfg.p_hide <= 1.0, "p_hide must lie in [0, 1]");
}

}  // namespace

Tensor1 resample_uniform(const Tensor1& seq, int f_total) {
  require(f_total > 0, "F_total must be positive");
  Tensor1 out(f_total, seq.channels());
  const auto len = static_cast<long long>(seq.length());
  for (int i = 0; i < f_total; ++i) {
    const auto src = static_cast<int>(static_cast<long long>(i) * len / f_total);
    std::ranges::copy(seq.step(src), out.step(i).begin());
  }
  return out;
}

std::vector<bool> sample_segment_mask(const TemporalHideConfig& cfg, const RngKey& key) {
  check_config(cfg);
  std::vector<bool> hidden(static_cast<std::size_t>(cfg.f_total / cfg.f_segment));
  Rng rng(key);
  for (std::size_t k = 0; k < hidden.size(); ++k) hidden[k] = rng.bernoulli(cfg.p_hide);
  return hidden;
}

Tensor1 hide_segments(const Tensor1& seq, const TemporalHideConfig& cfg, const RngKey& key) {
  check_config(cfg);
  require(seq.length() == cfg.f_total, "sequence length " + std::to_string(seq.length()) +
                                           " does not match F_total " + std::to_string(cfg.f_total));
  require(static_cast<int>(cfg.fill.size()) == seq.channels(), "fill length does not match feature channels");
  for (float v : cfg.fill) require(std::isfinite(v), "fill values must be finite");

  const auto hidden = sample_segment_mask(cfg, key);
  Tensor1 out = seq;
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    if (!hidden[k]) continue;
    const int begin = static_cast<int>(k) * cfg.f_segment;
    for (int t = begin; t < begin + cfg.f_segment; ++t) std::ranges::copy(cfg.fill, out.step(t).begin());
  }
  return out;
}

}  // namespace has
