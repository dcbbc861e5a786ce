#pragma once

#include <vector>

#include "has/rng.hpp"
#include "has/tensor.hpp"

namespace has {

struct TemporalHideConfig {
  int f_total = 2000;
  int f_segment = 100;
  double p_hide = 0.5;
  /// Dataset mean feature, one value per channel.
  std::vector<float> fill;
};

/// Nearest-lower sampling: output step i copies input step floor(i * T / f_total).
Tensor1 resample_uniform(const Tensor1& seq, int f_total);

/// Hides whole aligned segments [k*F_segment, (k+1)*F_segment), one
/// Bernoulli(p_hide) per segment in order.
Tensor1 hide_segments(const Tensor1& seq, const TemporalHideConfig& cfg, const RngKey& key);

/// Segment flags hide_segments would use; true = hidden.
std::vector<bool> sample_segment_mask(const TemporalHideConfig& cfg, const RngKey& key);

}  // namespace has
