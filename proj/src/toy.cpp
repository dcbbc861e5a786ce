#include "has/toy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "has/error.hpp"
#include "has/hide_image.hpp"
#include "has/stats.hpp"

namespace has::toy {

namespace {

constexpr int kTaps = kKernel * kKernel;
constexpr int kPositions = kMapSide * kMapSide;

float primary_texture(int label, int, int) { return label == 0 ? 1.0f : -1.0f; }

float secondary_texture(int label, int y, int x) {
  if (label == 0) return (x + y) % 2 == 0 ? 1.0f : -1.0f;
  return y % 2 == 0 ? 1.0f : -1.0f;
}

void paint(Tensor3& img, const BBox& box, float amplitude, int label, float (*texture)(int, int, int)) {
  for (int y = box.y0(); y < box.y1(); ++y) {
    for (int x = box.x0(); x < box.x1(); ++x) {
      img.at(y, x) += amplitude * texture(label, y - box.y0(), x - box.x0());
    }
  }
}

}  // namespace

std::vector<Sample> generate_dataset(const SyntheticSpec& spec, int n, const RngKey& key) {
  require(n >= 1, "dataset size must be at least 1");
  require(spec.blob >= 1 && spec.max_gap >= 0 && 2 * spec.blob + spec.max_gap <= kImageSide,
          "blobs do not fit in the image");
  require(spec.secondary_agreement >= 0.0 && spec.secondary_agreement <= 1.0,
          "secondary agreement must lie in [0, 1]");
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(key.child(static_cast<std::uint64_t>(i)));
    const int label = i % 2;
    Tensor3 img(kImageSide, kImageSide, 1);
    for (float& v : img.data()) {
      v = static_cast<float>(rng.uniform(-spec.noise_amplitude, spec.noise_amplitude));
    }
    const bool side_by_side = rng.bernoulli(0.5);
    const int gap = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.max_gap + 1)));
    const int span = 2 * spec.blob + gap;
    const int w = side_by_side ? span : spec.blob;
    const int h = side_by_side ? spec.blob : span;
    const int x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(kImageSide - w + 1)));
    const int y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(kImageSide - h + 1)));
    const bool primary_first = rng.bernoulli(0.5);
    const int secondary_label = rng.bernoulli(spec.secondary_agreement) ? label : 1 - label;

    const BBox first(x0, y0, x0 + spec.blob, y0 + spec.blob);
    const int offset = spec.blob + gap;
    const BBox second = side_by_side ? BBox(x0 + offset, y0, x0 + offset + spec.blob, y0 + spec.blob)
                                     : BBox(x0, y0 + offset, x0 + spec.blob, y0 + offset + spec.blob);
    const BBox& primary = primary_first ? first : second;
    const BBox& secondary = primary_first ? second : first;
    paint(img, primary, spec.primary_amplitude, label, primary_texture);
    paint(img, secondary, spec.secondary_amplitude, secondary_label, secondary_texture);
    out.push_back(Sample{std::move(img), label, BBox(x0, y0, x0 + w, y0 + h), primary, secondary});
  }
  return out;
}

const char* to_string(Pooling p) { return p == Pooling::Average ? "gap" : "gmp"; }

ClassWeights ToyModel::class_weights() const {
  return ClassWeights(kClasses, kFilters,
                      std::vector<float>(params.begin() + kClassifierOffset, params.begin() + kBiasOffset));
}

ToyModel ToyModel::initialize(Pooling pooling, const RngKey& key) {
  ToyModel m;
  m.pooling = pooling;
  Rng rng(key);
  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(kTaps));
  const double fc_bound = 1.0 / std::sqrt(static_cast<double>(kFilters));
  for (int i = 0; i < kParamCount; ++i) {
    const double b = i < kClassifierOffset ? conv_bound : fc_bound;
    m.params[static_cast<std::size_t>(i)] = static_cast<float>(rng.uniform(-b, b));
  }
  return m;
}

namespace {

// Forward/backward for one image, templated so training runs in float and
// the gradient check runs in double through the same code.
template <class T>
class Net {
 public:
  Net(Pooling pooling, std::span<const T> params) { load(pooling, params); }

  void load(Pooling pooling, std::span<const T> params) {
    pooling_ = pooling;
    for (int f = 0; f < kFilters; ++f) {
      for (int t = 0; t < kTaps; ++t) taps_[t * kFilters + f] = params[kConvOffset + f * kTaps + t];
    }
    std::copy_n(params.begin() + kClassifierOffset, kClasses * kFilters, cls_.begin());
    std::copy_n(params.begin() + kBiasOffset, kClasses, bias_.begin());
  }

  /// Runs the forward pass, leaving activations in act_ and scores in scores_.
  void run(const Tensor3& image) {
    require(image.height() == kImageSide && image.width() == kImageSide && image.channels() == 1,
            "toy model expects a 32x32x1 image");
    const float* src = image.data().data();
    for (int y = 0; y < kMapSide; ++y) {
      for (int x = 0; x < kMapSide; ++x) {
        T acc[kFilters] = {};
        for (int dy = 0; dy < kKernel; ++dy) {
          const float* row = src + (y + dy) * kImageSide + x;
          for (int dx = 0; dx < kKernel; ++dx) {
            const T v = row[dx];
            const T* w = &taps_[(dy * kKernel + dx) * kFilters];
            for (int f = 0; f < kFilters; ++f) acc[f] += v * w[f];
          }
        }
        T* out = &act_[(y * kMapSide + x) * kFilters];
        for (int f = 0; f < kFilters; ++f) out[f] = acc[f] > T(0) ? acc[f] : T(0);
      }
    }
    for (int f = 0; f < kFilters; ++f) {
      if (pooling_ == Pooling::Average) {
        T sum = 0;
        for (int p = 0; p < kPositions; ++p) sum += act_[p * kFilters + f];
        pooled_[f] = sum / T(kPositions);
      } else {
        int best = 0;
        for (int p = 1; p < kPositions; ++p) {
          if (act_[p * kFilters + f] > act_[best * kFilters + f]) best = p;
        }
        argmax_[f] = best;
        pooled_[f] = act_[best * kFilters + f];
      }
    }
    for (int c = 0; c < kClasses; ++c) {
      T s = bias_[c];
      for (int f = 0; f < kFilters; ++f) s += cls_[c * kFilters + f] * pooled_[f];
      scores_[c] = s;
    }
  }

  /// Cross-entropy of the last forward pass; adds d(loss)/d(params) to grad if given.
  T loss(const Tensor3& image, int label, T* grad) {
    const T peak = std::max(scores_[0], scores_[1]);
    T denom = 0;
    T prob[kClasses];
    for (int c = 0; c < kClasses; ++c) {
      prob[c] = std::exp(scores_[c] - peak);
      denom += prob[c];
    }
    const T loss_value = std::log(denom) + peak - scores_[label];
    if (grad == nullptr) return loss_value;

    T dscore[kClasses];
    for (int c = 0; c < kClasses; ++c) dscore[c] = prob[c] / denom - (c == label ? T(1) : T(0));
    T dpool[kFilters] = {};
    for (int c = 0; c < kClasses; ++c) {
      grad[kBiasOffset + c] += dscore[c];
      for (int f = 0; f < kFilters; ++f) {
        grad[kClassifierOffset + c * kFilters + f] += dscore[c] * pooled_[f];
        dpool[f] += dscore[c] * cls_[c * kFilters + f];
      }
    }

    const float* src = image.data().data();
    if (pooling_ == Pooling::Average) {
      // Sum the input patches seen by each filter's active positions.
      T patch_sum[kTaps * kFilters] = {};
      for (int y = 0; y < kMapSide; ++y) {
        for (int x = 0; x < kMapSide; ++x) {
          const T* a = &act_[(y * kMapSide + x) * kFilters];
          T on[kFilters];
          for (int f = 0; f < kFilters; ++f) on[f] = a[f] > T(0) ? T(1) : T(0);
          for (int dy = 0; dy < kKernel; ++dy) {
            const float* row = src + (y + dy) * kImageSide + x;
            for (int dx = 0; dx < kKernel; ++dx) {
              const T v = row[dx];
              T* s = &patch_sum[(dy * kKernel + dx) * kFilters];
              for (int f = 0; f < kFilters; ++f) s[f] += on[f] * v;
            }
          }
        }
      }
      for (int f = 0; f < kFilters; ++f) {
        const T g = dpool[f] / T(kPositions);
        for (int t = 0; t < kTaps; ++t) grad[kConvOffset + f * kTaps + t] += g * patch_sum[t * kFilters + f];
      }
    } else {
      for (int f = 0; f < kFilters; ++f) {
        const int p = argmax_[f];
        if (!(act_[p * kFilters + f] > T(0))) continue;
        const int y = p / kMapSide;
        const int x = p % kMapSide;
        for (int dy = 0; dy < kKernel; ++dy) {
          for (int dx = 0; dx < kKernel; ++dx) {
            grad[kConvOffset + f * kTaps + dy * kKernel + dx] += dpool[f] * src[(y + dy) * kImageSide + x + dx];
          }
        }
      }
    }
    return loss_value;
  }

  const std::array<T, kClasses>& scores() const { return scores_; }
  const std::array<T, kPositions * kFilters>& activations() const { return act_; }

 private:
  Pooling pooling_ = Pooling::Average;
  std::array<T, kTaps * kFilters> taps_{};
  std::array<T, kClasses * kFilters> cls_{};
  std::array<T, kClasses> bias_{};
  std::array<T, kPositions * kFilters> act_{};
  std::array<T, kFilters> pooled_{};
  std::array<int, kFilters> argmax_{};
  std::array<T, kClasses> scores_{};
};

}  // namespace

ForwardResult forward(const ToyModel& model, const Tensor3& image) {
  require(model.params.size() == static_cast<std::size_t>(kParamCount), "model parameter count mismatch");
  auto net = std::make_unique<Net<float>>(model.pooling, std::span<const float>(model.params));
  net->run(image);
  const auto& act = net->activations();
  return ForwardResult{{net->scores()[0], net->scores()[1]},
                       Tensor3::from_data(kMapSide, kMapSide, kFilters, std::vector<float>(act.begin(), act.end()))};
}

int predict(const std::array<float, kClasses>& scores) { return scores[1] > scores[0] ? 1 : 0; }

double loss_and_gradient(Pooling pooling, std::span<const double> params, std::span<const Tensor3> images,
                         std::span<const int> labels, std::span<double> grad) {
  require(params.size() == static_cast<std::size_t>(kParamCount), "parameter count mismatch");
  require(images.size() == labels.size() && !images.empty(), "batch images and labels must match and be non-empty");
  require(grad.empty() || grad.size() == static_cast<std::size_t>(kParamCount), "gradient buffer size mismatch");
  std::ranges::fill(grad, 0.0);
  auto net = std::make_unique<Net<double>>(pooling, params);
  double total = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < kClasses, "label out of range");
    net->run(images[i]);
    total += net->loss(images[i], labels[i], grad.empty() ? nullptr : grad.data());
  }
  const double n = static_cast<double>(images.size());
  for (double& g : grad) g /= n;
  return total / n;
}

TrainResult train(ToyModel model, std::span<const Sample> data, const TrainConfig& cfg,
                  const std::function<void(int, const ToyModel&)>& on_epoch) {
  require(!data.empty(), "training set is empty");
  require(cfg.epochs > 0 && cfg.batch_size > 0, "epochs and batch size must be positive");
  require(cfg.learning_rate >= 0.0 && std::isfinite(cfg.learning_rate), "learning rate must be finite and >= 0");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "momentum must lie in [0, 1)");

  TrainResult result;
  DatasetMean mean(1);
  for (const auto& s : data) mean.accumulate(s.image);
  result.fill = mean.finalize();
  std::optional<HideConfig> hide;
  if (cfg.hide) {
    hide = HideConfig{cfg.hide->patch_size, cfg.hide->p_hide, result.fill, false};
    // Validate once up front instead of failing mid-epoch.
    (void)sample_mask(kImageSide, kImageSide, *hide, RngKey{});
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::vector<float> velocity(kParamCount, 0.0f);
  std::vector<float> grad(kParamCount);
  auto net = std::make_unique<Net<float>>(model.pooling, std::span<const float>(model.params));
  const RngKey shuffle_key = RngKey{cfg.seed, 0}.child(0x5348554646ULL);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle(shuffle_key.child(static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle.uniform_index(i + 1)]);

    const double lr = cfg.cosine_schedule
                          ? cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs))
                          : cfg.learning_rate;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::ranges::fill(grad, 0.0f);
      net->load(model.pooling, std::span<const float>(model.params));
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const Sample& s = data[idx];
        if (hide) {
          const Tensor3 hidden = hide_patches(s.image, *hide, derive_stream(cfg.seed, idx, static_cast<std::uint64_t>(epoch)));
          net->run(hidden);
          loss_sum += net->loss(hidden, s.label, grad.data());
        } else {
          net->run(s.image);
          loss_sum += net->loss(s.image, s.label, grad.data());
        }
        correct += static_cast<std::size_t>(predict({net->scores()[0], net->scores()[1]}) == s.label);
      }
      const float scale = 1.0f / static_cast<float>(end - start);
      const auto lr_f = static_cast<float>(lr);
      const auto mom = static_cast<float>(cfg.momentum);
      for (int p = 0; p < kParamCount; ++p) {
        velocity[p] = mom * velocity[p] - lr_f * grad[p] * scale;
        model.params[p] += velocity[p];
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " (loss is not finite)");
    }
    result.epoch_loss.push_back(epoch_loss);
    result.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, model);
  }
  result.model = std::move(model);
  return result;
}

Tensor3 upscale_nearest(const Tensor3& map, int height, int width) {
  require(map.channels() == 1, "upscale expects a single-channel map");
  require(height > 0 && width > 0, "target size must be positive");
  Tensor3 out(height, width, 1);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * map.height() / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * map.width() / width);
      out.at(y, x) = map.at(sy, sx);
    }
  }
  return out;
}

std::optional<BBox> localize_cam(const Tensor3& cam, int image_height, int image_width, const LocalizeConfig& cfg) {
  const Tensor3 full = (cam.height() == image_height && cam.width() == image_width)
                           ? cam
                           : upscale_nearest(cam, image_height, image_width);
  const float peak = *std::ranges::max_element(full.data());
  if (!(peak > 0.0f)) return std::nullopt;
  return largest_component_bbox(full, cfg);
}

LocalizationResult evaluate_cams(std::span<const Sample> data, const CamProvider& cams,
                                 const std::function<int(const Sample&)>& classify, const LocalizeConfig& cfg,
                                 const EvalConfig& eval) {
  validate(cfg);
  LocalizationResult result;
  std::size_t correct = 0;
  result.records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample& s = data[i];
    const int pred = classify(s);
    correct += static_cast<std::size_t>(pred == s.label);
    EvalRecord rec{std::to_string(i), s.label, {s.gt_box}, pred, std::nullopt, std::nullopt};
    rec.box_for_gt_class = localize_cam(cams(s, s.label), s.image.height(), s.image.width(), cfg);
    rec.box_for_pred_class = pred == s.label
                                 ? rec.box_for_gt_class
                                 : localize_cam(cams(s, pred), s.image.height(), s.image.width(), cfg);
    result.records.push_back(std::move(rec));
  }
  result.gt_known_loc = gt_known_loc(result.records, eval);
  result.top1_loc = top1_loc(result.records, eval);
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

LocalizationResult evaluate_localization(const ToyModel& model, std::span<const Sample> data,
                                         const LocalizeConfig& cfg, const EvalConfig& eval) {
  const ClassWeights weights = model.class_weights();
  // One forward pass per sample, reused by the classifier and CAM callbacks.
  const Sample* cached_for = nullptr;
  std::optional<ForwardResult> cached;
  auto run = [&](const Sample& s) -> const ForwardResult& {
    if (cached_for != &s) {
      cached = forward(model, s.image);
      cached_for = &s;
    }
    return *cached;
  };
  return evaluate_cams(
      data, [&](const Sample& s, int c) { return compute_cam(run(s).feature_maps, weights, c); },
      [&](const Sample& s) { return predict(run(s).scores); }, cfg, eval);
}

DemoRun run_demo_seed(const DemoConfig& cfg, std::uint64_t seed) {
  const RngKey root{seed, 0};
  auto train_set = generate_dataset(cfg.data, cfg.n_train, root.child(1));
  auto test_set = generate_dataset(cfg.data, cfg.n_test, root.child(2));
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const ToyModel init = ToyModel::initialize(cfg.pooling, root.child(3));
  TrainResult trained = train(init, train_set, tc);
  const LocalizationResult loc = evaluate_localization(trained.model, test_set, cfg.localize);

  DemoRun run{DemoRow{}, std::move(trained.model), std::move(test_set)};
  run.row.seed = seed;
  run.row.hide = tc.hide.has_value();
  run.row.p_hide = tc.hide ? tc.hide->p_hide : 0.0;
  run.row.gt_known_loc = loc.gt_known_loc;
  run.row.top1_loc = loc.top1_loc;
  run.row.test_accuracy = loc.accuracy;
  run.row.train_accuracy = trained.epoch_accuracy.back();
  run.row.final_loss = trained.epoch_loss.back();
  return run;
}

}  // namespace has::toy
