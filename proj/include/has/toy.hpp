#pragma once

// Desk-scale demonstration: a single 5x5 conv layer (8 maps, ReLU), global
// pooling and a 2-way linear classifier trained from scratch on synthetic
// two-blob images, with or without patch hiding.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "has/cam.hpp"
#include "has/geometry.hpp"
#include "has/metrics.hpp"
#include "has/rng.hpp"
#include "has/tensor.hpp"

namespace has::toy {

inline constexpr int kImageSide = 32;
inline constexpr int kKernel = 5;
inline constexpr int kFilters = 8;
inline constexpr int kClasses = 2;
inline constexpr int kMapSide = kImageSide - kKernel + 1;  // 28

// Flat parameter layout: conv weights [filter][dy][dx], classifier [class][filter], biases [class].
inline constexpr int kConvOffset = 0;
inline constexpr int kClassifierOffset = kFilters * kKernel * kKernel;
inline constexpr int kBiasOffset = kClassifierOffset + kClasses * kFilters;
inline constexpr int kParamCount = kBiasOffset + kClasses;

/// Synthetic two-class images. Each image holds a primary blob whose solid
/// intensity (+A for class 0, -A for class 1) identifies the class, and a
/// weaker zero-mean textured secondary blob (checkerboard for class 0,
/// horizontal stripes for class 1) that agrees with the label with
/// probability `secondary_agreement`. The blobs sit side by side; the
/// ground-truth box covers both.
struct SyntheticSpec {
  int blob = 6;
  float noise_amplitude = 0.1f;
  float primary_amplitude = 1.0f;
  float secondary_amplitude = 0.5f;
  double secondary_agreement = 1.0;
  int max_gap = 2;
};

struct Sample {
  Tensor3 image;
  int label;
  BBox gt_box;
  BBox primary;
  BBox secondary;
};

/// Labels alternate 0, 1, 0, ... ; sample i is drawn from key.child(i).
std::vector<Sample> generate_dataset(const SyntheticSpec& spec, int n, const RngKey& key);

enum class Pooling { Average, Max };

const char* to_string(Pooling p);

struct ToyModel {
  Pooling pooling = Pooling::Average;
  std::vector<float> params = std::vector<float>(kParamCount, 0.0f);

  float conv_weight(int f, int dy, int dx) const { return params[kConvOffset + (f * kKernel + dy) * kKernel + dx]; }
  float classifier(int c, int f) const { return params[kClassifierOffset + c * kFilters + f]; }
  float bias(int c) const { return params[kBiasOffset + c]; }
  ClassWeights class_weights() const;

  /// Uniform fan-in initialization: conv U(+-1/5), classifier and bias U(+-1/sqrt(8)).
  static ToyModel initialize(Pooling pooling, const RngKey& key);
};

struct ForwardResult {
  std::array<float, kClasses> scores;
  /// 28 x 28 x 8 post-ReLU maps.
  Tensor3 feature_maps;
};

ForwardResult forward(const ToyModel& model, const Tensor3& image);
int predict(const std::array<float, kClasses>& scores);

/// Mean softmax cross-entropy over the batch. When `grad` is non-empty it
/// receives the mean gradient (kParamCount entries). Computed in double.
double loss_and_gradient(Pooling pooling, std::span<const double> params, std::span<const Tensor3> images,
                         std::span<const int> labels, std::span<double> grad = {});

struct HideSettings {
  int patch_size = 8;
  double p_hide = 0.5;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  /// Cosine decay of the learning rate to zero over all epochs.
  bool cosine_schedule = true;
  /// Hiding applied to training images only; fill = dataset mean of `data`.
  std::optional<HideSettings> hide;
  std::uint64_t seed = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  ToyModel model;
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;
  std::vector<float> fill;
};

/// SGD with momentum on softmax cross-entropy. Each epoch shuffles with a
/// seed-derived stream; with hiding on, sample i in epoch e is hidden with
/// derive_stream(seed, i, e). Throws TrainingError if the loss goes NaN.
TrainResult train(ToyModel model, std::span<const Sample> data, const TrainConfig& cfg,
                  const std::function<void(int epoch, const ToyModel&)>& on_epoch = {});

/// Nearest-neighbour resize of a single-channel map: out(y, x) = in(floor(y*h/H), floor(x*w/W)).
Tensor3 upscale_nearest(const Tensor3& map, int height, int width);

struct LocalizationResult {
  double gt_known_loc = 0.0;
  double top1_loc = 0.0;
  double accuracy = 0.0;
  std::vector<EvalRecord> records;
};

/// CAM source: the class activation map for (sample, class). Maps smaller than
/// the image are upscaled by nearest neighbour before localization.
using CamProvider = std::function<Tensor3(const Sample&, int class_id)>;

/// Box for one CAM, or nullopt when the CAM has no positive activation.
std::optional<BBox> localize_cam(const Tensor3& cam, int image_height, int image_width, const LocalizeConfig& cfg);

LocalizationResult evaluate_cams(std::span<const Sample> data, const CamProvider& cams,
                                 const std::function<int(const Sample&)>& classify, const LocalizeConfig& cfg,
                                 const EvalConfig& eval = {});

/// CAMs from the model's classifier rows (no hiding at test time).
LocalizationResult evaluate_localization(const ToyModel& model, std::span<const Sample> data,
                                         const LocalizeConfig& cfg = {}, const EvalConfig& eval = {});

struct DemoConfig {
  SyntheticSpec data;
  int n_train = 2000;
  int n_test = 1000;
  TrainConfig train;
  Pooling pooling = Pooling::Average;
  LocalizeConfig localize;
};

struct DemoRow {
  std::uint64_t seed = 0;
  bool hide = false;
  double p_hide = 0.0;
  double gt_known_loc = 0.0;
  double top1_loc = 0.0;
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
};

struct DemoRun {
  DemoRow row;
  ToyModel model;
  std::vector<Sample> test;
};

/// Generates train/test data for `seed`, trains and evaluates one arm.
DemoRun run_demo_seed(const DemoConfig& cfg, std::uint64_t seed);

}  // namespace has::toy
