#include <cmath>

#include "doctest.h"

#include "has/error.hpp"
#include "has/toy.hpp"
#include "oracles.hpp"

using namespace has;
using namespace has::toy;

namespace {

struct Batch {
  std::vector<Tensor3> images;
  std::vector<int> labels;
};

Batch batch_of(const std::vector<Sample>& data) {
  Batch b;
  for (const auto& s : data) {
    b.images.push_back(s.image);
    b.labels.push_back(s.label);
  }
  return b;
}

std::vector<double> as_double(const ToyModel& m) { return {m.params.begin(), m.params.end()}; }

}  // namespace

TEST_CASE("synthetic data: balance, boxes, determinism") {
  const auto two = generate_dataset({}, 2, RngKey{1, 1});
  CHECK(two[0].label != two[1].label);

  const auto data = generate_dataset({}, 301, RngKey{1, 2});
  int ones = 0;
  for (const auto& s : data) {
    ones += s.label;
    CHECK(s.image.height() == kImageSide);
    CHECK(s.image.channels() == 1);
    const BBox& g = s.gt_box;
    for (const BBox& b : {s.primary, s.secondary}) {
      CHECK(g.x0() <= b.x0());
      CHECK(g.y0() <= b.y0());
      CHECK(g.x1() >= b.x1());
      CHECK(g.y1() >= b.y1());
    }
    CHECK(iou(s.primary, s.secondary) == 0.0);
    CHECK(g.x1() <= kImageSide);
    CHECK(g.y1() <= kImageSide);
  }
  CHECK(std::abs(2 * ones - 301) <= 1);

  const auto again = generate_dataset({}, 301, RngKey{1, 2});
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(again[i].image == data[i].image);
  CHECK_THROWS_AS(generate_dataset({}, 0, RngKey{}), ValidationError);
}

TEST_CASE("synthetic data: primary blob carries the label") {
  const auto data = generate_dataset({}, 50, RngKey{4, 4});
  for (const auto& s : data) {
    double sum = 0;
    for (int y = s.primary.y0(); y < s.primary.y1(); ++y)
      for (int x = s.primary.x0(); x < s.primary.x1(); ++x) sum += s.image.at(y, x);
    CHECK((s.label == 0 ? sum > 0 : sum < 0));
  }
}

TEST_CASE("forward: zero weights give the biases") {
  ToyModel m;
  m.params[kBiasOffset] = 0.25f;
  m.params[kBiasOffset + 1] = -1.5f;
  const auto out = forward(m, generate_dataset({}, 1, RngKey{}).front().image);
  CHECK(out.scores[0] == 0.25f);
  CHECK(out.scores[1] == -1.5f);
  CHECK(out.feature_maps.height() == kMapSide);
  CHECK(out.feature_maps.channels() == kFilters);
}

TEST_CASE("forward: agrees with a naive loop") {
  const auto data = generate_dataset({}, 10, RngKey{6, 6});
  for (auto pool : {Pooling::Average, Pooling::Max}) {
    const auto m = ToyModel::initialize(pool, RngKey{6, 7});
    for (const auto& s : data) {
      const auto got = forward(m, s.image);
      const auto want = oracle::naive_forward(m, s.image);
      for (int c = 0; c < kClasses; ++c) CHECK(std::abs(got.scores[c] - want.scores[c]) <= 1e-5);
      for (std::size_t i = 0; i < want.maps.size(); ++i) CHECK(std::abs(got.feature_maps.data()[i] - want.maps[i]) <= 1e-5);
    }
  }
  CHECK_THROWS_AS(forward(ToyModel{}, Tensor3(31, 32, 1)), ValidationError);
}

TEST_CASE("forward: GAP and GMP agree on constant maps") {
  // Only the centre tap is non-zero, so a constant image gives constant maps.
  ToyModel gap;
  for (int f = 0; f < kFilters; ++f) gap.params[kConvOffset + (f * kKernel + 2) * kKernel + 2] = 0.1f * (f + 1);
  for (int i = kClassifierOffset; i < kParamCount; ++i) gap.params[i] = 0.05f * static_cast<float>(i - kClassifierOffset) - 0.3f;
  ToyModel gmp = gap;
  gmp.pooling = Pooling::Max;
  const Tensor3 img(kImageSide, kImageSide, 1, 0.7f);
  const auto a = forward(gap, img), b = forward(gmp, img);
  CHECK(a.scores[0] == doctest::Approx(b.scores[0]).epsilon(1e-6));
  CHECK(a.scores[1] == doctest::Approx(b.scores[1]).epsilon(1e-6));
  // GAP of a constant map is the map value.
  ToyModel probe = gap;
  std::fill(probe.params.begin() + kClassifierOffset, probe.params.end(), 0.0f);
  probe.params[kClassifierOffset + 2] = 1.0f;  // class 0 reads filter 2
  CHECK(forward(probe, img).scores[0] == doctest::Approx(0.3 * 0.7).epsilon(1e-6));
}

TEST_CASE("gradient: converges to central differences") {
  // Small steps keep the difference quotient away from ReLU kinks.
  const auto b = batch_of(generate_dataset({}, 8, RngKey{5, 1}));
  for (auto pool : {Pooling::Average, Pooling::Max}) {
    const auto m = ToyModel::initialize(pool, RngKey{5, 2});
    const auto g = oracle::gradient_check(pool, as_double(m), b.images, b.labels, 1e-6, 1e-8);
    CHECK_MESSAGE(g.worst_relative <= 1e-4, "param " << g.worst_index << " analytic " << g.analytic << " numeric "
                                                     << g.numeric);
  }
}

TEST_CASE("gradient: eps 1e-3 in a kink-free region") {
  // Positive images and positive conv weights keep every unit active, so the
  // GAP loss is smooth along every coordinate step. Max pooling is left out:
  // its argmax can switch under a step of this size.
  Rng r(RngKey{9, 9});
  Batch b;
  for (int i = 0; i < 4; ++i) {
    Tensor3 img(kImageSide, kImageSide, 1);
    for (float& v : img.data()) v = static_cast<float>(r.uniform(0.5, 1.5));
    b.images.push_back(img);
    b.labels.push_back(i % 2);
  }
  std::vector<double> p(kParamCount);
  for (int i = 0; i < kParamCount; ++i) p[i] = i < kClassifierOffset ? r.uniform(0.05, 0.2) : r.uniform(-1, 1);
  const auto g = oracle::gradient_check(Pooling::Average, p, b.images, b.labels, 1e-3, 0.0);
  CHECK_MESSAGE(g.worst_relative <= 1e-3, "param " << g.worst_index);
}

TEST_CASE("training: lr 0 keeps the parameters") {
  const auto data = generate_dataset({}, 64, RngKey{2, 2});
  const auto init = ToyModel::initialize(Pooling::Average, RngKey{2, 3});
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  CHECK(train(init, data, cfg).model.params == init.params);
}

TEST_CASE("training: p_hide 0 follows the baseline trajectory bit for bit") {
  const auto data = generate_dataset({}, 96, RngKey{3, 3});
  const auto init = ToyModel::initialize(Pooling::Average, RngKey{3, 4});
  TrainConfig base;
  base.epochs = 3;
  base.seed = 11;
  TrainConfig hidden = base;
  hidden.hide = HideSettings{8, 0.0};
  std::vector<std::vector<float>> a, b;
  train(init, data, base, [&](int, const ToyModel& m) { a.push_back(m.params); });
  train(init, data, hidden, [&](int, const ToyModel& m) { b.push_back(m.params); });
  REQUIRE(a.size() == 3);
  CHECK(a == b);
}

TEST_CASE("training: deterministic and validated") {
  const auto data = generate_dataset({}, 64, RngKey{3, 5});
  const auto init = ToyModel::initialize(Pooling::Max, RngKey{3, 6});
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hide = HideSettings{8, 0.5};
  CHECK(train(init, data, cfg).model.params == train(init, data, cfg).model.params);
  cfg.hide = HideSettings{7, 0.5};
  CHECK_THROWS_AS(train(init, data, cfg), ValidationError);
  cfg.hide.reset();
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(train(init, data, cfg), ValidationError);
  cfg.momentum = 0.9;
  cfg.learning_rate = 1e30;
  CHECK_THROWS_AS(train(init, data, cfg), TrainingError);
}

TEST_CASE("training: baseline reaches high train accuracy") {
  const auto data = generate_dataset({}, 2000, RngKey{1, 1});
  TrainConfig cfg;
  cfg.seed = 1;
  const auto result = train(ToyModel::initialize(Pooling::Average, RngKey{1, 3}), data, cfg);
  CHECK(result.epoch_loss.size() == 30);
  CHECK(result.epoch_accuracy.back() >= 0.95);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("upscale: nearest neighbour") {
  const auto m = Tensor3::from_data(2, 2, 1, {1, 2, 3, 4});
  CHECK(upscale_nearest(m, 4, 4) == Tensor3::from_data(4, 4, 1, {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4}));
  const auto up = upscale_nearest(Tensor3(kMapSide, kMapSide, 1, 1.0f), kImageSide, kImageSide);
  CHECK(up.height() == kImageSide);
}

TEST_CASE("localization: zero model and oracle CAM") {
  const auto data = generate_dataset({}, 40, RngKey{8, 8});
  CHECK(evaluate_localization(ToyModel{}, data).gt_known_loc == 0.0);

  auto indicator = [](const Sample& s, int) {
    Tensor3 cam(kImageSide, kImageSide, 1);
    for (int y = s.gt_box.y0(); y < s.gt_box.y1(); ++y)
      for (int x = s.gt_box.x0(); x < s.gt_box.x1(); ++x) cam.at(y, x) = 1.0f;
    return cam;
  };
  const auto perfect = evaluate_cams(data, indicator, [](const Sample& s) { return s.label; }, {});
  CHECK(perfect.gt_known_loc == 1.0);
  CHECK(perfect.top1_loc == 1.0);
  CHECK(perfect.accuracy == 1.0);
  const auto wrong = evaluate_cams(data, indicator, [](const Sample& s) { return 1 - s.label; }, {});
  CHECK(wrong.gt_known_loc == 1.0);
  CHECK(wrong.top1_loc == 0.0);
  CHECK(wrong.accuracy == 0.0);
}
