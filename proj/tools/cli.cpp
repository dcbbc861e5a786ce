#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "has/activation_check.hpp"
#include "has/cam.hpp"
#include "has/error.hpp"
#include "has/hast_io.hpp"
#include "has/hide_image.hpp"
#include "has/hide_temporal.hpp"
#include "has/metrics.hpp"
#include "has/png_io.hpp"
#include "has/stats.hpp"
#include "has/toy.hpp"

namespace has::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

bool is_png(const fs::path& p) {
  auto ext = p.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

Tensor3 load_image(const fs::path& p) { return is_png(p) ? read_png(p) : read_tensor3(p); }

void save_image(const Tensor3& t, const fs::path& p) {
  if (is_png(p)) {
    write_png(t, p);
  } else {
    write_tensor(t, p);
  }
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw FormatError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

std::vector<json> read_json_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw FormatError("cannot open " + p.string());
  std::vector<json> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

template <class T>
T field(const json& row, const char* key, const std::string& where) {
  if (!row.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
  try {
    return row.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad \"" + key + "\": " + e.what());
  }
}

BBox box_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw FormatError(where + ": a box must be [x0, y0, x1, y1]");
  try {
    return BBox(j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>());
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

Interval interval_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw FormatError(where + ": an interval must be [t0, t1]");
  try {
    return Interval(j[0].get<int>(), j[1].get<int>());
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

json box_json(const BBox& b) { return json::array({b.x0(), b.y0(), b.x1(), b.y1()}); }

std::vector<float> load_mean(const fs::path& p) {
  const json j = read_json_file(p);
  auto mean = field<std::vector<float>>(j, "mean", p.string());
  const auto channels = field<int>(j, "channels", p.string());
  if (static_cast<int>(mean.size()) != channels) throw FormatError(p.string() + ": mean length != channels");
  return mean;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), "");
    } catch (const std::exception&) {
      throw ValidationError(flag + ": bad number '" + item + "'");
    }
  }
  require(!out.empty(), flag + ": empty list");
  return out;
}

void emit(const json& j, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + out_path + " for writing");
  f << j.dump(2) << '\n';
}

std::vector<float> resolve_fill(const std::string& mean_file, const std::string& fill_text, int channels) {
  std::vector<float> fill;
  if (!mean_file.empty()) {
    fill = load_mean(mean_file);
  } else {
    for (double v : parse_number_list(fill_text, "--fill")) fill.push_back(static_cast<float>(v));
    if (fill.size() == 1 && channels > 1) fill.assign(static_cast<std::size_t>(channels), fill[0]);
  }
  if (static_cast<int>(fill.size()) != channels) {
    throw ValidationError("fill has " + std::to_string(fill.size()) + " channels but the input has " +
                          std::to_string(channels));
  }
  return fill;
}

// ---------------------------------------------------------------- mean

struct MeanArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_mean(const MeanArgs& a, std::ostream& out) {
  std::optional<DatasetMean> acc;
  for (const auto& path : a.inputs) {
    const fs::path p(path);
    const bool png = is_png(p);
    if (png) {
      const Tensor3 t = read_png(p);
      if (!acc) acc.emplace(t.channels());
      acc->accumulate(t);
      continue;
    }
    const AnyTensor t = read_tensor(p);
    std::visit(
        [&](const auto& tensor) {
          if (!acc) acc.emplace(tensor.channels());
          acc->accumulate(tensor);
        },
        t);
  }
  const auto mean = acc->finalize();
  json j;
  j["channels"] = acc->channels();
  j["pixel_count"] = acc->pixel_count();
  j["mean"] = mean;
  emit(j, a.out, out);
  return 0;
}

// ---------------------------------------------------------------- hide

struct HideArgs {
  std::string in, out, mean_file, fill = "0", mixed;
  int patch_size = 0;
  double p_hide = 0.5;
  std::uint64_t seed = 0, index = 0, epoch = 0;
  bool partial_edges = false;
  bool feature_map = false;
};

int cmd_hide(const HideArgs& a, std::ostream&) {
  require(a.mixed.empty() != (a.patch_size == 0), "give exactly one of --patch-size and --mixed");
  std::optional<MixedHidePolicy> policy;
  if (!a.mixed.empty()) policy = MixedHidePolicy::parse(a.mixed, a.partial_edges);
  const Tensor3 img = load_image(a.in);
  const auto fill = resolve_fill(a.mean_file, a.fill, img.channels());
  const RngKey key = derive_stream(a.seed, a.index, a.epoch);
  Tensor3 result = policy ? hide_mixed(img, *policy, a.p_hide, fill, key)
                          : hide_patches(img, HideConfig{a.patch_size, a.p_hide, fill, a.partial_edges}, key);
  save_image(result, a.out);
  return 0;
}

// ---------------------------------------------------------------- hide-temporal

struct TemporalArgs {
  std::string in, out, mean_file, fill = "0";
  int f_total = 2000, f_segment = 100;
  double p_hide = 0.5;
  std::uint64_t seed = 0, index = 0, epoch = 0;
};

int cmd_hide_temporal(const TemporalArgs& a, std::ostream&) {
  require(a.f_total > 0 && a.f_segment > 0 && a.f_total % a.f_segment == 0,
          "--f-segment must be positive and divide --f-total");
  require(a.p_hide >= 0.0 && a.p_hide <= 1.0, "--p-hide must lie in [0, 1]");
  const Tensor1 seq = read_tensor1(a.in);
  TemporalHideConfig cfg{a.f_total, a.f_segment, a.p_hide, resolve_fill(a.mean_file, a.fill, seq.channels())};
  const Tensor1 sampled = seq.length() == a.f_total ? seq : resample_uniform(seq, a.f_total);
  write_tensor(hide_segments(sampled, cfg, derive_stream(a.seed, a.index, a.epoch)), a.out);
  return 0;
}

// ---------------------------------------------------------------- localize

struct LocalizeArgs {
  std::string features, weights, cam_out, out;
  int class_id = 0;
  double tau = 0.2;
  int connectivity = 8;
};

int cmd_localize(const LocalizeArgs& a, std::ostream& out) {
  const ClassWeights weights = ClassWeights::from_tensor(read_tensor1(a.weights));
  const AnyTensor features = read_tensor(a.features);
  json j;
  if (const auto* maps = std::get_if<Tensor3>(&features)) {
    const Tensor3 cam = compute_cam(*maps, weights, a.class_id);
    if (!a.cam_out.empty()) save_image(cam, a.cam_out);
    j["bbox"] = box_json(largest_component_bbox(cam, LocalizeConfig{a.tau, a.connectivity}));
  } else {
    const Tensor1 cam = compute_cam(std::get<Tensor1>(features), weights, a.class_id);
    if (!a.cam_out.empty()) write_tensor(cam, a.cam_out);
    json segments = json::array();
    for (const auto& s : localize_segments(cam, a.tau)) {
      segments.push_back(json::array({s.interval.t0(), s.interval.t1(), s.score}));
    }
    j["segments"] = segments;
  }
  emit(j, a.out, out);
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string gt, pred, out;
  double iou = 0.5;
  bool non_strict = false;
  bool temporal = false;
  std::string thresholds = "0.1,0.2,0.3,0.4,0.5";
};

int eval_images(const EvalArgs& a, std::ostream& out) {
  const EvalConfig cfg{a.iou, !a.non_strict};
  std::map<std::string, json> preds;
  for (const auto& row : read_json_lines(a.pred)) {
    const auto id = field<std::string>(row, "image_id", a.pred);
    if (!preds.emplace(id, row).second) throw FormatError(a.pred + ": duplicate image_id '" + id + "'");
  }
  std::vector<EvalRecord> records;
  for (const auto& row : read_json_lines(a.gt)) {
    EvalRecord r;
    r.image_id = field<std::string>(row, "image_id", a.gt);
    const std::string where = a.gt + " [" + r.image_id + "]";
    r.gt_class = field<int>(row, "gt_class", where);
    for (const auto& b : field<json>(row, "gt_boxes", where)) r.gt_boxes.push_back(box_from_json(b, where));
    if (r.gt_boxes.empty()) throw FormatError(where + ": gt_boxes is empty");
    const auto it = preds.find(r.image_id);
    if (it == preds.end()) throw FormatError(a.pred + ": no prediction for image '" + r.image_id + "'");
    const json& p = it->second;
    const std::string pwhere = a.pred + " [" + r.image_id + "]";
    r.pred_class = field<int>(p, "pred_class", pwhere);
    if (p.contains("box_pred_class") && !p["box_pred_class"].is_null()) {
      r.box_for_pred_class = box_from_json(p["box_pred_class"], pwhere);
    }
    if (p.contains("box_gt_class") && !p["box_gt_class"].is_null()) {
      r.box_for_gt_class = box_from_json(p["box_gt_class"], pwhere);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw FormatError(a.gt + ": no ground-truth records");
  json j;
  j["num_images"] = records.size();
  j["iou_threshold"] = cfg.iou_threshold;
  j["strict"] = cfg.strict;
  j["gt_known_loc"] = gt_known_loc(records, cfg);
  j["top1_loc"] = top1_loc(records, cfg);
  emit(j, a.out, out);
  return 0;
}

int eval_temporal(const EvalArgs& a, std::ostream& out) {
  const auto thresholds = parse_number_list(a.thresholds, "--thresholds");
  for (double t : thresholds) require(t > 0.0 && t < 1.0, "--thresholds entries must lie in (0, 1)");
  TemporalEvalSet set;
  for (const auto& row : read_json_lines(a.gt)) {
    const auto video = field<std::string>(row, "video_id", a.gt);
    const auto cls = field<int>(row, "class", a.gt);
    set.ground_truth[cls][video].push_back(interval_from_json(field<json>(row, "interval", a.gt), a.gt));
  }
  for (const auto& row : read_json_lines(a.pred)) {
    const auto video = field<std::string>(row, "video_id", a.pred);
    const auto cls = field<int>(row, "class", a.pred);
    const auto score = field<double>(row, "score", a.pred);
    set.predictions[cls].push_back({video, interval_from_json(field<json>(row, "interval", a.pred), a.pred), score});
  }
  json j;
  j["strict"] = !a.non_strict;
  json by_threshold = json::array();
  for (double t : thresholds) {
    const auto report = mean_ap_report(set, EvalConfig{t, !a.non_strict});
    json per_class = json::object();
    for (const auto& [cls, ap] : report.per_class) per_class[std::to_string(cls)] = ap;
    by_threshold.push_back({{"iou_threshold", t}, {"mean_ap", report.mean_ap}, {"per_class", per_class}});
  }
  j["results"] = by_threshold;
  emit(j, a.out, out);
  return 0;
}

// ---------------------------------------------------------------- check-activations

struct CheckArgs {
  int k = 3, s = 8, image_side = 32;
  double p_hide = 0.5;
  std::string fill = "mean";
  std::int64_t samples = 100000;
  double pixel_mean = 1.0, pixel_half_width = 1.0;
  std::string weights = "ones";
  std::uint64_t seed = 0;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  require(a.k > 0, "--k must be positive");
  require(a.samples >= 1, "--samples must be at least 1");
  ConvFilter filter{a.k, 1, std::vector<float>(static_cast<std::size_t>(a.k) * a.k, 1.0f)};
  if (a.weights == "random") {
    Rng rng(RngKey{a.seed, 1});
    for (float& w : filter.weights) w = static_cast<float>(rng.uniform(-1.0, 1.0));
  } else {
    require(a.weights == "ones", "--weights must be 'ones' or 'random'");
  }
  float fill = 0.0f;
  if (a.fill == "mean") {
    fill = static_cast<float>(a.pixel_mean);
  } else if (a.fill == "zero") {
    fill = 0.0f;
  } else {
    fill = static_cast<float>(parse_number_list(a.fill, "--fill").at(0));
  }
  const PixelDistribution dist{{static_cast<float>(a.pixel_mean)}, {static_cast<float>(a.pixel_half_width)}};
  const ExpectationConfig cfg{a.image_side, a.s, a.p_hide, {fill}, a.samples, a.seed};
  const auto r = expectation_match(filter, dist, cfg);

  auto summary = [](const MomentSummary& m) {
    return json{{"count", m.count}, {"mean", m.mean}, {"stderr", m.stderr_mean}};
  };
  json j;
  j["kernel"] = a.k;
  j["patch_size"] = a.s;
  j["p_hide"] = a.p_hide;
  j["fill"] = fill;
  j["analytic_mean"] = r.analytic_mean;
  j["analytic_fill"] = r.analytic_fill;
  j["analytic_gap"] = r.analytic_gap;
  json cases;
  for (auto c : {PlacementCase::FullyVisible, PlacementCase::FullyHidden, PlacementCase::Partial}) {
    cases[to_string(c)] = summary(r.per_case[static_cast<int>(c)]);
  }
  j["cases"] = cases;
  j["touched"] = summary(r.touched);
  j["hidden_images"] = summary(r.hidden_images);
  j["unhidden_images"] = summary(r.unhidden_images);
  j["difference"] = r.difference;
  j["touched_matches"] = r.touched_matches;
  j["hidden_matches"] = r.hidden_matches;
  j["case2_relative_error"] = case2_exactness(filter, {fill});
  out << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- demo

struct DemoArgs {
  std::string mode = "both", pool = "gap", seeds = "1,2,3,4,5", out, dump_cams;
  double p_hide = 0.5;
  int patch_size = 8, epochs = 30, n_train = 2000, n_test = 1000;
  double tau = 0.2;
};

json row_json(const toy::DemoRow& r) {
  return json{{"seed", r.seed},
              {"mode", r.hide ? "has" : "baseline"},
              {"p_hide", r.p_hide},
              {"gt_known_loc", r.gt_known_loc},
              {"top1_loc", r.top1_loc},
              {"test_accuracy", r.test_accuracy},
              {"train_accuracy", r.train_accuracy},
              {"final_loss", r.final_loss}};
}

void dump_cams(const toy::DemoRun& run, const fs::path& dir, const std::string& tag) {
  fs::create_directories(dir);
  const ClassWeights weights = run.model.class_weights();
  const std::size_t count = std::min<std::size_t>(run.test.size(), 16);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& s = run.test[i];
    Tensor3 cam = toy::upscale_nearest(compute_cam(toy::forward(run.model, s.image).feature_maps, weights, s.label),
                                       toy::kImageSide, toy::kImageSide);
    const float peak = std::max(1e-12f, *std::ranges::max_element(cam.data()));
    for (float& v : cam.data()) v = 255.0f * std::max(0.0f, v) / peak;
    write_png(cam, dir / (tag + "_seed" + std::to_string(run.row.seed) + "_" + std::to_string(i) + ".png"));
  }
}

int cmd_demo(const DemoArgs& a, std::ostream& out) {
  require(a.mode == "baseline" || a.mode == "has" || a.mode == "both", "--mode must be baseline, has or both");
  require(a.pool == "gap" || a.pool == "gmp", "--pool must be gap or gmp");
  require(a.p_hide >= 0.0 && a.p_hide <= 1.0, "--p-hide must lie in [0, 1]");
  require(a.patch_size > 0 && toy::kImageSide % a.patch_size == 0, "--patch-size must divide 32");
  require(a.epochs > 0 && a.n_train > 0 && a.n_test > 0, "--epochs, --n-train and --n-test must be positive");
  require(a.tau > 0.0 && a.tau <= 1.0, "--tau must lie in (0, 1]");
  std::vector<std::uint64_t> seeds;
  for (double s : parse_number_list(a.seeds, "--seeds")) {
    require(s >= 0 && s == static_cast<double>(static_cast<std::uint64_t>(s)), "--seeds must be non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }

  toy::DemoConfig base;
  base.n_train = a.n_train;
  base.n_test = a.n_test;
  base.train.epochs = a.epochs;
  base.pooling = a.pool == "gap" ? toy::Pooling::Average : toy::Pooling::Max;
  base.localize.threshold_frac = a.tau;

  std::vector<std::pair<std::string, toy::DemoConfig>> arms;
  if (a.mode != "has") arms.emplace_back("baseline", base);
  if (a.mode != "baseline") {
    toy::DemoConfig with_hide = base;
    with_hide.train.hide = toy::HideSettings{a.patch_size, a.p_hide};
    arms.emplace_back("has", with_hide);
  }

  json rows = json::array();
  json summary = json::object();
  for (const auto& [name, cfg] : arms) {
    double loc = 0.0, top1 = 0.0, acc = 0.0;
    for (auto seed : seeds) {
      const auto run = toy::run_demo_seed(cfg, seed);
      rows.push_back(row_json(run.row));
      loc += run.row.gt_known_loc;
      top1 += run.row.top1_loc;
      acc += run.row.test_accuracy;
      if (!a.dump_cams.empty()) dump_cams(run, a.dump_cams, name);
    }
    const auto n = static_cast<double>(seeds.size());
    summary[name] = {{"mean_gt_known_loc", loc / n}, {"mean_top1_loc", top1 / n}, {"mean_test_accuracy", acc / n}};
  }
  json j;
  j["config"] = {{"pool", a.pool},       {"patch_size", a.patch_size}, {"p_hide", a.p_hide},
                 {"epochs", a.epochs},   {"n_train", a.n_train},       {"n_test", a.n_test},
                 {"tau", a.tau}};
  j["summary"] = summary;
  j["rows"] = rows;
  emit(j, a.out, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hide-and-Seek augmentation and localization toolkit", "has"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print toolkit and format versions");

  MeanArgs mean_args;
  auto* mean = app.add_subcommand("mean", "Per-channel dataset mean of PNG or HAST inputs");
  mean->add_option("inputs", mean_args.inputs, "Input files")->required();
  mean->add_option("--out", mean_args.out, "Write JSON here instead of stdout");

  HideArgs hide_args;
  auto* hide = app.add_subcommand("hide", "Hide random grid patches of one image");
  hide->add_option("--in", hide_args.in, "Input PNG or HAST image")->required();
  hide->add_option("--out", hide_args.out, "Output PNG or HAST image")->required();
  hide->add_option("--patch-size", hide_args.patch_size, "Grid patch side S");
  hide->add_option("--mixed", hide_args.mixed, "Mixed sizes, e.g. \"16,32,44,56,none\"");
  hide->add_option("--p-hide", hide_args.p_hide, "Per-patch hiding probability")->check(CLI::Range(0.0, 1.0));
  hide->add_option("--mean-file", hide_args.mean_file, "Dataset mean JSON used as fill");
  hide->add_option("--fill", hide_args.fill, "Explicit fill value(s), comma separated");
  hide->add_option("--seed", hide_args.seed, "Global seed");
  hide->add_option("--index", hide_args.index, "Sample index");
  hide->add_option("--epoch", hide_args.epoch, "Epoch");
  hide->add_flag("--partial-edges", hide_args.partial_edges, "Allow sizes that do not divide the image");

  TemporalArgs temporal_args;
  auto* temporal = app.add_subcommand("hide-temporal", "Hide random segments of a feature sequence");
  temporal->add_option("--in", temporal_args.in, "Input rank-2 HAST (T x C)")->required();
  temporal->add_option("--out", temporal_args.out, "Output rank-2 HAST")->required();
  temporal->add_option("--f-total", temporal_args.f_total, "Features per video after uniform sampling");
  temporal->add_option("--f-segment", temporal_args.f_segment, "Features per segment");
  temporal->add_option("--p-hide", temporal_args.p_hide, "Per-segment hiding probability")
      ->check(CLI::Range(0.0, 1.0));
  temporal->add_option("--mean-file", temporal_args.mean_file, "Dataset mean feature JSON");
  temporal->add_option("--fill", temporal_args.fill, "Explicit fill value(s)");
  temporal->add_option("--seed", temporal_args.seed, "Global seed");
  temporal->add_option("--index", temporal_args.index, "Sample index");
  temporal->add_option("--epoch", temporal_args.epoch, "Epoch");

  LocalizeArgs loc_args;
  auto* localize = app.add_subcommand("localize", "CAM and box/segment localization");
  localize->add_option("--features", loc_args.features, "Feature maps (rank 3) or sequence (rank 2)")->required();
  localize->add_option("--weights", loc_args.weights, "Class weights, rank-2 HAST N x M")->required();
  localize->add_option("--class", loc_args.class_id, "Class id")->required();
  localize->add_option("--tau", loc_args.tau, "Threshold as a fraction of the CAM max")
      ->check(CLI::Range(0.0, 1.0).description("(0, 1]"));
  localize->add_option("--connectivity", loc_args.connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
  localize->add_option("--cam-out", loc_args.cam_out, "Also write the CAM (HAST or PNG)");
  localize->add_option("--out", loc_args.out, "Write JSON here instead of stdout");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Localization metrics from JSON-lines files");
  eval->add_option("--gt", eval_args.gt, "Ground truth JSON lines")->required();
  eval->add_option("--pred", eval_args.pred, "Predictions JSON lines")->required();
  eval->add_option("--iou", eval_args.iou, "IoU threshold for image metrics");
  eval->add_flag("--non-strict", eval_args.non_strict, "Accept IoU equal to the threshold");
  eval->add_flag("--temporal", eval_args.temporal, "Temporal mAP instead of image metrics");
  eval->add_option("--thresholds", eval_args.thresholds, "Temporal IoU thresholds");
  eval->add_option("--out", eval_args.out, "Write JSON here instead of stdout");

  CheckArgs check_args;
  auto* check = app.add_subcommand("check-activations", "Monte-Carlo check of hidden-pixel fill statistics");
  check->add_option("--k", check_args.k, "Filter size K");
  check->add_option("--s", check_args.s, "Patch size S");
  check->add_option("--p-hide", check_args.p_hide, "Hiding probability")->check(CLI::Range(0.0, 1.0));
  check->add_option("--fill", check_args.fill, "mean, zero or a number");
  check->add_option("--samples", check_args.samples, "Placements per arm");
  check->add_option("--image-side", check_args.image_side, "Random image side");
  check->add_option("--pixel-mean", check_args.pixel_mean, "Mean of the uniform pixel distribution");
  check->add_option("--pixel-half-width", check_args.pixel_half_width, "Half-width of the pixel distribution");
  check->add_option("--weights", check_args.weights, "ones or random");
  check->add_option("--seed", check_args.seed, "Seed");

  DemoArgs demo_args;
  auto* demo = app.add_subcommand("demo", "Train the toy CAM model with and without hiding");
  demo->add_option("--mode", demo_args.mode, "baseline, has or both");
  demo->add_option("--p-hide", demo_args.p_hide, "Hiding probability");
  demo->add_option("--patch-size", demo_args.patch_size, "Patch size");
  demo->add_option("--pool", demo_args.pool, "gap or gmp");
  demo->add_option("--seeds", demo_args.seeds, "Comma-separated seeds");
  demo->add_option("--epochs", demo_args.epochs, "Epochs");
  demo->add_option("--n-train", demo_args.n_train, "Training images");
  demo->add_option("--n-test", demo_args.n_test, "Test images");
  demo->add_option("--tau", demo_args.tau, "CAM threshold fraction");
  demo->add_option("--dump-cams", demo_args.dump_cams, "Directory for CAM PNGs");
  demo->add_option("--out", demo_args.out, "Write JSON here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  if (show_version) {
    out << "has " << kToolVersion << " (HAST format v" << static_cast<int>(kHastVersion) << ")\n";
    return 0;
  }

  try {
    if (*mean) return cmd_mean(mean_args, out);
    if (*hide) return cmd_hide(hide_args, out);
    if (*temporal) return cmd_hide_temporal(temporal_args, out);
    if (*localize) {
      require(loc_args.tau > 0.0 && loc_args.tau <= 1.0, "--tau must lie in (0, 1]");
      return cmd_localize(loc_args, out);
    }
    if (*eval) {
      require(eval_args.iou > 0.0 && eval_args.iou < 1.0, "--iou must lie in (0, 1)");
      return eval_args.temporal ? eval_temporal(eval_args, out) : eval_images(eval_args, out);
    }
    if (*check) return cmd_check(check_args, out);
    if (*demo) return cmd_demo(demo_args, out);
    err << app.help();
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace has::cli
