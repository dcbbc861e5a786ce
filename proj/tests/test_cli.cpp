#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"
#include "has/hast_io.hpp"
#include "has/png_io.hpp"
#include "has/rng.hpp"

using namespace has;
namespace fs = std::filesystem;

#ifndef HAS_FIXTURE_DIR
#error "HAS_FIXTURE_DIR must be defined"
#endif

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "has_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string fixture(const std::string& name) { return (fs::path(HAS_FIXTURE_DIR) / name).string(); }

fs::path write_random_png(const std::string& name, int h, int w, int c, std::uint64_t seed) {
  Rng r(RngKey{seed, 0});
  Tensor3 t(h, w, c);
  for (float& v : t.data()) v = static_cast<float>(r.uniform_index(256));
  const auto p = scratch(name);
  write_png(t, p);
  return p;
}

}  // namespace

TEST_CASE("cli: version and usage errors") {
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("has 1.0.0") != std::string::npos);
  CHECK(v.out.find("HAST format v1") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"hide", "--bogus-flag"}).code == 1);
  CHECK(run({}).code == 1);
}

TEST_CASE("cli: eval on the top-1 fixture") {
  const auto r = run({"eval", "--gt", fixture("top1_gt.jsonl"), "--pred", fixture("top1_pred.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"top1_loc\": 0.5") != std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["top1_loc"] == 0.5);
  CHECK(j["gt_known_loc"] == 0.5);
}

TEST_CASE("cli: out-of-range tau is a validation error naming the flag") {
  const auto feats = scratch("f.hast");
  const auto weights = scratch("w.hast");
  write_tensor(Tensor3(4, 4, 2, 1.0f), feats);
  write_tensor(Tensor1(1, 2, 1.0f), weights);
  const auto r = run({"localize", "--features", feats.string(), "--weights", weights.string(), "--class", "0",
                      "--tau", "1.5"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--tau") != std::string::npos);
}

TEST_CASE("cli: localize box and segments") {
  Tensor3 f(6, 6, 1);
  f.at(1, 2) = 1.0f;
  f.at(2, 2) = 1.0f;
  write_tensor(f, scratch("f1.hast"));
  write_tensor(Tensor1(1, 1, 1.0f), scratch("w1.hast"));
  auto r = run({"localize", "--features", scratch("f1.hast").string(), "--weights", scratch("w1.hast").string(),
                "--class", "0"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["bbox"] == nlohmann::json::array({2, 1, 3, 3}));

  write_tensor(Tensor1::from_data(5, 1, {0.2f, 0.9f, 0.8f, 0.1f, 0.6f}), scratch("seq.hast"));
  r = run({"localize", "--features", scratch("seq.hast").string(), "--weights", scratch("w1.hast").string(),
           "--class", "0", "--tau", "0.5"});
  REQUIRE(r.code == 0);
  const auto seg = nlohmann::json::parse(r.out)["segments"];
  REQUIRE(seg.size() == 2);
  CHECK(seg[0][0] == 1);
  CHECK(seg[0][1] == 3);

  r = run({"localize", "--features", scratch("missing.hast").string(), "--weights", scratch("w1.hast").string(),
           "--class", "0"});
  CHECK(r.code == 2);
  write_tensor(Tensor3(3, 3, 1, -1.0f), scratch("neg.hast"));
  r = run({"localize", "--features", scratch("neg.hast").string(), "--weights", scratch("w1.hast").string(),
           "--class", "0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no positive activation") != std::string::npos);
}

TEST_CASE("cli: hide with p-hide 0 reproduces the input PNG") {
  const auto in = write_random_png("in.png", 32, 48, 3, 1);
  const auto out = scratch("out.png");
  const auto reencoded = scratch("reencoded.png");
  write_png(read_png(in), reencoded);
  const auto r = run({"hide", "--in", in.string(), "--out", out.string(), "--patch-size", "8", "--p-hide", "0",
                      "--fill", "127"});
  REQUIRE(r.code == 0);
  CHECK(slurp(out) == slurp(reencoded));
}

TEST_CASE("cli: hide is deterministic and uses the mean file") {
  const auto in = write_random_png("in2.png", 32, 32, 3, 2);
  const auto mean_json = scratch("mean.json");
  REQUIRE(run({"mean", in.string(), "--out", mean_json.string()}).code == 0);
  const auto m = nlohmann::json::parse(slurp(mean_json));
  CHECK(m["channels"] == 3);
  CHECK(m["pixel_count"] == 1024);

  const std::vector<std::string> args{"hide", "--in", in.string(), "--patch-size", "8", "--p-hide", "1",
                                      "--mean-file", mean_json.string(), "--seed", "7", "--index", "3",
                                      "--epoch", "5", "--out"};
  auto a = args, b = args;
  a.push_back(scratch("h1.hast").string());
  b.push_back(scratch("h2.hast").string());
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(scratch("h1.hast")) == slurp(scratch("h2.hast")));
  const auto hidden = read_tensor3(scratch("h1.hast"));
  for (int c = 0; c < 3; ++c) CHECK(hidden.at(5, 5, c) == m["mean"][c].get<float>());
}

TEST_CASE("cli: hide validates before writing") {
  const auto in = write_random_png("in3.png", 16, 16, 1, 3);
  const auto out = scratch("never.png");
  fs::remove(out);
  CHECK(run({"hide", "--in", in.string(), "--out", out.string(), "--patch-size", "5", "--fill", "0"}).code == 1);
  CHECK(run({"hide", "--in", in.string(), "--out", out.string(), "--patch-size", "4", "--p-hide", "2"}).code == 1);
  CHECK(run({"hide", "--in", in.string(), "--out", out.string(), "--patch-size", "4", "--fill", "1,2"}).code == 1);
  CHECK_FALSE(fs::exists(out));
  CHECK(run({"hide", "--in", scratch("nope.png").string(), "--out", out.string(), "--patch-size", "4"}).code == 2);
  CHECK(run({"hide", "--in", in.string(), "--out", out.string(), "--mixed", "4,8,none", "--fill", "0"}).code == 0);
}

TEST_CASE("cli: hide-temporal") {
  Tensor1 seq(40, 2);
  for (std::size_t i = 0; i < seq.size(); ++i) seq.data()[i] = static_cast<float>(i);
  write_tensor(seq, scratch("seq40.hast"));
  const auto r = run({"hide-temporal", "--in", scratch("seq40.hast").string(), "--out", scratch("seq20.hast").string(),
                      "--f-total", "20", "--f-segment", "5", "--p-hide", "1", "--fill", "-1"});
  REQUIRE(r.code == 0);
  const auto out = read_tensor1(scratch("seq20.hast"));
  CHECK(out.length() == 20);
  for (float v : out.data()) CHECK(v == -1.0f);
  CHECK(run({"hide-temporal", "--in", scratch("seq40.hast").string(), "--out", scratch("x.hast").string(),
             "--f-total", "20", "--f-segment", "3"})
            .code == 1);
}

TEST_CASE("cli: temporal eval") {
  std::ofstream(scratch("tgt.jsonl")) << R"({"video_id": "v", "class": 0, "interval": [0, 10]})" << '\n';
  std::ofstream(scratch("tpred.jsonl")) << R"({"video_id": "v", "class": 0, "interval": [0, 10], "score": 0.8})" << '\n'
                                        << R"({"video_id": "v", "class": 0, "interval": [20, 30], "score": 0.9})"
                                        << '\n';
  const auto r = run({"eval", "--temporal", "--gt", scratch("tgt.jsonl").string(), "--pred",
                      scratch("tpred.jsonl").string(), "--thresholds", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["results"][0]["mean_ap"] == 0.5);
  std::ofstream(scratch("broken.jsonl")) << "{not json\n";
  CHECK(run({"eval", "--gt", scratch("broken.jsonl").string(), "--pred", scratch("tpred.jsonl").string()}).code == 2);
}

TEST_CASE("cli: check-activations") {
  const auto r = run({"check-activations", "--k", "3", "--s", "8", "--samples", "5000", "--seed", "2"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["analytic_mean"] == 9.0);
  CHECK(j["hidden_matches"] == true);
  const auto z = nlohmann::json::parse(run({"check-activations", "--fill", "zero", "--samples", "2000"}).out);
  CHECK(z["cases"]["fully_hidden"]["mean"] == 0.0);
  CHECK(z["analytic_gap"] == -9.0);
}

TEST_CASE("cli: demo output is reproducible") {
  const std::vector<std::string> args{"demo", "--mode", "both", "--seeds", "3", "--epochs", "1",
                                      "--n-train", "64", "--n-test", "32"};
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["rows"].size() == 2);
  CHECK(run({"demo", "--mode", "sideways"}).code == 1);
  CHECK(run({"demo", "--patch-size", "7"}).code == 1);
}
