#include <cmath>
#include <limits>

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/manifest.hpp"
#include "lowlight/serialization.hpp"

using namespace lowlight;

namespace {

EnhancementConfig odd_config() {
  EnhancementConfig c;
  c.weights = LossWeights{0.1, 1.0 / 3.0, 7.25, 0.0};
  c.exposure = ExposureSpec{0.123456789012345, 8};
  c.window = ContextWindowSpec(5);
  c.epochs = 17;
  c.lr = 3.3e-7;
  c.working_size = 64;
  c.guided = GuidedFilterParams{3, 1e-3};
  c.illum_floor = 2e-4;
  c.seed = 18446744073709551557ull;
  c.network.hidden = 64;
  c.network.hidden_omega = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("serialization") {
  TEST_CASE("config roundtrip is exact") {
    for (const auto& c : {EnhancementConfig{}, odd_config()}) {
      const std::string text = config_to_json(c);
      CHECK(config_from_json(text) == c);
      CHECK(config_to_json(config_from_json(text)) == text);
    }
  }

  TEST_CASE("partial configs overlay the base") {
    const auto c = config_from_json(R"({"exposure": {"L": 0.7}, "epochs": 3})");
    CHECK(c.exposure.target_level == 0.7);
    CHECK(c.exposure.region_side == 16);
    CHECK(c.epochs == 3);
    CHECK(c.weights == LossWeights{});
    CHECK(config_from_json("{}", odd_config()) == odd_config());
  }

  TEST_CASE("bad configs are argument errors") {
    CHECK_THROWS_AS(config_from_json("{"), ArgumentError);
    CHECK_THROWS_AS(config_from_json("[]"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"epoch": 3})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"weights": {"alpha": 1, "zeta": 2}})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"epochs": "ten"})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"epochs": 2.5})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"working_size": -256})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"window": 4})"), ArgumentError);
    CHECK_THROWS_AS(config_from_json(R"({"lr": 0})"), ArgumentError);
  }

  TEST_CASE("trace roundtrip") {
    std::vector<LossReport> epochs{{0.1, 2.0 / 3.0, 0.3, 0.4, 1.5}, {1e-300, 5e10, 0, 1, 7}};
    const std::string text = trace_to_jsonl(epochs);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(trace_from_jsonl(text) == epochs);
    CHECK(trace_from_jsonl("").empty());
    CHECK_THROWS_AS(trace_from_jsonl("{\"epoch\": 1}\n"), DecodeError);
    CHECK_THROWS_AS(trace_from_jsonl("not json\n"), DecodeError);
  }

  TEST_CASE("manifest roundtrip is lossless") {
    RunManifest m;
    m.command = "enhance";
    m.inputs = {"in/a.png", "in/dir"};
    m.output_dir = "out";
    m.config = odd_config();
    ImageRecord ok;
    ok.input = "in/a.png";
    ok.output = "out/a_enhanced.png";
    ok.ok = true;
    ok.wall_seconds = 12.345678901234567;
    ok.metrics = MetricReport{std::numeric_limits<double>::infinity(), 1.0};
    ImageRecord ok2 = ok;
    ok2.metrics = MetricReport{17.891234567, 0.6252};
    ImageRecord bad;
    bad.input = "in/dir/broken.png";
    bad.error = "malformed PNG";
    bad.wall_seconds = 0.001;
    m.records = {ok, ok2, bad};

    const std::string text = manifest_to_json(m);
    CHECK(text.find("\"inf\"") != std::string::npos);
    const RunManifest back = manifest_from_json(text);
    CHECK(back == m);
    CHECK(manifest_to_json(back) == text);
    CHECK_FALSE(back.all_ok());
    CHECK(std::isinf(back.records[0].metrics->psnr_db));
    CHECK_FALSE(back.records[2].metrics.has_value());
  }

  TEST_CASE("malformed manifests") {
    CHECK_THROWS_AS(manifest_from_json("{}"), DecodeError);
    CHECK_THROWS_AS(manifest_from_json("nope"), DecodeError);
    RunManifest m;
    std::string text = manifest_to_json(m);
    const auto pos = text.find("\"epochs\": 100");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 13, "\"epochs\": 0  ");
    CHECK_THROWS_AS(manifest_from_json(text), DecodeError);
  }
}
