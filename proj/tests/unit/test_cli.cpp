#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lowlight/cli.hpp"
#include "lowlight/codec.hpp"
#include "lowlight/manifest.hpp"
#include "lowlight/serialization.hpp"
#include "test_support.hpp"

using namespace lowlight;
namespace lt = lowlight::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lowlight");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Reduced working resolution keeps each image to a fraction of a second.
std::vector<std::string> fast(std::vector<std::string> args) {
  for (const char* a : {"--working-size", "32", "--epochs", "3", "--window", "3"}) args.emplace_back(a);
  return args;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path write_dark_image(const fs::path& dir, const std::string& name, std::uint64_t seed) {
  const PlanarImage img = lt::random_8bit_image(24, 30, 3, seed);
  PlanarImage dark = img;
  for (double& v : dark.data()) v *= 0.2;
  write_image(dark, dir / name);
  return dir / name;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("--print-config emits the effective config") {
    const Run r = run({"enhance", "--print-config"});
    CHECK(r.code == kExitOk);
    CHECK(config_from_json(r.out) == EnhancementConfig{});
    CHECK(r.out == config_to_json(EnhancementConfig{}) + "\n");
  }

  TEST_CASE("precedence: defaults < config file < flags") {
    const auto dir = lt::scratch_dir("cli_precedence");
    std::ofstream(dir / "cfg.json") << R"({"exposure": {"L": 0.7}, "epochs": 3, "seed": 9})";
    const Run r = run({"enhance", "--config", (dir / "cfg.json").string(), "--L", "0.2", "--weights",
                       "1,2,3,4", "--gf-radius", "2", "--gf-eps", "0.5", "--lr", "2e-5", "--print-config"});
    REQUIRE(r.code == kExitOk);
    const auto cfg = config_from_json(r.out);
    CHECK(cfg.exposure.target_level == 0.2);
    CHECK(cfg.epochs == 3);
    CHECK(cfg.seed == 9);
    CHECK(cfg.weights == LossWeights{1, 2, 3, 4});
    CHECK(cfg.guided == GuidedFilterParams{2, 0.5});
    CHECK(cfg.lr == 2e-5);
    CHECK(cfg.working_size == 256);
  }

  TEST_CASE("usage errors exit with 2") {
    const auto dir = lt::scratch_dir("cli_usage");
    const auto img = write_dark_image(dir, "a.png", 1);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"enhance", "--bogus"}).code == kExitUsage);
    CHECK(run({"enhance", "--weights", "1,2,3", "--print-config"}).code == kExitUsage);
    CHECK(run({"enhance", "--weights", "1,x,3,4", "--print-config"}).code == kExitUsage);
    CHECK(run({"enhance", "--window", "4", "--print-config"}).code == kExitUsage);
    CHECK(run({"enhance", "--working-size", "250", "--print-config"}).code == kExitUsage);
    CHECK(run({"enhance", "--config", (dir / "missing.json").string(), "--print-config"}).code == kExitUsage);
    CHECK(run({"enhance", "-i", (dir / "missing.png").string(), "-o", (dir / "o").string()}).code == kExitUsage);
    CHECK(run({"enhance", "-i", img.string()}).code == kExitUsage);
    CHECK(run({"enhance", "-i", img.string(), "-o", (dir / "o").string(), "--jobs", "0"}).code == kExitUsage);
    CHECK(run({"enhance", "--help"}).code == kExitOk);
  }

  TEST_CASE("single image: one output and a one-record manifest") {
    const auto dir = lt::scratch_dir("cli_single");
    const auto img = write_dark_image(dir, "photo.png", 2);
    const Run r = run(fast({"enhance", "-i", img.string(), "-o", (dir / "out").string(), "--trace",
                            "--save-params", "--reference", img.string()}));
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(dir / "out" / "photo_enhanced.png"));
    CHECK(line_count(slurp(dir / "out" / "photo_trace.jsonl")) == 3);
    CHECK(fs::file_size(dir / "out" / "photo_params.bin") > 0);
    const RunManifest m = manifest_from_json(slurp(dir / "out" / "manifest.json"));
    REQUIRE(m.records.size() == 1);
    CHECK(m.records[0].ok);
    CHECK(m.records[0].metrics.has_value());
    CHECK(m.config.epochs == 3);
    CHECK(read_image(dir / "out" / "photo_enhanced.png").width() == 30);
  }

  TEST_CASE("a corrupt file in a directory is a partial failure") {
    const auto dir = lt::scratch_dir("cli_corrupt");
    fs::create_directories(dir / "in");
    write_dark_image(dir / "in", "a.png", 3);
    write_dark_image(dir / "in", "b.png", 4);
    std::ofstream(dir / "in" / "c.png") << "definitely not a PNG";
    std::ofstream(dir / "in" / "notes.txt") << "ignored";
    const Run r = run(fast({"enhance", "-i", (dir / "in").string(), "-o", (dir / "out").string()}));
    CHECK(r.code == kExitPartialFailure);
    CHECK(fs::exists(dir / "out" / "a_enhanced.png"));
    CHECK(fs::exists(dir / "out" / "b_enhanced.png"));
    CHECK_FALSE(fs::exists(dir / "out" / "c_enhanced.png"));
    const RunManifest m = manifest_from_json(slurp(dir / "out" / "manifest.json"));
    REQUIRE(m.records.size() == 3);
    CHECK_FALSE(m.records[2].ok);
    CHECK_FALSE(m.records[2].error.empty());
  }

  TEST_CASE("parallel jobs give the same images as a serial run") {
    const auto dir = lt::scratch_dir("cli_jobs");
    fs::create_directories(dir / "in");
    for (int i = 0; i < 3; ++i) write_dark_image(dir / "in", "img" + std::to_string(i) + ".png", 10 + i);
    REQUIRE(run(fast({"enhance", "-i", (dir / "in").string(), "-o", (dir / "serial").string()})).code == 0);
    REQUIRE(run(fast({"enhance", "-i", (dir / "in").string(), "-o", (dir / "par").string(), "-j", "3"})).code == 0);
    for (int i = 0; i < 3; ++i) {
      const std::string name = "img" + std::to_string(i) + "_enhanced.png";
      CHECK(slurp(dir / "serial" / name) == slurp(dir / "par" / name));
    }
    const auto ms = manifest_from_json(slurp(dir / "serial" / "manifest.json"));
    const auto mp = manifest_from_json(slurp(dir / "par" / "manifest.json"));
    for (std::size_t i = 0; i < 3; ++i) CHECK(ms.records[i].input == mp.records[i].input);
  }

  TEST_CASE("exposure level changes the output; identical flags reproduce it") {
    const auto dir = lt::scratch_dir("cli_level");
    const auto img = write_dark_image(dir, "p.png", 5);
    for (const char* level : {"0.3", "0.9"}) {
      REQUIRE(run(fast({"enhance", "-i", img.string(), "-o", (dir / level).string(), "--L", level, "--trace"})).code == 0);
    }
    REQUIRE(run(fast({"enhance", "-i", img.string(), "-o", (dir / "again").string(), "--L", "0.3", "--trace"})).code == 0);
    CHECK(slurp(dir / "0.3" / "p_enhanced.png") != slurp(dir / "0.9" / "p_enhanced.png"));
    CHECK(slurp(dir / "0.3" / "p_enhanced.png") == slurp(dir / "again" / "p_enhanced.png"));
    CHECK(slurp(dir / "0.3" / "p_trace.jsonl") == slurp(dir / "again" / "p_trace.jsonl"));
  }

  TEST_CASE("evaluate: identical sets and name matching") {
    const auto dir = lt::scratch_dir("cli_eval");
    fs::create_directories(dir / "enh");
    fs::create_directories(dir / "ref");
    for (int i = 0; i < 2; ++i) {
      const PlanarImage img = lt::random_8bit_image(16, 16, 3, 20 + i);
      write_image(img, dir / "ref" / ("s" + std::to_string(i) + ".png"));
      write_image(img, dir / "enh" / ("s" + std::to_string(i) + "_enhanced.png"));
    }
    write_image(lt::random_8bit_image(16, 16, 3, 30), dir / "enh" / "orphan_enhanced.png");
    const Run r = run({"evaluate", "-i", (dir / "enh").string(), "-r", (dir / "ref").string(), "-o",
                       (dir / "report").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("orphan") != std::string::npos);
    const std::string csv = slurp(dir / "report" / "evaluation.csv");
    CHECK(line_count(csv) == 4);  // header, two images, mean
    CHECK(csv.find("mean,inf,1.000000") != std::string::npos);
    CHECK(fs::exists(dir / "report" / "evaluation.txt"));

    fs::create_directories(dir / "empty");
    CHECK(run({"evaluate", "-i", (dir / "empty").string(), "-r", (dir / "ref").string()}).code == kExitUsage);
    CHECK(run({"evaluate", "-i", (dir / "nowhere").string(), "-r", (dir / "ref").string()}).code == kExitUsage);
  }

  TEST_CASE("evaluate: enhancement beats the darkened inputs") {
    const auto dir = lt::scratch_dir("cli_eval_dark");
    for (const char* d : {"ref", "dark"}) fs::create_directories(dir / d);
    const PlanarImage photo = read_image(lt::photo_dir() / "coffee.png");
    write_image(photo, dir / "ref" / "coffee.png");
    write_image(lt::darken(photo, 0.2), dir / "dark" / "coffee.png");
    REQUIRE(run({"enhance", "-i", (dir / "dark").string(), "-o", (dir / "enh").string(), "--working-size", "64",
                 "--epochs", "40"}).code == 0);
    const Run dark = run({"evaluate", "-i", (dir / "dark").string(), "-r", (dir / "ref").string(), "-o",
                          (dir / "r_dark").string()});
    const Run enh = run({"evaluate", "-i", (dir / "enh").string(), "-r", (dir / "ref").string(), "-o",
                         (dir / "r_enh").string()});
    REQUIRE(dark.code == 0);
    REQUIRE(enh.code == 0);
    auto mean_psnr = [&](const fs::path& csv) {
      const std::string s = slurp(csv);
      const auto pos = s.find("mean,");
      return std::stod(s.substr(pos + 5));
    };
    CHECK(mean_psnr(dir / "r_enh" / "evaluation.csv") > mean_psnr(dir / "r_dark" / "evaluation.csv"));
  }

  TEST_CASE("ablate: one sub-directory per setting plus a CSV") {
    const auto dir = lt::scratch_dir("cli_ablate");
    const auto img = write_dark_image(dir, "x.png", 6);
    struct Sweep {
      std::vector<std::string> args;
      std::vector<std::string> dirs;
    };
    const std::vector<Sweep> sweeps{
        {{"--sweep", "L", "0.3,0.5,0.7,0.9"}, {"L_0.3", "L_0.5", "L_0.7", "L_0.9"}},
        {{"--sweep", "window", "1,3,5,7"}, {"window_1", "window_3", "window_5", "window_7"}},
        {{"--sweep", "loss-mask"}, {"no-smoothness", "no-exposure", "no-sparsity", "full"}},
    };
    int n = 0;
    for (const auto& s : sweeps) {
      const fs::path out = dir / ("out" + std::to_string(n++));
      std::vector<std::string> args{"ablate", "-i", img.string(), "-o", out.string(), "--reference", img.string()};
      args.insert(args.end(), s.args.begin(), s.args.end());
      const Run r = run(fast(args));
      REQUIRE(r.code == kExitOk);
      for (const auto& d : s.dirs) CHECK(fs::exists(out / d / "x_enhanced.png"));
      CHECK(line_count(slurp(out / "ablation.csv")) == 5);
      CHECK(manifest_from_json(slurp(out / "manifest.json")).records.size() == 4);
    }
    auto bad = [&](std::vector<std::string> sweep) {
      std::vector<std::string> args{"ablate", "-i", img.string(), "-o", (dir / "bad").string()};
      args.insert(args.end(), sweep.begin(), sweep.end());
      return run(fast(args)).code;
    };
    CHECK(bad({"--sweep", "window", "2"}) == kExitUsage);
    CHECK(bad({"--sweep", "L", "0.5,abc"}) == kExitUsage);
    CHECK(bad({"--sweep", "L", "1.5"}) == kExitUsage);
    CHECK(bad({"--sweep", "loss-mask", "no-colour"}) == kExitUsage);
    CHECK(bad({"--sweep", "gamma"}) == kExitUsage);
    CHECK(bad({}) == kExitUsage);
  }
}
