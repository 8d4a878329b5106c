#include "lowlight/cli.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "lowlight/codec.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/serialization.hpp"

namespace lowlight {

namespace {

using cli::UsageError;

// Flags shared by enhance and ablate. Each one overrides the config file
// only when it was given on the command line.
struct ConfigFlags {
  std::string config_path;
  double level = 0;
  int window = 0;
  int epochs = 0;
  double lr = 0;
  std::string weights;
  std::size_t working_size = 0;
  std::size_t gf_radius = 0;
  double gf_eps = 0;
  std::uint64_t seed = 0;
  bool print_config = false;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_level = nullptr;
  CLI::Option* o_window = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_lr = nullptr;
  CLI::Option* o_weights = nullptr;
  CLI::Option* o_working = nullptr;
  CLI::Option* o_radius = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_seed = nullptr;

  void attach(CLI::App* app) {
    o_config = app->add_option("--config", config_path, "JSON config file (flags take precedence)");
    o_level = app->add_option("--L", level, "target exposure level");
    o_window = app->add_option("--window", window, "context window side (odd)");
    o_epochs = app->add_option("--epochs", epochs, "optimizer steps");
    o_lr = app->add_option("--lr", lr, "Adam learning rate");
    o_weights = app->add_option("--weights", weights, "loss weights alpha,beta,gamma,delta");
    o_working = app->add_option("--working-size", working_size, "side of the square working resolution");
    o_radius = app->add_option("--gf-radius", gf_radius, "guided filter radius");
    o_eps = app->add_option("--gf-eps", gf_eps, "guided filter regularizer");
    o_seed = app->add_option("--seed", seed, "parameter initialization seed");
    app->add_flag("--print-config", print_config, "print the effective config as JSON and exit");
  }

  EnhancementConfig resolve() const {
    EnhancementConfig cfg;
    if (o_config->count() > 0) {
      std::string text;
      try {
        const auto bytes = read_file(config_path);
        text.assign(bytes.begin(), bytes.end());
      } catch (const std::exception& e) {
        throw UsageError(e.what());
      }
      cfg = config_from_json(text, cfg);
    }
    if (o_level->count()) cfg.exposure.target_level = level;
    if (o_window->count()) cfg.window = ContextWindowSpec(window);
    if (o_epochs->count()) cfg.epochs = epochs;
    if (o_lr->count()) cfg.lr = lr;
    if (o_weights->count()) cfg.weights = parse_weights(weights);
    if (o_working->count()) cfg.working_size = working_size;
    if (o_radius->count()) cfg.guided.radius = gf_radius;
    if (o_eps->count()) cfg.guided.eps = gf_eps;
    if (o_seed->count()) cfg.seed = seed;
    cfg.validate();
    return cfg;
  }

  static LossWeights parse_weights(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != part.size() || !std::isfinite(x)) {
        throw UsageError("--weights: '" + part + "' is not a number");
      }
      v.push_back(x);
    }
    if (v.size() != 4) throw UsageError("--weights expects four comma-separated values");
    return LossWeights{v[0], v[1], v[2], v[3]};
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot low-light image enhancement"};
  app.name("lowlight");
  app.require_subcommand(1);

  cli::EnhanceOptions enh;
  std::vector<std::string> enh_inputs;
  std::string enh_output, enh_reference;
  ConfigFlags enh_flags;
  auto* enhance = app.add_subcommand("enhance", "enhance image files or directories");
  enhance->add_option("--input,-i", enh_inputs, "image file(s) or directory");
  enhance->add_option("--output,-o", enh_output, "output directory");
  auto* enh_ref_opt =
      enhance->add_option("--reference", enh_reference, "reference image or directory for metrics");
  enhance->add_option("--jobs,-j", enh.jobs, "images processed in parallel")->capture_default_str();
  enhance->add_flag("--trace", enh.trace, "write <stem>_trace.jsonl per image");
  enhance->add_flag("--save-params", enh.save_params, "write <stem>_params.bin snapshots");
  enh_flags.attach(enhance);

  cli::EvaluateOptions ev;
  std::string ev_enhanced, ev_reference, ev_output;
  auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM of enhanced images against references");
  evaluate->add_option("--input,--enhanced,-i", ev_enhanced, "directory of enhanced images")->required();
  evaluate->add_option("--reference,-r", ev_reference, "directory of reference images")->required();
  auto* ev_out_opt = evaluate->add_option("--output,-o", ev_output, "report directory");

  cli::AblateOptions ab;
  std::string ab_input, ab_output, ab_reference;
  std::vector<std::string> sweep_tokens;
  ConfigFlags ab_flags;
  auto* ablate = app.add_subcommand("ablate", "enhance one image under a parameter sweep");
  ablate->add_option("--input,-i", ab_input, "image file");
  ablate->add_option("--output,-o", ab_output, "output directory");
  auto* ab_ref_opt = ablate->add_option("--reference", ab_reference, "reference image for metrics");
  ablate->add_option("--sweep", sweep_tokens, "KIND [VALUES]: window 1,3,5,7 | L 0.3,0.5 | loss-mask")
      ->expected(1, 2);
  ablate->add_flag("--trace", ab.trace, "write a trace per setting");
  ab_flags.attach(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*enhance) {
      enh.config = enh_flags.resolve();
      if (enh_flags.print_config) {
        out << config_to_json(enh.config) << "\n";
        return kExitOk;
      }
      if (enh_inputs.empty()) throw UsageError("enhance: --input is required");
      if (enh_output.empty()) throw UsageError("enhance: --output is required");
      if (enh.jobs < 1) throw UsageError("--jobs must be at least 1");
      for (const auto& in : enh_inputs) enh.inputs.emplace_back(in);
      enh.output = enh_output;
      if (enh_ref_opt->count()) enh.reference = cli::fs::path(enh_reference);
      return cli::cmd_enhance(enh, out, err);
    }
    if (*evaluate) {
      ev.enhanced = ev_enhanced;
      ev.reference = ev_reference;
      if (ev_out_opt->count()) ev.output = cli::fs::path(ev_output);
      return cli::cmd_evaluate(ev, out, err);
    }
    if (*ablate) {
      ab.config = ab_flags.resolve();
      if (ab_flags.print_config) {
        out << config_to_json(ab.config) << "\n";
        return kExitOk;
      }
      if (ab_input.empty()) throw UsageError("ablate: --input is required");
      if (ab_output.empty()) throw UsageError("ablate: --output is required");
      if (sweep_tokens.empty()) throw UsageError("ablate: --sweep is required");
      ab.sweep = cli::parse_sweep(sweep_tokens);
      for (std::size_t i = 0; i < ab.sweep.size(); ++i) ab.sweep.apply(ab.config, i).validate();
      ab.input = ab_input;
      ab.output = ab_output;
      if (ab_ref_opt->count()) ab.reference = cli::fs::path(ab_reference);
      return cli::cmd_ablate(ab, out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lowlight
