#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lowlight/pipeline.hpp"

namespace lowlight::cli {

namespace fs = std::filesystem;

/// Thrown for invalid flag combinations; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnhanceOptions {
  std::vector<fs::path> inputs;
  fs::path output;
  std::optional<fs::path> reference;
  EnhancementConfig config;
  int jobs = 1;
  bool trace = false;
  bool save_params = false;
};

struct EvaluateOptions {
  fs::path enhanced;
  fs::path reference;
  std::optional<fs::path> output;  // defaults to the enhanced directory
};

struct AblateOptions {
  fs::path input;
  fs::path output;
  std::optional<fs::path> reference;
  EnhancementConfig config;
  AblationSweep sweep;
  bool trace = false;
};

int cmd_enhance(const EnhanceOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err);

/// Image files directly inside `dir`, sorted by name.
std::vector<fs::path> list_images(const fs::path& dir);
/// File stem with a trailing "_enhanced" removed.
std::string match_key(const fs::path& p);
AblationSweep parse_sweep(const std::vector<std::string>& tokens);

}  // namespace lowlight::cli
