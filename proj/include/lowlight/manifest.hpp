#pragma once

// Record of one batch run: inputs, effective configuration and per-image
// outcome. Serialized as JSON; from_json(to_json(m)) == m.

#include <optional>
#include <string>
#include <vector>

#include "lowlight/metrics.hpp"
#include "lowlight/pipeline.hpp"

namespace lowlight {

struct ImageRecord {
  std::string input;
  std::string output;   // empty when the image failed
  bool ok = false;
  std::string error;    // empty when ok
  double wall_seconds = 0.0;
  std::optional<MetricReport> metrics;  // present when a reference was found

  friend bool operator==(const ImageRecord& a, const ImageRecord& b);
};

struct RunManifest {
  std::string command;  // "enhance" or "ablate"
  std::vector<std::string> inputs;
  std::string output_dir;
  EnhancementConfig config;
  std::vector<ImageRecord> records;

  bool all_ok() const noexcept;
  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string manifest_to_json(const RunManifest& m);
/// Throws DecodeError on malformed input.
RunManifest manifest_from_json(const std::string& text);

}  // namespace lowlight
