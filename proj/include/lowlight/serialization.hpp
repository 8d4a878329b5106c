#pragma once

// JSON forms of the enhancement configuration and per-epoch loss traces.
// Doubles are written with round-trip precision, so parse(dump(x)) == x.

#include <string>
#include <vector>

#include "lowlight/pipeline.hpp"

namespace lowlight {

std::string config_to_json(const EnhancementConfig& cfg, int indent = 2);

/// Overlays the keys present in `text` onto `base`. Unknown keys, wrong types
/// and values that fail validation raise ArgumentError.
EnhancementConfig config_from_json(const std::string& text, const EnhancementConfig& base = {});

/// One object per line: {"epoch":i,"fidelity":..,"smoothness":..,"exposure":..,
/// "sparsity":..,"total":..}. No timing, so equal runs give equal bytes.
std::string trace_to_jsonl(const std::vector<LossReport>& epochs);
std::vector<LossReport> trace_from_jsonl(const std::string& text);

}  // namespace lowlight
