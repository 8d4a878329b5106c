#include "lowlight/serialization.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "lowlight/errors.hpp"

namespace lowlight {

using nlohmann::json;

namespace {

json config_object(const EnhancementConfig& cfg) {
  const auto& net = cfg.network;
  return json{
      {"weights",
       {{"alpha", cfg.weights.alpha},
        {"beta", cfg.weights.beta},
        {"gamma", cfg.weights.gamma},
        {"delta", cfg.weights.delta}}},
      {"exposure", {{"L", cfg.exposure.target_level}, {"region_side", cfg.exposure.region_side}}},
      {"window", cfg.window.side()},
      {"epochs", cfg.epochs},
      {"lr", cfg.lr},
      {"working_size", cfg.working_size},
      {"guided_filter", {{"radius", cfg.guided.radius}, {"eps", cfg.guided.eps}}},
      {"illum_floor", cfg.illum_floor},
      {"seed", cfg.seed},
      {"network",
       {{"hidden", net.hidden},
        {"branch_out", net.branch_out},
        {"head_hidden", net.head_hidden},
        {"first_omega", net.first_omega},
        {"hidden_omega", net.hidden_omega},
        {"init_omega", net.init_omega}}},
  };
}

// Reads j[key] into `out` if present; rejects keys not listed in `allowed`.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ArgumentError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned()) throw ArgumentError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ArgumentError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ArgumentError("");
      }
      out = it->template get<T>();
    } catch (const std::exception&) {
      throw ArgumentError(where_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw ArgumentError("unknown config key " + where_ + "." + it.key());
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace

std::string config_to_json(const EnhancementConfig& cfg, int indent) {
  return config_object(cfg).dump(indent);
}

EnhancementConfig config_from_json(const std::string& text, const EnhancementConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  EnhancementConfig cfg = base;
  Reader root(j, "config");
  if (const json* w = root.child("weights")) {
    Reader r(*w, "weights");
    r.get("alpha", cfg.weights.alpha);
    r.get("beta", cfg.weights.beta);
    r.get("gamma", cfg.weights.gamma);
    r.get("delta", cfg.weights.delta);
    r.finish();
  }
  if (const json* e = root.child("exposure")) {
    Reader r(*e, "exposure");
    r.get("L", cfg.exposure.target_level);
    r.get("region_side", cfg.exposure.region_side);
    r.finish();
  }
  int window = cfg.window.side();
  root.get("window", window);
  cfg.window = ContextWindowSpec(window);
  root.get("epochs", cfg.epochs);
  root.get("lr", cfg.lr);
  root.get("working_size", cfg.working_size);
  if (const json* g = root.child("guided_filter")) {
    Reader r(*g, "guided_filter");
    r.get("radius", cfg.guided.radius);
    r.get("eps", cfg.guided.eps);
    r.finish();
  }
  root.get("illum_floor", cfg.illum_floor);
  root.get("seed", cfg.seed);
  if (const json* n = root.child("network")) {
    Reader r(*n, "network");
    r.get("hidden", cfg.network.hidden);
    r.get("branch_out", cfg.network.branch_out);
    r.get("head_hidden", cfg.network.head_hidden);
    r.get("first_omega", cfg.network.first_omega);
    r.get("hidden_omega", cfg.network.hidden_omega);
    r.get("init_omega", cfg.network.init_omega);
    r.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

std::string trace_to_jsonl(const std::vector<LossReport>& epochs) {
  std::string out;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& r = epochs[i];
    json line{{"epoch", i},
              {"fidelity", r.fidelity},
              {"smoothness", r.smoothness},
              {"exposure", r.exposure},
              {"sparsity", r.sparsity},
              {"total", r.total}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<LossReport> trace_from_jsonl(const std::string& text) {
  std::vector<LossReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.at("epoch").get<std::size_t>() != out.size()) {
        throw DecodeError("trace epochs are not consecutive");
      }
      LossReport r;
      r.fidelity = j.at("fidelity").get<double>();
      r.smoothness = j.at("smoothness").get<double>();
      r.exposure = j.at("exposure").get<double>();
      r.sparsity = j.at("sparsity").get<double>();
      r.total = j.at("total").get<double>();
      out.push_back(r);
    } catch (const json::exception& e) {
      throw DecodeError(std::string("malformed trace line: ") + e.what());
    }
  }
  return out;
}

}  // namespace lowlight
