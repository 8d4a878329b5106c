#include "lowlight/manifest.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/serialization.hpp"

namespace lowlight {

using nlohmann::json;

bool operator==(const ImageRecord& a, const ImageRecord& b) {
  auto same_metrics = [](const std::optional<MetricReport>& x, const std::optional<MetricReport>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->psnr_db == y->psnr_db && x->ssim == y->ssim;
  };
  return a.input == b.input && a.output == b.output && a.ok == b.ok && a.error == b.error &&
         a.wall_seconds == b.wall_seconds && same_metrics(a.metrics, b.metrics);
}

bool RunManifest::all_ok() const noexcept {
  return std::all_of(records.begin(), records.end(), [](const ImageRecord& r) { return r.ok; });
}

std::string manifest_to_json(const RunManifest& m) {
  json records = json::array();
  for (const auto& r : m.records) {
    json rec{{"input", r.input},
             {"output", r.output},
             {"ok", r.ok},
             {"error", r.error},
             {"wall_seconds", r.wall_seconds}};
    if (r.metrics) {
      // JSON has no infinity; identical images are written as the string "inf".
      json psnr = std::isinf(r.metrics->psnr_db) ? json(format_psnr(r.metrics->psnr_db))
                                                 : json(r.metrics->psnr_db);
      rec["metrics"] = {{"psnr_db", psnr}, {"ssim", r.metrics->ssim}};
    }
    records.push_back(std::move(rec));
  }
  json j{{"command", m.command},
         {"inputs", m.inputs},
         {"output_dir", m.output_dir},
         {"config", json::parse(config_to_json(m.config))},
         {"records", std::move(records)}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.config = config_from_json(j.at("config").dump());
    for (const auto& rec : j.at("records")) {
      ImageRecord r;
      r.input = rec.at("input").get<std::string>();
      r.output = rec.at("output").get<std::string>();
      r.ok = rec.at("ok").get<bool>();
      r.error = rec.at("error").get<std::string>();
      r.wall_seconds = rec.at("wall_seconds").get<double>();
      if (auto it = rec.find("metrics"); it != rec.end()) {
        const json& p = it->at("psnr_db");
        MetricReport mr;
        mr.psnr_db = p.is_string() ? parse_psnr(p.get<std::string>()) : p.get<double>();
        mr.ssim = it->at("ssim").get<double>();
        r.metrics = mr;
      }
      m.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DecodeError(std::string("malformed manifest: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DecodeError(std::string("manifest config rejected: ") + e.what());
  }
  return m;
}

}  // namespace lowlight
