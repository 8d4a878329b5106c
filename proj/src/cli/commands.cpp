#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lowlight/cli.hpp"
#include "lowlight/codec.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/manifest.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/serialization.hpp"

namespace lowlight::cli {

namespace {

constexpr const char* kEnhancedSuffix = "_enhanced";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

fs::path enhanced_name(const fs::path& input) {
  return input.stem().string() + kEnhancedSuffix + input.extension().string();
}

std::map<std::string, fs::path> index_by_key(const std::vector<fs::path>& files) {
  std::map<std::string, fs::path> out;
  for (const auto& f : files) out.emplace(match_key(f), f);
  return out;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(v)) {
      throw UsageError(std::string("invalid ") + what + " value '" + part + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

double mean_psnr(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string match_key(const fs::path& p) {
  std::string stem = p.stem().string();
  const std::string suffix = kEnhancedSuffix;
  if (stem.size() > suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem;
}

AblationSweep parse_sweep(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw UsageError("--sweep needs a kind");
  const std::string& kind = tokens[0];
  const bool has_values = tokens.size() > 1;
  AblationSweep sweep;
  try {
    if (kind == "window") {
      sweep.kind = SweepKind::window;
      const auto values = has_values ? parse_list(tokens[1], "window") : std::vector<double>{1, 3, 5, 7};
      for (double v : values) {
        if (v != std::floor(v)) throw UsageError("window sizes must be integers");
        sweep.windows.push_back(ContextWindowSpec(static_cast<int>(v)).side());
      }
    } else if (kind == "L") {
      sweep.kind = SweepKind::exposure_level;
      sweep.levels = has_values ? parse_list(tokens[1], "L") : std::vector<double>{0.3, 0.5, 0.7, 0.9};
    } else if (kind == "loss-mask") {
      sweep.kind = SweepKind::loss_mask;
      if (has_values) {
        std::stringstream ss(tokens[1]);
        std::string part;
        while (std::getline(ss, part, ',')) sweep.masks.push_back(LossMask::parse(part));
      } else {
        sweep.masks = LossMask::standard_set();
      }
    } else {
      throw UsageError("unknown sweep kind '" + kind + "' (window, L, loss-mask)");
    }
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (sweep.size() == 0) throw UsageError("sweep has no settings");
  return sweep;
}

// ---------------------------------------------------------------------------

int cmd_enhance(const EnhanceOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& in : opt.inputs) {
    if (!fs::exists(in)) throw UsageError("input does not exist: " + in.string());
    if (fs::is_directory(in)) {
      const auto found = list_images(in);
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw UsageError("no PNG or JPEG files found in the given inputs");
  {
    std::map<fs::path, fs::path> seen;
    for (const auto& f : files) {
      auto [it, fresh] = seen.emplace(enhanced_name(f), f);
      if (!fresh) {
        throw UsageError("inputs " + it->second.string() + " and " + f.string() +
                         " would write the same output file");
      }
    }
  }

  std::map<std::string, fs::path> references;
  if (opt.reference) {
    if (!fs::exists(*opt.reference)) throw UsageError("reference does not exist: " + opt.reference->string());
    if (fs::is_directory(*opt.reference)) {
      references = index_by_key(list_images(*opt.reference));
    } else if (files.size() == 1) {
      references.emplace(match_key(files[0]), *opt.reference);
    } else {
      throw UsageError("--reference must be a directory when enhancing several images");
    }
  }

  fs::create_directories(opt.output);
  std::vector<ImageRecord> records(files.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};

  auto process = [&](std::size_t i) {
    const fs::path& file = files[i];
    ImageRecord& rec = records[i];
    rec.input = file.generic_string();
    const Timer timer;
    try {
      const PlanarImage img = read_image(file);
      const EnhancementResult res = enhance(img, opt.config);
      const fs::path target = opt.output / enhanced_name(file);
      write_image(res.enhanced, target);
      const std::string stem = file.stem().string();
      if (opt.trace) write_text(opt.output / (stem + "_trace.jsonl"), trace_to_jsonl(res.trace.epochs));
      if (opt.save_params) {
        std::ofstream f(opt.output / (stem + "_params.bin"), std::ios::binary);
        nn::save_snapshot(f, res.params);
      }
      if (auto it = references.find(match_key(file)); it != references.end()) {
        const PlanarImage ref = read_image(it->second);
        try {
          rec.metrics = compare(res.enhanced, ref);
        } catch (const ArgumentError& e) {
          std::lock_guard lock(log_mutex);
          err << "warning: " << file.filename().string() << ": no metrics (" << e.what() << ")\n";
        }
      }
      rec.output = target.generic_string();
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_seconds = timer.seconds();
    std::lock_guard lock(log_mutex);
    if (rec.ok) {
      err << "[done] " << file.filename().string() << " (" << fmt(rec.wall_seconds) << " s)\n";
    } else {
      err << "[fail] " << file.filename().string() << ": " << rec.error << "\n";
    }
  };

  const auto workers = static_cast<std::size_t>(std::min<int>(opt.jobs, static_cast<int>(files.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) process(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < files.size(); i = next++) process(i);
      });
    }
  }

  RunManifest manifest;
  manifest.command = "enhance";
  for (const auto& in : opt.inputs) manifest.inputs.push_back(in.generic_string());
  manifest.output_dir = opt.output.generic_string();
  manifest.config = opt.config;
  manifest.records = std::move(records);
  write_text(opt.output / "manifest.json", manifest_to_json(manifest));

  const auto ok = std::count_if(manifest.records.begin(), manifest.records.end(),
                                [](const ImageRecord& r) { return r.ok; });
  out << "enhanced " << ok << "/" << manifest.records.size() << " images into "
      << opt.output.generic_string() << "\n";
  for (const auto& r : manifest.records) {
    if (r.metrics) {
      out << "  " << fs::path(r.input).filename().string() << "  PSNR " << format_psnr(r.metrics->psnr_db)
          << " dB  SSIM " << fmt(r.metrics->ssim) << "\n";
    }
  }
  return manifest.all_ok() ? kExitOk : kExitPartialFailure;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  for (const auto* dir : {&opt.enhanced, &opt.reference}) {
    if (!fs::is_directory(*dir)) throw UsageError("not a directory: " + dir->string());
  }
  const auto enhanced = index_by_key(list_images(opt.enhanced));
  const auto reference = index_by_key(list_images(opt.reference));

  std::vector<std::string> keys;
  for (const auto& [key, path] : enhanced) {
    if (reference.count(key)) {
      keys.push_back(key);
    } else {
      err << "warning: no reference for " << path.filename().string() << ", skipped\n";
    }
  }
  for (const auto& [key, path] : reference) {
    if (!enhanced.count(key)) err << "warning: no enhanced image for " << path.filename().string() << ", skipped\n";
  }
  if (keys.empty()) throw UsageError("no enhanced image has a matching reference");

  struct Row {
    std::string name;
    MetricReport m;
  };
  std::vector<Row> rows;
  bool failed = false;
  for (const auto& key : keys) {
    try {
      rows.push_back({key, compare(read_image(enhanced.at(key)), read_image(reference.at(key)))});
    } catch (const std::exception& e) {
      failed = true;
      err << "error: " << key << ": " << e.what() << "\n";
    }
  }

  std::string csv = "image,psnr_db,ssim\n";
  std::ostringstream table;
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto line = [&](const std::string& name, const std::string& p, const std::string& s) {
    table << name << std::string(width - name.size() + 2, ' ') << std::string(p.size() < 10 ? 10 - p.size() : 0, ' ')
          << p << "  " << s << "\n";
  };
  line("image", "PSNR (dB)", "SSIM");
  std::vector<double> psnrs;
  double ssim_sum = 0.0;
  for (const auto& r : rows) {
    csv += r.name + "," + format_psnr(r.m.psnr_db) + "," + fmt(r.m.ssim) + "\n";
    line(r.name, format_psnr(r.m.psnr_db), fmt(r.m.ssim));
    psnrs.push_back(r.m.psnr_db);
    ssim_sum += r.m.ssim;
  }
  if (!rows.empty()) {
    const double mp = mean_psnr(psnrs);
    const double ms = ssim_sum / static_cast<double>(rows.size());
    csv += "mean," + format_psnr(mp) + "," + fmt(ms) + "\n";
    line("mean", format_psnr(mp), fmt(ms));
  }

  const fs::path dir = opt.output.value_or(opt.enhanced);
  fs::create_directories(dir);
  write_text(dir / "evaluation.csv", csv);
  write_text(dir / "evaluation.txt", table.str());
  out << table.str();
  return failed ? kExitPartialFailure : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(opt.input)) throw UsageError("input is not a file: " + opt.input.string());
  if (opt.reference && !fs::is_regular_file(*opt.reference)) {
    throw UsageError("reference is not a file: " + opt.reference->string());
  }
  fs::create_directories(opt.output);

  RunManifest manifest;
  manifest.command = "ablate";
  manifest.inputs = {opt.input.generic_string()};
  manifest.output_dir = opt.output.generic_string();
  manifest.config = opt.config;

  std::optional<PlanarImage> reference;
  std::vector<AblationRow> rows;
  const Timer timer;
  try {
    const PlanarImage img = read_image(opt.input);
    if (opt.reference) reference = read_image(*opt.reference);
    rows = ablate(img, opt.config, opt.sweep, reference ? &*reference : nullptr);
  } catch (const std::exception& e) {
    ImageRecord rec;
    rec.input = opt.input.generic_string();
    rec.error = e.what();
    rec.wall_seconds = timer.seconds();
    manifest.records.push_back(rec);
    write_text(opt.output / "manifest.json", manifest_to_json(manifest));
    err << "[fail] " << opt.input.filename().string() << ": " << e.what() << "\n";
    return kExitPartialFailure;
  }

  const std::string kind = sweep_kind_name(opt.sweep.kind);
  std::string csv = "sweep,setting,mean_value,illumination_tv,initial_loss,final_loss,psnr_db,ssim\n";
  const double per_row = timer.seconds() / static_cast<double>(rows.size());
  for (const auto& row : rows) {
    const fs::path dir = opt.output / row.label;
    fs::create_directories(dir);
    const fs::path target = dir / enhanced_name(opt.input);
    write_image(row.result.enhanced, target);
    write_text(dir / "config.json", config_to_json(row.config) + "\n");
    if (opt.trace) write_text(dir / "trace.jsonl", trace_to_jsonl(row.result.trace.epochs));

    const auto& epochs = row.result.trace.epochs;
    csv += kind + "," + row.label + "," + fmt(row.mean_value) + "," + fmt(row.illumination_tv) + "," +
           fmt(epochs.front().total) + "," + fmt(epochs.back().total) + ",";
    csv += row.metrics ? format_psnr(row.metrics->psnr_db) + "," + fmt(row.metrics->ssim) : std::string(",");
    csv += "\n";

    ImageRecord rec;
    rec.input = opt.input.generic_string();
    rec.output = target.generic_string();
    rec.ok = true;
    rec.wall_seconds = per_row;
    rec.metrics = row.metrics;
    manifest.records.push_back(rec);
    out << row.label << "  mean V " << fmt(row.mean_value) << "  illumination TV " << fmt(row.illumination_tv)
        << "\n";
  }
  write_text(opt.output / "ablation.csv", csv);
  write_text(opt.output / "manifest.json", manifest_to_json(manifest));
  return kExitOk;
}

}  // namespace lowlight::cli
