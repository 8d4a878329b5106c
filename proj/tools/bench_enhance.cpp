// Times one default enhancement of an image and prints per-epoch throughput.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "lowlight/codec.hpp"
#include "lowlight/kernels.hpp"
#include "lowlight/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s IMAGE [EPOCHS]\n", argv[0]);
    return 2;
  }
  try {
    lowlight::EnhancementConfig cfg;
    if (argc > 2) cfg.epochs = std::atoi(argv[2]);
    const auto img = lowlight::read_image(argv[1]);
    const auto res = lowlight::enhance(img, cfg);
    const auto& e = res.trace.epochs;
    std::printf("isa=%s epochs=%d loss %.6f -> %.6f  %.2f s (%.3f s/epoch)\n",
                std::string(lowlight::simd::isa_name(lowlight::simd::active_isa())).c_str(), cfg.epochs, e.front().total,
                e.back().total, res.trace.wall_seconds, res.trace.wall_seconds / cfg.epochs);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
