#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

enum class ImageFormat { png, jpeg };

/// Decode an 8-bit PNG or JPEG. Samples map to [0,1] as s / 255; colour inputs
/// give 3 channels, grayscale inputs 1. Alpha is dropped.
/// Throws DecodeError for malformed data and UnsupportedFormatError for
/// anything other than 8-bit PNG/JPEG (e.g. 16-bit PNG).
PlanarImage decode_image(std::span<const std::uint8_t> bytes);

/// Quantize with round-half-up, s -> floor(s * 255 + 0.5) clamped to [0,255].
std::vector<std::uint8_t> encode_image(const PlanarImage& img, ImageFormat format,
                                       int jpeg_quality = 95);

std::uint8_t quantize_sample(double s) noexcept;

PlanarImage read_image(const std::filesystem::path& path);
void write_image(const PlanarImage& img, const std::filesystem::path& path);

/// Format implied by the file extension (.png, .jpg, .jpeg; case-insensitive).
ImageFormat format_from_extension(const std::filesystem::path& path);
bool has_image_extension(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lowlight
