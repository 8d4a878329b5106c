#include "lowlight/codec.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {

std::uint8_t quantize_sample(double s) noexcept {
  if (!(s > 0.0)) return 0;
  const double q = std::floor(s * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::min(q, 255.0));
}

namespace {

PlanarImage from_bytes(const std::vector<std::uint8_t>& raw, std::size_t h, std::size_t w,
                       std::size_t c) {
  PlanarImage img(h, w, c);
  auto data = img.data();
  for (std::size_t i = 0; i < raw.size(); ++i) data[i] = raw[i] / 255.0;
  return img;
}

std::vector<std::uint8_t> to_bytes(const PlanarImage& img) {
  std::vector<std::uint8_t> raw(img.data().size());
  std::transform(img.data().begin(), img.data().end(), raw.begin(), quantize_sample);
  return raw;
}

// ---------------------------------------------------------------------------
// PNG (libpng, setjmp error handling; no C++ objects with destructors may live
// between setjmp and a longjmp out of libpng)

struct PngReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + count > src->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->data + src->offset, count);
  src->offset += count;
}

struct PngReadResult {
  std::vector<std::uint8_t> raw;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  char error[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* result = static_cast<PngReadResult*>(png_get_error_ptr(png));
  if (result) std::snprintf(result->error, sizeof(result->error), "%s", msg);
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Returns 0 on success, 1 on decode error, 2 on unsupported format.
int read_png(std::span<const std::uint8_t> bytes, PngReadResult& result) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &result, png_error_handler, png_warning_handler);
  if (!png) return 1;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return 1;
  }
  PngReadSource src{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return 1;
  }
  png_set_read_fn(png, &src, png_read_from_memory);
  png_read_info(png, info);
  result.width = png_get_image_width(png, info);
  result.height = png_get_image_height(png, info);
  result.bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (result.bit_depth == 16) {
    std::snprintf(result.error, sizeof(result.error), "16-bit PNG is not supported");
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return 2;
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && result.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  result.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  result.raw.resize(stride * result.height);
  rows->resize(result.height);
  for (png_uint_32 y = 0; y < result.height; ++y) (*rows)[y] = result.raw.data() + y * stride;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return 0;
}

PlanarImage decode_png(std::span<const std::uint8_t> bytes) {
  PngReadResult result;
  const int status = read_png(bytes, result);
  if (status == 2) throw UnsupportedFormatError(result.error);
  if (status != 0) throw DecodeError(std::string("malformed PNG: ") + result.error);
  if (result.channels != 1 && result.channels != 3) {
    throw UnsupportedFormatError("PNG with " + std::to_string(result.channels) + " channels");
  }
  return from_bytes(result.raw, result.height, result.width,
                    static_cast<std::size_t>(result.channels));
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode_png(const PlanarImage& img) {
  const std::vector<std::uint8_t> raw = to_bytes(img);
  auto* out = new std::vector<std::uint8_t>();
  auto* rows = new std::vector<png_bytep>(img.height());
  PngReadResult err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    delete out;
    delete rows;
    throw std::runtime_error(std::string("PNG encoding failed: ") + err.error);
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  const std::size_t stride = img.width() * img.channels();
  for (std::size_t y = 0; y < img.height(); ++y) {
    (*rows)[y] = const_cast<png_bytep>(raw.data() + y * stride);
  }
  png_set_rows(png, info, rows->data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  std::vector<std::uint8_t> result = std::move(*out);
  delete out;
  delete rows;
  return result;
}

// ---------------------------------------------------------------------------
// JPEG (libjpeg)

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

struct JpegReadResult {
  std::vector<std::uint8_t> raw;
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 0;
  bool unsupported = false;
  char error[JMSG_LENGTH_MAX] = {};
};

int read_jpeg(std::span<const std::uint8_t> bytes, JpegReadResult& result) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::snprintf(result.error, sizeof(result.error), "%s", err.message);
    jpeg_destroy_decompress(&cinfo);
    return 1;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.data_precision != 8 || cinfo.jpeg_color_space == JCS_CMYK ||
      cinfo.jpeg_color_space == JCS_YCCK) {
    std::snprintf(result.error, sizeof(result.error), "only 8-bit grayscale/RGB JPEG is supported");
    jpeg_destroy_decompress(&cinfo);
    return 2;
  }
  cinfo.out_color_space = cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  result.width = cinfo.output_width;
  result.height = cinfo.output_height;
  result.channels = cinfo.output_components;
  const std::size_t stride = result.width * static_cast<std::size_t>(result.channels);
  result.raw.resize(stride * result.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = result.raw.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return 0;
}

PlanarImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  JpegReadResult result;
  const int status = read_jpeg(bytes, result);
  if (status == 2) throw UnsupportedFormatError(result.error);
  if (status != 0) throw DecodeError(std::string("malformed JPEG: ") + result.error);
  return from_bytes(result.raw, result.height, result.width,
                    static_cast<std::size_t>(result.channels));
}

std::vector<std::uint8_t> encode_jpeg(const PlanarImage& img, int quality) {
  const std::vector<std::uint8_t> raw = to_bytes(img);
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw std::runtime_error(std::string("JPEG encoding failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = static_cast<int>(img.channels());
  cinfo.in_color_space = img.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = img.width() * img.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(raw.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

}  // namespace

PlanarImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw DecodeError("data is neither PNG nor JPEG");
}

std::vector<std::uint8_t> encode_image(const PlanarImage& img, ImageFormat format,
                                       int jpeg_quality) {
  if (img.pixel_count() == 0) throw ArgumentError("cannot encode an empty image");
  return format == ImageFormat::png ? encode_png(img) : encode_jpeg(img, jpeg_quality);
}

bool has_image_extension(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".jpg" || ext == ".jpeg") return ImageFormat::jpeg;
  throw UnsupportedFormatError("unsupported image extension '" + ext + "'");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

PlanarImage read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

void write_image(const PlanarImage& img, const std::filesystem::path& path) {
  write_file(path, encode_image(img, format_from_extension(path)));
}

}  // namespace lowlight
