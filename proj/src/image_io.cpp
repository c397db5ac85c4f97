// Copyright 2026 the msa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// PNG support covers the subset this toolkit emits plus common test assets:
// 8-bit depth, color types 0/2/3/4/6, non-interlaced. Everything else is
// reported as an unsupported format rather than decoded approximately.

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "msa/error.hpp"
#include "msa/image.hpp"

namespace msa {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {137, 80, 78, 71,
                                                       13,  10, 26, 10};

std::uint32_t read_u32be(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

void append_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

int paeth_predictor(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

int channels_for_color_type(int color_type) {
  switch (color_type) {
    case 0: return 1;  // gray
    case 2: return 3;  // rgb
    case 3: return 1;  // palette index
    case 4: return 2;  // gray + alpha
    case 6: return 4;  // rgba
    default: return 0;
  }
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = kPngSignature.size();
  bool saw_ihdr = false;
  bool saw_iend = false;
  std::uint32_t width = 0, height = 0;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::vector<std::array<std::uint8_t, 3>> palette;

  while (pos < bytes.size() && !saw_iend) {
    if (pos + 8 > bytes.size()) {
      throw Error(ErrorCode::ParseError, "truncated png chunk header");
    }
    const std::uint32_t length = read_u32be(&bytes[pos]);
    const std::uint8_t* type = &bytes[pos + 4];
    if (pos + 8ull + length + 4ull > bytes.size()) {
      throw Error(ErrorCode::ParseError, "truncated png chunk");
    }
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t stored_crc = read_u32be(data + length);
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, type, length + 4);
    if (static_cast<std::uint32_t>(crc) != stored_crc) {
      throw Error(ErrorCode::ParseError, "png chunk crc mismatch");
    }
    const std::string name(reinterpret_cast<const char*>(type), 4);

    if (name == "IHDR") {
      if (length != 13) throw Error(ErrorCode::ParseError, "bad IHDR length");
      width = read_u32be(data);
      height = read_u32be(data + 4);
      const int bit_depth = data[8];
      color_type = data[9];
      const int compression = data[10];
      const int filter = data[11];
      const int interlace = data[12];
      if (width == 0 || height == 0) {
        throw Error(ErrorCode::EmptyImage, "zero-dimension png");
      }
      if (bit_depth != 8 || compression != 0 || filter != 0 ||
          interlace != 0 || channels_for_color_type(color_type) == 0) {
        throw Error(ErrorCode::UnsupportedFormat,
                    "png flavor not supported (need 8-bit non-interlaced)");
      }
      saw_ihdr = true;
    } else if (name == "PLTE") {
      if (length % 3 != 0) throw Error(ErrorCode::ParseError, "bad PLTE length");
      palette.resize(length / 3);
      for (std::size_t i = 0; i < palette.size(); ++i) {
        palette[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
      }
    } else if (name == "IDAT") {
      idat.insert(idat.end(), data, data + length);
    } else if (name == "IEND") {
      saw_iend = true;
    }
    // ancillary chunks are skipped
    pos += 8ull + length + 4ull;
  }

  if (!saw_ihdr || !saw_iend || idat.empty()) {
    throw Error(ErrorCode::ParseError, "png missing required chunks");
  }

  const int channels = channels_for_color_type(color_type);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  const std::size_t expected = (stride + 1) * height;
  std::vector<std::uint8_t> raw(expected);
  uLongf dest_len = expected;
  const int zret = uncompress(raw.data(), &dest_len, idat.data(),
                              static_cast<uLong>(idat.size()));
  if (zret != Z_OK || dest_len != expected) {
    throw Error(ErrorCode::ParseError, "png image data failed to inflate");
  }

  // undo per-scanline filtering in place
  const int bpp = channels;
  std::vector<std::uint8_t> prior(stride, 0);
  std::vector<std::uint8_t> pixels;
  pixels.reserve(static_cast<std::size_t>(width) * height);
  for (std::uint32_t y = 0; y < height; ++y) {
    std::uint8_t* row = &raw[y * (stride + 1)];
    const int filter = row[0];
    std::uint8_t* cur = row + 1;
    switch (filter) {
      case 0:
        break;
      case 1:  // Sub
        for (std::size_t x = bpp; x < stride; ++x) cur[x] += cur[x - bpp];
        break;
      case 2:  // Up
        for (std::size_t x = 0; x < stride; ++x) cur[x] += prior[x];
        break;
      case 3:  // Average
        for (std::size_t x = 0; x < stride; ++x) {
          const int left = x >= static_cast<std::size_t>(bpp) ? cur[x - bpp] : 0;
          cur[x] += static_cast<std::uint8_t>((left + prior[x]) / 2);
        }
        break;
      case 4:  // Paeth
        for (std::size_t x = 0; x < stride; ++x) {
          const int left = x >= static_cast<std::size_t>(bpp) ? cur[x - bpp] : 0;
          const int up_left =
              x >= static_cast<std::size_t>(bpp) ? prior[x - bpp] : 0;
          cur[x] += static_cast<std::uint8_t>(
              paeth_predictor(left, prior[x], up_left));
        }
        break;
      default:
        throw Error(ErrorCode::ParseError, "unknown png filter type");
    }
    std::memcpy(prior.data(), cur, stride);

    for (std::uint32_t x = 0; x < width; ++x) {
      const std::uint8_t* px = cur + static_cast<std::size_t>(x) * channels;
      std::uint8_t value = 0;
      switch (color_type) {
        case 0:
        case 4:
          value = px[0];
          break;
        case 2:
        case 6:
          value = luma_bt601(px[0], px[1], px[2]);
          break;
        case 3: {
          if (px[0] >= palette.size()) {
            throw Error(ErrorCode::ParseError, "palette index out of range");
          }
          const auto& rgb = palette[px[0]];
          value = luma_bt601(rgb[0], rgb[1], rgb[2]);
          break;
        }
      }
      pixels.push_back(value);
    }
  }

  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(pixels));
}

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(const std::vector<std::uint8_t>& bytes,
                           std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos]));
    ++pos;
  }
  if (token.empty()) {
    throw Error(ErrorCode::ParseError, "truncated pgm header");
  }
  return token;
}

long parse_pgm_int(const std::string& token) {
  std::size_t idx = 0;
  long value = 0;
  try {
    value = std::stol(token, &idx);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "non-numeric pgm header field");
  }
  if (idx != token.size()) {
    throw Error(ErrorCode::ParseError, "non-numeric pgm header field");
  }
  return value;
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 2;  // past "P5"
  const long width = parse_pgm_int(next_pgm_token(bytes, pos));
  const long height = parse_pgm_int(next_pgm_token(bytes, pos));
  const long maxval = parse_pgm_int(next_pgm_token(bytes, pos));
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::EmptyImage, "zero-dimension pgm");
  }
  if (maxval < 1 || maxval > 255) {
    throw Error(ErrorCode::UnsupportedFormat, "pgm maxval above 255");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (pos + count > bytes.size()) {
    throw Error(ErrorCode::ParseError, "truncated pgm pixel data");
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + pos,
                                   bytes.begin() + pos + count);
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(pixels));
}

void append_chunk(std::vector<std::uint8_t>& out, const char* name,
                  const std::vector<std::uint8_t>& data) {
  append_u32be(out, static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> body(name, name + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, body.data(), static_cast<uInt>(body.size()));
  append_u32be(out, static_cast<std::uint32_t>(crc));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "read failure on " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "write failure on " + path.string());
  }
}

}  // namespace

GrayImage decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= kPngSignature.size() &&
      std::memcmp(bytes.data(), kPngSignature.data(), kPngSignature.size()) ==
          0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    if (bytes[1] == '5') return decode_pgm(bytes);
    throw Error(ErrorCode::UnsupportedFormat,
                "only binary (P5) pgm is supported");
  }
  throw Error(ErrorCode::UnsupportedFormat, "not a png or pgm file");
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width());
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    raw.push_back(0);  // filter: none
    for (int x = 0; x < img.width(); ++x) raw.push_back(img.at(x, y));
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorCode::IoError, "png deflate failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> ihdr;
  append_u32be(ihdr, static_cast<std::uint32_t>(img.width()));
  append_u32be(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // no interlace

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});
  return out;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

GrayImage load_image(const std::filesystem::path& path) {
  return decode_image(read_file(path));
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
  write_file(path, encode_png(img));
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  write_file(path, encode_pgm(img));
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") {
    save_png(img, path);
  } else if (ext == ".pgm") {
    save_pgm(img, path);
  } else {
    throw Error(ErrorCode::UnsupportedFormat,
                "unknown image extension: " + ext);
  }
}

}  // namespace msa
