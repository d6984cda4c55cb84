// SPDX-License-Identifier: Apache-2.0
#include "handact/detect/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace handact::detect {

namespace {

[[noreturn]] void parse_error(const std::string& msg) {
  throw DetectionError(DetectionError::Kind::ParseError, "pnm: " + msg);
}

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& s) : s_(s) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      parse_error("expected integer at byte " + std::to_string(pos_));
    }
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 1'000'000) parse_error("value too large");
    }
    return static_cast<int>(v);
  }
  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Image parse_pnm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') parse_error("missing magic number");
  const char kind = bytes[1];
  int channels = 0;
  bool binary = false;
  switch (kind) {
    case '2': channels = 1; break;
    case '3': channels = 3; break;
    case '5': channels = 1; binary = true; break;
    case '6': channels = 3; binary = true; break;
    default: parse_error(std::string("unsupported type P") + kind);
  }
  HeaderReader in(bytes);
  in.advance(2);
  const int width = in.next_int();
  const int height = in.next_int();
  const int maxval = in.next_int();
  if (width <= 0 || height <= 0) parse_error("non-positive size");
  if (maxval <= 0 || maxval > 255) parse_error("maxval must be in 1..255");

  Image img(width, height, channels);
  const double scale = 1.0 / maxval;
  if (binary) {
    const std::size_t start = in.pos() + 1;  // single whitespace after maxval
    if (bytes.size() < start + img.data.size()) parse_error("truncated pixel data");
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      img.data[i] = static_cast<unsigned char>(bytes[start + i]) * scale;
    }
  } else {
    for (double& v : img.data) {
      const int raw = in.next_int();
      if (raw > maxval) parse_error("sample exceeds maxval");
      v = raw * scale;
    }
  }
  return img;
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DetectionError(DetectionError::Kind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_pnm(ss.str());
  } catch (const DetectionError& e) {
    throw DetectionError(e.kind(), path.string() + ": " + e.what());
  }
}

std::string encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw DetectionError(DetectionError::Kind::IoError, "pnm needs 1 or 3 channels");
  }
  std::string out = (image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DetectionError(DetectionError::Kind::IoError, "cannot write " + path.string());
  const std::string bytes = encode_pnm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  Image g(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      g.at(x, y, 0) = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
    }
  }
  return g;
}

Image flip_horizontal(const Image& image) {
  Image out = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = image.at(image.width - 1 - x, y, c);
    }
  }
  return out;
}

}  // namespace handact::detect
