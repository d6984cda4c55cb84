// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace handact::detect {

class DetectionError : public std::runtime_error {
 public:
  enum class Kind { MissingAnnotation, NoHandDetected, InvalidBox, ParseError, IoError };

  DetectionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Interleaved (HWC) image with channel values in [0, 1]. One channel is
/// grayscale, three are RGB.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

/// Reads binary (P5/P6) or ASCII (P2/P3) netpbm with maxval up to 255.
Image read_pnm(const std::filesystem::path& path);
Image parse_pnm(const std::string& bytes);
/// Writes P6 for three channels and P5 for one, quantised to 8 bits.
void write_pnm(const std::filesystem::path& path, const Image& image);
std::string encode_pnm(const Image& image);

/// Luma 0.299 R + 0.587 G + 0.114 B; grayscale input is returned unchanged.
Image to_grayscale(const Image& image);

/// Mirror left to right.
Image flip_horizontal(const Image& image);

}  // namespace handact::detect
