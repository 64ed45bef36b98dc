#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xbar {

// Normalized MNIST split: pixels row-major per image, each byte scaled by
// 1/255 so the byte range's maximum lands exactly on 1.
struct Dataset {
  int count = 0;
  std::vector<double> pixels;         // count * 784
  std::vector<std::uint8_t> labels;   // count entries, 0..9

  static constexpr int kImageSize = 784;

  const double* image(int i) const {
    return pixels.data() + static_cast<std::size_t>(i) * kImageSize;
  }
};

struct RawImages {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

// IDX parsers. Both accept gzip-compressed files transparently (sniffed by
// the 0x1f 0x8b magic) and throw std::runtime_error with the offending path
// and values on malformed input.
RawImages load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

// Pairs image and label files, enforcing matching counts and 28x28 images,
// and normalizes pixels to [0, 1].
Dataset load_dataset(const std::string& images_path,
                     const std::string& labels_path);

// First `count` samples (for pilot calibration runs).
Dataset head(const Dataset& data, int count);
// Samples [begin, begin + count).
Dataset slice(const Dataset& data, int begin, int count);

}  // namespace xbar
