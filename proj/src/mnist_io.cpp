#include "xbar/mnist_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace xbar {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& data,
                                 const std::string& path) {
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit2(&zs, 15 + 16) != Z_OK) {  // +16: gzip wrapper
    throw std::runtime_error("zlib init failed for " + path);
  }
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("gzip decompression failed for " + path +
                               " (zlib rc " + std::to_string(rc) + ")");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  std::vector<std::uint8_t> data = read_file(path);
  if (data.size() >= 2 && data[0] == 0x1f && data[1] == 0x8b) {
    return gunzip(data, path);
  }
  return data;
}

std::uint32_t be32(const std::vector<std::uint8_t>& data, std::size_t offset,
                   const std::string& path) {
  if (offset + 4 > data.size()) {
    throw std::runtime_error(path + ": truncated header (need " +
                             std::to_string(offset + 4) + " bytes, have " +
                             std::to_string(data.size()) + ")");
  }
  return (static_cast<std::uint32_t>(data[offset]) << 24) |
         (static_cast<std::uint32_t>(data[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(data[offset + 2]) << 8) |
         static_cast<std::uint32_t>(data[offset + 3]);
}

}  // namespace

RawImages load_idx_images(const std::string& path) {
  const std::vector<std::uint8_t> data = read_maybe_gzip(path);
  const std::uint32_t magic = be32(data, 0, path);
  if (magic != 0x00000803u) {
    char got[16];
    std::snprintf(got, sizeof(got), "0x%08x", magic);
    throw std::runtime_error(path + ": bad image magic " + got +
                             " (expected 0x00000803)");
  }
  RawImages raw;
  raw.count = static_cast<int>(be32(data, 4, path));
  raw.rows = static_cast<int>(be32(data, 8, path));
  raw.cols = static_cast<int>(be32(data, 12, path));
  if (raw.rows != 28 || raw.cols != 28) {
    throw std::runtime_error(path + ": image dimensions " +
                             std::to_string(raw.rows) + "x" +
                             std::to_string(raw.cols) + " (expected 28x28)");
  }
  const std::size_t expected =
      16 + static_cast<std::size_t>(raw.count) * raw.rows * raw.cols;
  if (data.size() != expected) {
    throw std::runtime_error(path + ": payload is " +
                             std::to_string(data.size()) + " bytes, header "
                             "promises " + std::to_string(expected));
  }
  raw.pixels.assign(data.begin() + 16, data.end());
  return raw;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
  const std::vector<std::uint8_t> data = read_maybe_gzip(path);
  const std::uint32_t magic = be32(data, 0, path);
  if (magic != 0x00000801u) {
    char got[16];
    std::snprintf(got, sizeof(got), "0x%08x", magic);
    throw std::runtime_error(path + ": bad label magic " + got +
                             " (expected 0x00000801)");
  }
  const std::uint32_t count = be32(data, 4, path);
  const std::size_t expected = 8 + count;
  if (data.size() != expected) {
    throw std::runtime_error(path + ": payload is " +
                             std::to_string(data.size()) + " bytes, header "
                             "promises " + std::to_string(expected));
  }
  std::vector<std::uint8_t> labels(data.begin() + 8, data.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) {
      throw std::runtime_error(path + ": label " +
                               std::to_string(labels[i]) + " at index " +
                               std::to_string(i) + " outside 0..9");
    }
  }
  return labels;
}

Dataset load_dataset(const std::string& images_path,
                     const std::string& labels_path) {
  RawImages raw = load_idx_images(images_path);
  std::vector<std::uint8_t> labels = load_idx_labels(labels_path);
  if (static_cast<std::size_t>(raw.count) != labels.size()) {
    throw std::runtime_error("image/label count mismatch: " + images_path +
                             " has " + std::to_string(raw.count) + ", " +
                             labels_path + " has " +
                             std::to_string(labels.size()));
  }
  Dataset data;
  data.count = raw.count;
  data.labels = std::move(labels);
  data.pixels.resize(raw.pixels.size());
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    data.pixels[i] = raw.pixels[i] / 255.0;
  }
  return data;
}

Dataset head(const Dataset& data, int count) { return slice(data, 0, count); }

Dataset slice(const Dataset& data, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > data.count) {
    throw std::out_of_range("dataset slice [" + std::to_string(begin) + ", " +
                            std::to_string(begin + count) + ") outside 0.." +
                            std::to_string(data.count));
  }
  Dataset out;
  out.count = count;
  out.pixels.assign(
      data.pixels.begin() +
          static_cast<std::size_t>(begin) * Dataset::kImageSize,
      data.pixels.begin() +
          static_cast<std::size_t>(begin + count) * Dataset::kImageSize);
  out.labels.assign(data.labels.begin() + begin,
                    data.labels.begin() + begin + count);
  return out;
}

}  // namespace xbar
