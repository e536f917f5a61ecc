#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "aoifl/learning.hpp"

namespace aoifl {
namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("truncated IDX header in " + path);
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::vector<Sample> load_idx(const std::string& images_path, const std::string& labels_path,
                             std::size_t limit) {
  auto images = open_binary(images_path);
  auto labels = open_binary(labels_path);

  if (read_be32(images, images_path) != 0x00000803u) {
    throw std::runtime_error("bad IDX image magic in " + images_path);
  }
  if (read_be32(labels, labels_path) != 0x00000801u) {
    throw std::runtime_error("bad IDX label magic in " + labels_path);
  }
  const std::uint32_t n_images = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  const std::uint32_t n_labels = read_be32(labels, labels_path);
  if (n_images != n_labels) {
    throw std::runtime_error("IDX image and label counts differ");
  }

  std::size_t count = n_images;
  if (limit != 0 && limit < count) count = limit;
  const std::size_t pixels = std::size_t{rows} * cols;

  std::vector<Sample> out(count);
  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < count; ++i) {
    if (!images.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(pixels))) {
      throw std::runtime_error("truncated IDX image data in " + images_path);
    }
    char label = 0;
    if (!labels.get(label)) throw std::runtime_error("truncated IDX label data in " + labels_path);
    out[i].label = static_cast<unsigned char>(label);
    out[i].features.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p) out[i].features[p] = buf[p] / 255.0;
  }
  return out;
}

}  // namespace aoifl
