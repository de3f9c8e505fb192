#include "flowtie/io/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace flowtie::io {

PgmNormalization normalize_to_bytes(const std::vector<double>& values,
                                    std::vector<std::uint8_t>& bytes) {
  if (values.empty()) throw std::invalid_argument("normalize_to_bytes: empty input");
  PgmNormalization n;
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  n.min = *mn;
  n.max = *mx;
  bytes.resize(values.size());
  if (n.max == n.min) {
    n.degenerate = true;
    std::fill(bytes.begin(), bytes.end(), std::uint8_t(128));
    return n;
  }
  double scale = 255.0 / (n.max - n.min);
  for (std::size_t i = 0; i < values.size(); ++i)
    bytes[i] = std::uint8_t(std::lround((values[i] - n.min) * scale));
  return n;
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() != std::size_t(width) * height)
    throw std::invalid_argument("write_pgm: byte count does not match dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("not a P5 image: " + path);
  PgmImage img;
  int maxval = 0;
  in >> img.width >> img.height >> maxval;
  in.get();  // single whitespace after header
  if (maxval != 255) throw std::runtime_error("unsupported maxval in " + path);
  img.bytes.resize(std::size_t(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.bytes.data()), std::streamsize(img.bytes.size()));
  if (!in) throw std::runtime_error("truncated image: " + path);
  return img;
}

void write_sidecar(const std::string& path, const PgmNormalization& n) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write sidecar: " + path);
  out << "min " << n.min << "\n";
  out << "max " << n.max << "\n";
  out << "normalization (value - min) / (max - min) * 255, rounded\n";
  if (n.degenerate) out << "degenerate range: constant input mapped to 128\n";
}

}  // namespace flowtie::io
