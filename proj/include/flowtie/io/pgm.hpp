#ifndef FLOWTIE_IO_PGM_HPP
#define FLOWTIE_IO_PGM_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace flowtie::io {

struct PgmNormalization {
  double min = 0.0, max = 0.0;
  bool degenerate = false;  // constant input, mapped to mid-gray
};

// Min-max normalization to 8-bit: round((x - min) / (max - min) * 255).
PgmNormalization normalize_to_bytes(const std::vector<double>& values,
                                    std::vector<std::uint8_t>& bytes);

// Binary P5 with header "P5\n<w> <h>\n255\n".
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& bytes);

struct PgmImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> bytes;
};
PgmImage read_pgm(const std::string& path);

void write_sidecar(const std::string& path, const PgmNormalization& n);

}  // namespace flowtie::io

#endif
