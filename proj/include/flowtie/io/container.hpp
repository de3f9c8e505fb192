#ifndef FLOWTIE_IO_CONTAINER_HPP
#define FLOWTIE_IO_CONTAINER_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace flowtie::io {

// Binary tensor file: magic "NTC1", dtype u8, ndim u8, shape as ndim
// little-endian u64, payload row-major little-endian.
enum class Dtype : std::uint8_t { F32 = 1, F64 = 2, C64 = 3, C128 = 4 };

std::size_t dtype_size(Dtype d);
std::string dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name);

struct TensorData {
  Dtype dtype = Dtype::F64;
  std::vector<std::uint64_t> shape;
  std::vector<char> payload;

  std::uint64_t count() const;
  std::vector<double> as_f64() const;                 // F32/F64
  std::vector<std::complex<double>> as_c128() const;  // C64/C128
};

void write_tensor_file(const std::string& path, const TensorData& t);
TensorData read_tensor_file(const std::string& path);

TensorData make_f64(const std::vector<std::uint64_t>& shape, const std::vector<double>& data);
TensorData make_c128(const std::vector<std::uint64_t>& shape,
                     const std::vector<std::complex<double>>& data);

// Manifest: JSON document mapping tensor names to files with shape/dtype
// echoes, plus free-form scalar metadata.
class Manifest {
 public:
  Manifest() { j_["tensors"] = nlohmann::json::object(); j_["metadata"] = nlohmann::json::object(); }

  nlohmann::json& metadata() { return j_["metadata"]; }
  const nlohmann::json& metadata() const { return j_.at("metadata"); }

  // Writes the tensor next to the manifest and records it.
  void add_tensor(const std::string& dir, const std::string& name, const TensorData& t);
  TensorData load_tensor(const std::string& dir, const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  std::vector<std::string> tensor_names() const;

  void save(const std::string& path) const;
  static Manifest load(const std::string& path);

 private:
  nlohmann::json j_;
};

}  // namespace flowtie::io

#endif
