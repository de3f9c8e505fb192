#include "flowtie/io/container.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace flowtie::io {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'C', '1'};

// On-disk layout is little-endian; this implementation targets little-endian
// hosts (checked at startup of read/write).
bool host_is_little_endian() {
  std::uint16_t x = 1;
  char c;
  std::memcpy(&c, &x, 1);
  return c == 1;
}

void require_le() {
  if (!host_is_little_endian())
    throw std::runtime_error("NTC1 container: big-endian hosts not supported");
}

}  // namespace

std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::F32: return 4;
    case Dtype::F64: return 8;
    case Dtype::C64: return 8;
    case Dtype::C128: return 16;
  }
  throw std::invalid_argument("bad dtype code");
}

std::string dtype_name(Dtype d) {
  switch (d) {
    case Dtype::F32: return "f32";
    case Dtype::F64: return "f64";
    case Dtype::C64: return "c64";
    case Dtype::C128: return "c128";
  }
  throw std::invalid_argument("bad dtype code");
}

Dtype dtype_from_name(const std::string& name) {
  if (name == "f32") return Dtype::F32;
  if (name == "f64") return Dtype::F64;
  if (name == "c64") return Dtype::C64;
  if (name == "c128") return Dtype::C128;
  throw std::invalid_argument("bad dtype name: " + name);
}

std::uint64_t TensorData::count() const {
  std::uint64_t n = 1;
  for (std::uint64_t s : shape) n *= s;
  return n;
}

std::vector<double> TensorData::as_f64() const {
  std::uint64_t n = count();
  std::vector<double> out(n);
  if (dtype == Dtype::F64) {
    std::memcpy(out.data(), payload.data(), n * 8);
  } else if (dtype == Dtype::F32) {
    const float* p = reinterpret_cast<const float*>(payload.data());
    for (std::uint64_t i = 0; i < n; ++i) out[i] = p[i];
  } else {
    throw std::runtime_error("TensorData::as_f64 on complex tensor");
  }
  return out;
}

std::vector<std::complex<double>> TensorData::as_c128() const {
  std::uint64_t n = count();
  std::vector<std::complex<double>> out(n);
  if (dtype == Dtype::C128) {
    std::memcpy(out.data(), payload.data(), n * 16);
  } else if (dtype == Dtype::C64) {
    const float* p = reinterpret_cast<const float*>(payload.data());
    for (std::uint64_t i = 0; i < n; ++i) out[i] = {p[2 * i], p[2 * i + 1]};
  } else {
    throw std::runtime_error("TensorData::as_c128 on real tensor");
  }
  return out;
}

void write_tensor_file(const std::string& path, const TensorData& t) {
  require_le();
  if (t.payload.size() != t.count() * dtype_size(t.dtype))
    throw std::invalid_argument("write_tensor_file: payload length does not match shape");
  if (t.shape.size() > 255) throw std::invalid_argument("write_tensor_file: too many dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write tensor file: " + path);
  out.write(kMagic, 4);
  std::uint8_t dt = std::uint8_t(t.dtype);
  std::uint8_t nd = std::uint8_t(t.shape.size());
  out.write(reinterpret_cast<const char*>(&dt), 1);
  out.write(reinterpret_cast<const char*>(&nd), 1);
  for (std::uint64_t s : t.shape) out.write(reinterpret_cast<const char*>(&s), 8);
  out.write(t.payload.data(), std::streamsize(t.payload.size()));
  if (!out) throw std::runtime_error("short write on tensor file: " + path);
}

TensorData read_tensor_file(const std::string& path) {
  require_le();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad magic in tensor file: " + path);
  std::uint8_t dt = 0, nd = 0;
  in.read(reinterpret_cast<char*>(&dt), 1);
  in.read(reinterpret_cast<char*>(&nd), 1);
  if (!in || dt < 1 || dt > 4) throw std::runtime_error("bad dtype in tensor file: " + path);
  TensorData t;
  t.dtype = Dtype(dt);
  t.shape.resize(nd);
  for (int i = 0; i < nd; ++i) in.read(reinterpret_cast<char*>(&t.shape[i]), 8);
  t.payload.resize(t.count() * dtype_size(t.dtype));
  in.read(t.payload.data(), std::streamsize(t.payload.size()));
  if (!in) throw std::runtime_error("truncated tensor file: " + path);
  return t;
}

TensorData make_f64(const std::vector<std::uint64_t>& shape, const std::vector<double>& data) {
  TensorData t;
  t.dtype = Dtype::F64;
  t.shape = shape;
  if (t.count() != data.size()) throw std::invalid_argument("make_f64: shape/data mismatch");
  t.payload.resize(data.size() * 8);
  std::memcpy(t.payload.data(), data.data(), t.payload.size());
  return t;
}

TensorData make_c128(const std::vector<std::uint64_t>& shape,
                     const std::vector<std::complex<double>>& data) {
  TensorData t;
  t.dtype = Dtype::C128;
  t.shape = shape;
  if (t.count() != data.size()) throw std::invalid_argument("make_c128: shape/data mismatch");
  t.payload.resize(data.size() * 16);
  std::memcpy(t.payload.data(), data.data(), t.payload.size());
  return t;
}

void Manifest::add_tensor(const std::string& dir, const std::string& name, const TensorData& t) {
  std::string file = name + ".ntc";
  write_tensor_file(dir + "/" + file, t);
  nlohmann::json e;
  e["file"] = file;
  e["dtype"] = dtype_name(t.dtype);
  e["shape"] = t.shape;
  j_["tensors"][name] = e;
}

TensorData Manifest::load_tensor(const std::string& dir, const std::string& name) const {
  if (!has_tensor(name)) throw std::runtime_error("manifest has no tensor '" + name + "'");
  const nlohmann::json& e = j_.at("tensors").at(name);
  TensorData t = read_tensor_file(dir + "/" + e.at("file").get<std::string>());
  if (dtype_name(t.dtype) != e.at("dtype").get<std::string>() ||
      t.shape != e.at("shape").get<std::vector<std::uint64_t>>())
    throw std::runtime_error("manifest echo mismatch for tensor '" + name + "'");
  return t;
}

bool Manifest::has_tensor(const std::string& name) const {
  return j_.at("tensors").contains(name);
}

std::vector<std::string> Manifest::tensor_names() const {
  std::vector<std::string> names;
  for (auto it = j_.at("tensors").begin(); it != j_.at("tensors").end(); ++it)
    names.push_back(it.key());
  return names;
}

void Manifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j_.dump(2) << "\n";
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  Manifest m;
  m.j_ = nlohmann::json::parse(in);
  if (!m.j_.contains("tensors") || !m.j_.contains("metadata"))
    throw std::runtime_error("manifest missing tensors/metadata: " + path);
  return m;
}

}  // namespace flowtie::io
