#include "snnsc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace snnsc {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(b[i]) << (8 * i);
  return x;
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
  return x;
}

std::string get_str(std::istream& is) {
  const uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

uint64_t double_bits(double d) {
  uint64_t u;
  std::memcpy(&u, &d, 8);
  return u;
}

double bits_double(uint64_t u) {
  double d;
  std::memcpy(&d, &u, 8);
  return d;
}

}  // namespace

void save_checkpoint(const ModelParams& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  put_u32(os, kVersion);
  put_u64(os, m.config_hash);
  put_u32(os, static_cast<uint32_t>(m.groups.size()));
  for (const auto& [role, group] : m.groups) {
    put_str(os, role_tag(role));
    put_u32(os, static_cast<uint32_t>(group.params.size()));
    for (const auto& [id, p] : group.params) {
      put_str(os, id);
      put_u32(os, static_cast<uint32_t>(p.value.shape.size()));
      for (int d : p.value.shape) put_u32(os, static_cast<uint32_t>(d));
      for (double x : p.value.v) put_u64(os, double_bits(x));
    }
  }
  if (!os) throw ConfigError("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("not a checkpoint file: " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  ModelParams m;
  m.config_hash = get_u64(is);
  const uint32_t ngroups = get_u32(is);
  for (uint32_t gi = 0; gi < ngroups; ++gi) {
    ParamGroup& g = m.group(role_from_tag(get_str(is)));
    const uint32_t nparams = get_u32(is);
    for (uint32_t pi = 0; pi < nparams; ++pi) {
      const std::string id = get_str(is);
      const uint32_t ndim = get_u32(is);
      Shape shape(ndim);
      for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(get_u32(is));
      Tensor value = Tensor::zeros(shape);
      for (double& x : value.v) x = bits_double(get_u64(is));
      g.create(id, std::move(value));
    }
  }
  if (!is) throw ConfigError("checkpoint truncated: " + path);
  return m;
}

}  // namespace snnsc
