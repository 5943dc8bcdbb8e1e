#include "tgnn/binary_io.hpp"

#include <bit>
#include <cstring>

namespace tgnn::io {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ArtifactError("artifact truncated");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace

void write_u8(std::ostream& os, std::uint8_t v) { put(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { put(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put(os, v); }
void write_i64(std::ostream& os, std::int64_t v) { put(os, v); }
void write_f64(std::ostream& os, double v) { put(os, v); }

void write_string(std::ostream& os, std::string_view s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint8_t read_u8(std::istream& is) { return get<std::uint8_t>(is); }
std::uint32_t read_u32(std::istream& is) { return get<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get<std::uint64_t>(is); }
std::int64_t read_i64(std::istream& is) { return get<std::int64_t>(is); }
double read_f64(std::istream& is) { return get<double>(is); }

std::string read_string(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1ull << 32)) throw ArtifactError("artifact string length is implausible");
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) throw ArtifactError("artifact truncated");
  return s;
}

void write_header(std::ostream& os, std::string_view magic, std::uint8_t version) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  write_u8(os, version);
}

void read_header(std::istream& is, std::string_view magic, std::uint8_t version) {
  std::string got(magic.size(), '\0');
  if (!is.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw ArtifactError("not a " + std::string(magic) + " artifact (bad magic)");
  }
  const std::uint8_t v = read_u8(is);
  if (v != version) {
    throw ArtifactError(std::string(magic) + " artifact version " + std::to_string(v) + " is not supported (expected " +
                        std::to_string(version) + ")");
  }
}

}  // namespace tgnn::io
