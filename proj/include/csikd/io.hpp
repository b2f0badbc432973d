#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace csikd {

// Little-endian binary file helpers shared by the dataset, checkpoint, and
// pair-dataset formats. All on-disk multi-byte values are little-endian
// regardless of host order.

namespace detail {
inline bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}
}  // namespace detail

class BinaryWriter {
public:
  explicit BinaryWriter(const std::string& path)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void write_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

  template <typename T>
  void write_scalar(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if (!detail::host_is_little_endian()) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
        std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    write_bytes(buf, sizeof(T));
  }

  void write_u8(std::uint8_t v) { write_scalar(v); }
  void write_u32(std::uint32_t v) { write_scalar(v); }
  void write_u64(std::uint64_t v) { write_scalar(v); }
  void write_f64(double v) { write_scalar(v); }

  void write_magic(const char (&m)[5]) { write_bytes(m, 4); }

  void write_f64_array(const std::vector<double>& v) {
    for (double x : v) write_f64(x);
  }

  void write_string(const std::string& s) {
    write_u32(static_cast<std::uint32_t>(s.size()));
    write_bytes(s.data(), s.size());
  }

  void close() { out_.close(); }

private:
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
public:
  explicit BinaryReader(const std::string& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot open for reading: " + path);
  }

  void read_bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw std::runtime_error("truncated or corrupt file: " + path_);
  }

  template <typename T>
  T read_scalar() {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    read_bytes(buf, sizeof(T));
    if (!detail::host_is_little_endian()) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
        std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::uint8_t read_u8() { return read_scalar<std::uint8_t>(); }
  std::uint32_t read_u32() { return read_scalar<std::uint32_t>(); }
  std::uint64_t read_u64() { return read_scalar<std::uint64_t>(); }
  double read_f64() { return read_scalar<double>(); }

  void expect_magic(const char (&m)[5], const std::string& what) {
    char got[4];
    read_bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0)
      throw std::runtime_error("bad magic for " + what + ": " + path_);
  }

  std::vector<double> read_f64_array(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = read_f64();
    return v;
  }

  std::string read_string() {
    const std::uint32_t n = read_u32();
    if (n > (1u << 20)) throw std::runtime_error("implausible string length: " + path_);
    std::string s(n, '\0');
    read_bytes(s.data(), n);
    return s;
  }

private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace csikd
