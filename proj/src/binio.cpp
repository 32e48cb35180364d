#include "stiction/binio.hpp"

#include <bit>
#include <istream>
#include <ostream>

#include "stiction/error.hpp"

namespace stiction::binio {
namespace {

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, bytes);
  if (!out) fail(ErrorKind::IoFailure, "write failed");
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), bytes);
  if (in.gcount() != bytes) fail(ErrorKind::FormatError, "unexpected end of binary data");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!out) fail(ErrorKind::IoFailure, "write failed");
}
void write_u8(std::ostream& out, std::uint8_t v) { put_le(out, v, 1); }
void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v, 4); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v, 8); }
void write_i64(std::ostream& out, std::int64_t v) {
  put_le(out, static_cast<std::uint64_t>(v), 8);
}
void write_f64(std::ostream& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v), 8);
}
void write_f64s(std::ostream& out, std::span<const double> v) {
  for (double x : v) write_f64(out, x);
}
void write_string(std::ostream& out, std::string_view s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) fail(ErrorKind::IoFailure, "write failed");
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic)
    fail(ErrorKind::FormatError, "bad magic, expected " + std::string(magic));
}
std::uint8_t read_u8(std::istream& in) { return static_cast<std::uint8_t>(get_le(in, 1)); }
std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(get_le(in, 4)); }
std::uint64_t read_u64(std::istream& in) { return get_le(in, 8); }
std::int64_t read_i64(std::istream& in) { return static_cast<std::int64_t>(get_le(in, 8)); }
double read_f64(std::istream& in) { return std::bit_cast<double>(get_le(in, 8)); }
std::vector<double> read_f64s(std::istream& in, std::size_t count) {
  std::vector<double> v(count);
  for (auto& x : v) x = read_f64(in);
  return v;
}
std::string read_string(std::istream& in) {
  const auto n = read_u64(in);
  if (n > (1ULL << 32)) fail(ErrorKind::FormatError, "string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    fail(ErrorKind::FormatError, "unexpected end of binary data");
  return s;
}

}  // namespace stiction::binio
