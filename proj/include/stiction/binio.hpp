#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stiction::binio {

// Little-endian primitives for the SGW1 / SGN1 / SGS1 containers.
void write_magic(std::ostream& out, std::string_view magic);
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_i64(std::ostream& out, std::int64_t v);
void write_f64(std::ostream& out, double v);
void write_f64s(std::ostream& out, std::span<const double> v);
void write_string(std::ostream& out, std::string_view s);

// Readers throw Error(FormatError) on truncation or a wrong magic.
void expect_magic(std::istream& in, std::string_view magic);
std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
std::int64_t read_i64(std::istream& in);
double read_f64(std::istream& in);
std::vector<double> read_f64s(std::istream& in, std::size_t count);
std::string read_string(std::istream& in);

}  // namespace stiction::binio
