#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "tgnn/errors.hpp"

namespace tgnn::io {

// Little-endian primitives shared by every artifact format.

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i64(std::ostream& os, std::int64_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, std::string_view s);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int64_t read_i64(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is);

/// Writes a 4-byte magic followed by a version byte.
void write_header(std::ostream& os, std::string_view magic, std::uint8_t version);
/// Validates magic and version; throws ArtifactError with a readable message.
void read_header(std::istream& is, std::string_view magic, std::uint8_t version);

}  // namespace tgnn::io
