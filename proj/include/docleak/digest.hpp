#pragma once

#include <array>
#include <charconv>
#include <string>
#include <string_view>

namespace docleak {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Shortest round-trip decimal form; identical on every conforming platform.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace docleak
