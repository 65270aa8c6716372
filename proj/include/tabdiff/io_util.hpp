#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tabdiff/errors.hpp"

namespace tabdiff {

// Shortest decimal form that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string read_file_to_string(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Write-to-temp, rename-on-success; a failed command never leaves a
// partial output behind.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp + "'");
    out << content;
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw ConfigError("failed writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot move '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace tabdiff
