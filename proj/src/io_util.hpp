#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "types.hpp"

namespace czflow {

/// Writes via a temp file in the same directory, then renames into place.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::resource, "cannot open output file: " + tmp.string());
    out << content;
    if (!out.good()) fail(ErrorCode::resource, "short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::resource, "rename failed: " + target.string());
}

/// Locale-independent float formatting with enough digits to round-trip.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace czflow
