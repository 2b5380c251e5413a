#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "fexp/error.hpp"

namespace fexp {

inline std::ifstream open_input(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open for reading: " + path.string());
  return in;
}

/// Creates parent directories as needed.
inline std::ofstream open_output(const std::filesystem::path& path)
{
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
  auto out = open_output(path);
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path)
{
  auto in = open_input(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fexp
