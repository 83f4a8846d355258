#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace detour {

/// Opens a file for reading, transparently decompressing gzip/bzip2
/// (detected by magic bytes). Throws ParseError if the file cannot be opened.
std::unique_ptr<std::istream> open_input(const std::string& path);

/// Writes `data` to `path`, replacing any existing file.
void write_file(const std::string& path, std::string_view data);

std::string read_file(const std::string& path);

/// gzip-compress a byte string (test fixtures and bundle generation).
std::string gzip_bytes(std::string_view data);

bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

/// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string_view> split(std::string_view line, char delim);

/// Strips trailing CR and surrounding spaces/tabs.
std::string_view trim(std::string_view text);

}  // namespace detour
