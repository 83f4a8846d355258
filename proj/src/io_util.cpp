#include "detour/io_util.hpp"

#include <boost/iostreams/copy.hpp>
#include <boost/iostreams/device/back_inserter.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "detour/types.hpp"

namespace detour {

namespace bio = boost::iostreams;

std::unique_ptr<std::istream> open_input(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ParseError("cannot open " + path);
  char magic[3] = {0, 0, 0};
  probe.read(magic, 3);
  probe.close();

  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  bool gz = magic[0] == '\x1f' && magic[1] == '\x8b';
  bool bz = magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h';
  if (!gz && !bz) return file;

  auto filtered = std::make_unique<bio::filtering_istream>();
  if (gz)
    filtered->push(bio::gzip_decompressor());
  else
    filtered->push(bio::bzip2_decompressor());
  // The filtering stream owns the underlying file stream.
  filtered->push(*file);
  struct Holder : std::istream {
    explicit Holder(std::unique_ptr<bio::filtering_istream> s, std::unique_ptr<std::ifstream> f)
        : std::istream(s->rdbuf()), stream(std::move(s)), file(std::move(f)) {}
    std::unique_ptr<bio::filtering_istream> stream;
    std::unique_ptr<std::ifstream> file;
  };
  return std::make_unique<Holder>(std::move(filtered), std::move(file));
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw ConfigError("short write on " + path);
}

std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream out;
  out << in->rdbuf();
  return out.str();
}

std::string gzip_bytes(std::string_view data) {
  std::string out;
  bio::filtering_ostream stream;
  stream.push(bio::gzip_compressor());
  stream.push(bio::back_inserter(out));
  stream.write(data.data(), static_cast<std::streamsize>(data.size()));
  bio::close(stream);
  return out;
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create directory " + path + ": " + ec.message());
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(delim, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::string_view trim(std::string_view text) {
  auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

}  // namespace detour
