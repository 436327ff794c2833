#include "mrsde/cli/csv.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <system_error>

#include "mrsde/cli/config.hpp"

namespace mrsde::cli {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# config_hash=%016" PRIx64 " seed=%" PRIu64, config_hash, seed);
  return buf;
}

AtomicFile::AtomicFile(std::filesystem::path path)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw ConfigError("cannot write " + tmp_.string());
}

AtomicFile::~AtomicFile() {
  if (!done_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  out_.close();
  if (!out_) throw ConfigError("write failed for " + tmp_.string());
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw ConfigError("cannot rename " + tmp_.string() + ": " + ec.message());
  done_ = true;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header,
                     std::uint64_t config_hash, std::uint64_t seed)
    : file_(path) {
  file_.stream() << provenance_line(config_hash, seed) << '\n' << header << '\n';
}

void CsvWriter::row(std::initializer_list<Cell> cells) {
  line_.clear();
  bool first = true;
  for (const Cell& c : cells) {
    if (!first) line_ += ',';
    first = false;
    if (const double* d = std::get_if<double>(&c))
      line_ += format_double(*d);
    else
      line_ += std::to_string(std::get<std::int64_t>(c));
  }
  line_ += '\n';
  file_.stream() << line_;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  AtomicFile f(path);
  f.stream() << text;
  f.commit();
}

}  // namespace mrsde::cli
