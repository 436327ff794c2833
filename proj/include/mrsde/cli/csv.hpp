#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>

namespace mrsde::cli {

/// Shortest text that holds 17 significant digits, e.g. "0.10000000000000001".
std::string format_double(double x);

/// "# config_hash=<16 hex digits> seed=<n>"
std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed);

/// Writes to "<path>.tmp" and renames onto `path` on commit(). A writer
/// destroyed without commit() removes its temporary file.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool done_ = false;
};

using Cell = std::variant<double, std::int64_t>;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header, std::uint64_t config_hash,
            std::uint64_t seed);

  void row(std::initializer_list<Cell> cells);
  void commit() { file_.commit(); }

 private:
  AtomicFile file_;
  std::string line_;
};

/// Atomic write of a whole text file.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace mrsde::cli
