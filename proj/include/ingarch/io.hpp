#pragma once

// CSV and manifest I/O. Dialect: comma-separated, UTF-8, mandatory header, '.' decimals.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ingarch/model.hpp"

namespace ingarch {

/// Reads the `count` column of a CSV file. Throws DataError naming the offending line.
CountSeries read_counts_csv(const std::filesystem::path& path);
CountSeries parse_counts_csv(std::string_view text, const std::string& source = "<memory>");
void write_counts_csv(const std::filesystem::path& path, const CountSeries& x);

/// Shortest representation that round-trips exactly; identical across runs.
std::string format_double(double v);

/// Buffers rows in memory and writes the file on destruction.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);
  ~CsvWriter();

 private:
  std::string buffer_;
  std::filesystem::path path_;
  std::size_t columns_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// SHA-1 of "blob <size>\0<content>", as used for git object ids.
std::string git_blob_hash(std::string_view content);

/// Writes manifest.json holding the config and the content hash of every input file.
void write_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                    const std::vector<std::filesystem::path>& inputs);

}  // namespace ingarch
