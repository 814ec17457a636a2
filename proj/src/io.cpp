#include "ingarch/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "ingarch/error.hpp"

namespace ingarch {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

std::int64_t parse_count(const std::string& cell, const std::string& where) {
  if (cell.empty()) throw DataError(where + ": empty count");
  std::int64_t v = 0;
  const char* end = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(cell.data(), end, v);
  if (ec == std::errc() && p == end) {
    if (v < 0) throw DataError(where + ": negative count " + cell);
    return v;
  }
  // Accept integral floating spellings such as "3.0"; reject everything else.
  double d = 0.0;
  auto [q, ec2] = std::from_chars(cell.data(), end, d);
  if (ec2 != std::errc() || q != end) throw DataError(where + ": not a number: '" + cell + "'");
  if (!std::isfinite(d)) throw DataError(where + ": non-finite value '" + cell + "'");
  if (d < 0.0) throw DataError(where + ": negative count " + cell);
  if (d != std::floor(d) || d > 9.0e15) throw DataError(where + ": count is not an integer: '" + cell + "'");
  return static_cast<std::int64_t>(d);
}

}  // namespace

CountSeries parse_counts_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  std::vector<std::int64_t> values;
  std::size_t line_no = 0, col = 0, ncols = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const auto cells = split(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header) {
      ncols = cells.size();
      auto it = std::find(cells.begin(), cells.end(), "count");
      if (it == cells.end()) throw DataError(where + ": header row must contain a 'count' column");
      col = static_cast<std::size_t>(it - cells.begin());
      header = true;
      continue;
    }
    if (cells.size() != ncols)
      throw DataError(where + ": expected " + std::to_string(ncols) + " fields, found " + std::to_string(cells.size()));
    values.push_back(parse_count(cells[col], where));
  }
  if (!header) throw DataError(source + ": missing header row");
  if (values.empty()) throw DataError(source + ": no data rows");
  return CountSeries(std::move(values));
}

CountSeries read_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_counts_csv(ss.str(), path.string());
}

void write_counts_csv(const std::filesystem::path& path, const CountSeries& x) {
  std::string s = "t,count\n";
  for (std::size_t t = 0; t < x.size(); ++t) s += std::to_string(t) + "," + std::to_string(x[t]) + "\n";
  write_file(path, s);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ConfigError("CsvWriter: row width does not match header for " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_double(v));
  row(s);
}

CsvWriter::~CsvWriter() {
  try {
    write_file(path_, buffer_);
  } catch (...) {
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string git_blob_hash(std::string_view content) {
  const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    const unsigned char c = md[i];
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

void write_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                    const std::vector<std::filesystem::path>& inputs) {
  nlohmann::json m;
  m["config"] = config;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : inputs) files.push_back({{"path", p.string()}, {"git_blob_sha1", git_blob_hash(read_file(p))}});
  m["inputs"] = files;
  write_json(dir / "manifest.json", m);
}

}  // namespace ingarch
