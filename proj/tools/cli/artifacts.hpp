#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace biortheq::cli {

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// RFC-4180 table: header row, CRLF line endings, fields quoted when needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> fields);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct ManifestEntry {
  std::string file;
  std::size_t bytes;
  std::string sha256;
};

/// Writes files into one directory and records them for the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  void write(const std::string& name, const std::string& content);
  /// Writes manifest.csv (file, bytes, sha256) covering every file written so far.
  void write_manifest();

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::filesystem::path dir_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace biortheq::cli
