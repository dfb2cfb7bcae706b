#pragma once
// Result persistence: CSV tables with a fixed numeric format (so reruns are
// byte-identical) and a JSON metadata document per run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fraclap::runner {

/// Full-precision decimal rendering used in every CSV cell (%.17g: doubles
/// round-trip exactly and identical inputs give identical bytes).
std::string format_value(double value);

/// Shortest exact-enough rendering for filenames and log lines (%g).
std::string format_brief(double value);

/// CSV table writer: header row up front, LF line endings, binary stream so
/// the bytes are platform-independent.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  /// One row from pre-rendered cells.
  void row(const std::vector<std::string>& cells);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream stream_;
};

/// Creates the directory (and parents) if needed; throws on failure.
void ensure_directory(const std::filesystem::path& dir);

/// Serializes metadata with sorted keys and a trailing newline.
void write_metadata(const std::filesystem::path& path,
                    const nlohmann::json& doc);

}  // namespace fraclap::runner
