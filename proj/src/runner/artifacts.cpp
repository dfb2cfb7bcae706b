#include "runner/artifacts.hpp"

#include <cstdio>
#include <stdexcept>

namespace fraclap::runner {

std::string format_value(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string format_brief(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%g", value);
  return buffer;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::string& header)
    : path_(path), stream_(path, std::ios::binary | std::ios::trunc) {
  if (!stream_)
    throw std::runtime_error("cannot open for writing: " + path.string());
  stream_ << header << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) stream_ << ',';
    stream_ << cells[i];
  }
  stream_ << '\n';
  if (!stream_)
    throw std::runtime_error("write failed: " + path_.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create output directory: " + dir.string());
}

void write_metadata(const std::filesystem::path& path,
                    const nlohmann::json& doc) {
  std::ofstream stream(path, std::ios::binary | std::ios::trunc);
  if (!stream)
    throw std::runtime_error("cannot open for writing: " + path.string());
  stream << doc.dump(2) << '\n';
  if (!stream) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace fraclap::runner
