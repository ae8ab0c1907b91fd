#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace polarimeter::tsv {

std::vector<std::string_view> split(std::string_view line, char sep = '\t');

/// Fixed nine-decimal rendering used by every tabular artifact.
std::string fixed9(double value);

/// Reads all lines; a trailing '\r' is dropped. Throws std::runtime_error if the file is missing.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Opens for binary writing (no newline translation) and creates parent directories.
std::ofstream open_output(const std::filesystem::path& path);

/// Writes content then renames into place so an interrupted stage never leaves a
/// half-written artifact behind.
void write_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace polarimeter::tsv
