#pragma once
// Line-oriented TSV reading with a mandatory header row. Errors carry the
// file path and 1-based line number.

#include <filesystem>
#include <string>
#include <vector>

namespace egpmda {

struct TsvFile {
  std::filesystem::path path;
  std::vector<std::vector<std::string>> rows;  // header excluded
};

std::vector<std::string> split_tab(const std::string& line);
std::vector<std::string> split_on(const std::string& text, char sep);

// Requires the first line to match `header` exactly (tab-joined field names).
TsvFile read_tsv(const std::filesystem::path& path, const std::vector<std::string>& header);

}  // namespace egpmda
