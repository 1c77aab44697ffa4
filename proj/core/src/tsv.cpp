#include "egpmda/tsv.hpp"

#include <fstream>
#include <stdexcept>

namespace egpmda {

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_tab(const std::string& line) { return split_on(line, '\t'); }

TsvFile read_tsv(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TsvFile file;
  file.path = path;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      const auto fields = split_tab(line);
      if (fields != header) {
        std::string expect;
        for (size_t i = 0; i < header.size(); ++i) expect += (i ? "\t" : "") + header[i];
        throw std::runtime_error(path.string() + ": expected header '" + expect + "', got '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_tab(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    file.rows.push_back(std::move(fields));
  }
  return file;
}

}  // namespace egpmda
