#ifndef KPSEQ_IO_HPP_
#define KPSEQ_IO_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "kpseq/error.hpp"

namespace kpseq::io {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

/// Calls fn(json, line_number) for each non-blank line. Parse failures are
/// reported with the 1-based line number.
inline void for_each_json_line(const std::string& path,
                               const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path, lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      fn(j, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path, lineno, std::string("malformed record: ") + e.what());
    }
  }
}

/// Writes through a sibling temp file and renames it into place so readers
/// never observe a partially written file.
inline void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot rename into " + path);
  }
}

inline void write_text_atomic(const std::string& path, const std::string& content) {
  write_atomic(path, [&](std::ostream& out) { out << content; });
}

}  // namespace kpseq::io

#endif  // KPSEQ_IO_HPP_
