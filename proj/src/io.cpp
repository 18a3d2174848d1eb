#include "selfsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace selfsim {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Json make_meta(const Json& resolved_config) {
  Json meta;
  meta["artifact"] = kArtifactVersion;
  meta["config"] = resolved_config;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(resolved_config.dump())));
  meta["config_hash"] = buf;
  return meta;
}

std::string csv_document(const Json& meta, const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (auto it = meta.begin(); it != meta.end(); ++it)
    out << "# " << it.key() << ": " << it.value().dump() << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("csv_document: row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? "," : "");
    out << "\n";
  }
  return out.str();
}

std::string jsonl_document(const std::vector<Json>& records) {
  std::ostringstream out;
  for (const Json& rec : records) out << rec.dump() << "\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output path: " + path);
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("failed writing output path: " + path);
}

}  // namespace selfsim
