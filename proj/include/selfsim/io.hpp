#pragma once

// Deterministic report writers: fixed 17-significant-digit float formatting,
// fixed key order (nlohmann ordered_json), and a config hash embedded in
// every artifact so outputs are byte-stable given identical inputs.

#include "selfsim/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace selfsim {

inline constexpr const char* kArtifactVersion = "selfsim 1.0.0";

using Json = nlohmann::ordered_json;

/// %.17g rendering; round-trips every double.
std::string fmt_g17(double v);

std::uint64_t fnv1a_hash(const std::string& text);

/// Meta block embedded in every report: artifact version, resolved config,
/// and the config hash.
Json make_meta(const Json& resolved_config);

/// CSV with `# key: value` comment headers carrying the meta block.
std::string csv_document(const Json& meta, const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows);

/// One JSON object per line.
std::string jsonl_document(const std::vector<Json>& records);

/// Throws std::runtime_error when the path cannot be written.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace selfsim
