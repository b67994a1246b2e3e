#pragma once

#include <optional>
#include <string>

namespace prsans {

// Locale-independent numeric formatting for CSV artifacts. fmt_full
// round-trips doubles; fmt_sig6 is the 6-significant-digit form used for
// metric tables. Empty optional -> empty field.
std::string fmt_full(double v);
std::string fmt_sig6(double v);
std::string fmt_opt(const std::optional<double>& v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a 64 content hash, hex encoded; used by run manifests.
std::string content_hash_hex(const std::string& bytes);

}  // namespace prsans
