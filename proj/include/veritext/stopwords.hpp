#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace veritext {

/// The fixed English stopword list shipped with the artifact (179 words).
/// The CLASSIC pipeline removes exactly these tokens; the list's hash is
/// recorded in every model file so results stay reproducible.
const std::vector<std::string>& stopword_list();

bool is_stopword(const std::string& token);

/// FNV-1a 64 over the canonical one-token-per-line serialization.
uint64_t stopword_list_hash();
std::string stopword_list_hash_hex();

/// Write the canonical one-token-per-line file.
void write_stopword_file(const std::string& path);

}  // namespace veritext
