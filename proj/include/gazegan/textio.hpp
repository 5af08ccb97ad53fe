// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gaze {

// Shortest 17-significant-digit decimal; round-trips doubles exactly.
std::string format_g17(double value);

// Strict full-string double parse; no leading/trailing junk.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, int64_t& out);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

// FNV-1a over a byte string; used for config and artifact hashes.
uint64_t fnv1a(std::string_view bytes);
std::string hex64(uint64_t value);

}  // namespace gaze
