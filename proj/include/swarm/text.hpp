#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace swarm {

/// Lowercase (ASCII), trim, and collapse runs of whitespace to one space.
/// No stemming and no stopword removal.
std::string normalize_query(std::string_view raw);

/// Whitespace tokens of the normalized form; punctuation stays attached.
std::vector<std::string> tokenize(std::string_view raw);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace swarm
