#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>

namespace swarm {

enum class Intent { navigational, non_navigational };

std::string_view to_string(Intent intent);

/// Names of companies, organizations, websites and people, plus domain
/// suffixes. Entries are normalized (lowercase, single-spaced).
struct NameLexicon {
    std::set<std::string> names;
    std::set<std::string> suffixes;

    void add_name(std::string_view raw);
    void add_suffix(std::string_view raw);
};

/// One term per line, '#' starts a comment line. Throws an io error naming
/// the file that cannot be read.
NameLexicon load_lexicon(std::span<const std::filesystem::path> name_files,
                         const std::filesystem::path& suffix_file = {});

/// Navigational when the query has fewer than three terms, mentions a
/// lexicon name as a whole-token run, or carries a domain suffix.
Intent classify(std::string_view query, const NameLexicon& lexicon);

}  // namespace swarm
