#include "swarm/intent.hpp"

#include <algorithm>
#include <fstream>

#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

std::string_view to_string(Intent intent) {
    return intent == Intent::navigational ? "navigational" : "non_navigational";
}

void NameLexicon::add_name(std::string_view raw) {
    auto name = normalize_query(raw);
    if (!name.empty()) names.insert(std::move(name));
}

void NameLexicon::add_suffix(std::string_view raw) {
    auto suffix = normalize_query(raw);
    if (!suffix.empty()) suffixes.insert(std::move(suffix));
}

namespace {

template <typename Sink>
void read_terms(const std::filesystem::path& path, Sink sink) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read lexicon file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        auto term = normalize_query(line);
        if (term.empty() || term.front() == '#') continue;
        sink(term);
    }
}

}  // namespace

NameLexicon load_lexicon(std::span<const std::filesystem::path> name_files,
                         const std::filesystem::path& suffix_file) {
    NameLexicon lexicon;
    for (const auto& file : name_files) {
        read_terms(file, [&](const std::string& t) { lexicon.add_name(t); });
    }
    if (!suffix_file.empty()) {
        read_terms(suffix_file, [&](const std::string& t) { lexicon.add_suffix(t); });
    }
    return lexicon;
}

Intent classify(std::string_view query, const NameLexicon& lexicon) {
    auto tokens = tokenize(query);
    if (tokens.empty()) throw Error(Errc::invalid_query, "blank query");
    if (tokens.size() < 3) return Intent::navigational;

    auto normalized = join(tokens, " ");
    for (const auto& suffix : lexicon.suffixes) {
        if (normalized.find(suffix) != std::string::npos) return Intent::navigational;
    }

    for (std::size_t start = 0; start < tokens.size(); ++start) {
        std::string run;
        for (std::size_t end = start; end < tokens.size(); ++end) {
            if (end > start) run.push_back(' ');
            run += tokens[end];
            if (lexicon.names.contains(run)) return Intent::navigational;
        }
    }
    return Intent::non_navigational;
}

}  // namespace swarm
