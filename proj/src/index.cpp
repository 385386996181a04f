#include "swarm/index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

namespace {

constexpr std::string_view magic = "# swarm term index v1";
constexpr std::size_t snippet_chars = 200;

std::string make_snippet(std::string_view body) {
    auto text = normalize_query(body);
    if (text.size() <= snippet_chars) return text;
    auto cut = text.rfind(' ', snippet_chars);
    if (cut == std::string::npos || cut < snippet_chars / 2) cut = snippet_chars;
    return text.substr(0, cut) + " ...";
}

// Tabs and newlines would break the TSV form.
std::string clean_field(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace

std::vector<std::string> index_terms(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

bool TermIndex::add(IndexedDoc doc, std::string_view body) {
    if (doc.url.empty()) throw Error(Errc::invalid_argument, "document without url");
    if (docs_.contains(doc.url)) return false;
    doc.url = clean_field(doc.url);
    doc.title = clean_field(doc.title);
    if (doc.snippet.empty()) doc.snippet = make_snippet(body);
    doc.snippet = clean_field(doc.snippet);
    for (const auto& term : index_terms(doc.title)) ++postings_[term][doc.url];
    for (const auto& term : index_terms(body)) ++postings_[term][doc.url];
    auto url = doc.url;
    docs_.emplace(std::move(url), std::move(doc));
    return true;
}

std::vector<SearchHit> TermIndex::search(std::string_view query) const {
    std::map<std::string, double> scores;
    const auto n = static_cast<double>(docs_.size());
    std::set<std::string> seen;
    for (const auto& term : index_terms(query)) {
        if (!seen.insert(term).second) continue;
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf = std::log(1.0 + n / static_cast<double>(it->second.size()));
        for (const auto& [url, tf] : it->second) scores[url] += tf * idf;
    }
    std::vector<SearchHit> hits;
    hits.reserve(scores.size());
    for (const auto& [url, score] : scores) hits.push_back({docs_.at(url), score});
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    return hits;
}

void TermIndex::save(std::ostream& out) const {
    out << magic << '\n';
    out << "docs\t" << docs_.size() << '\n';
    for (const auto& [url, doc] : docs_) out << "D\t" << url << '\t' << doc.title << '\t' << doc.snippet << '\n';
    for (const auto& [term, posting] : postings_) {
        out << "T\t" << term;
        for (const auto& [url, tf] : posting) out << '\t' << url << ' ' << tf;
        out << '\n';
    }
}

TermIndex TermIndex::load(std::istream& in) {
    TermIndex index;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != magic) throw ParseError(line_no, "not a term index");
            continue;
        }
        auto f = split(line, '\t');
        try {
            if (f[0] == "docs" && f.size() == 2) {
                expected = static_cast<std::size_t>(detail::parse_int(f[1]));
            } else if (f[0] == "D" && f.size() == 4) {
                index.docs_.emplace(f[1], IndexedDoc{f[1], f[2], f[3]});
            } else if (f[0] == "T" && f.size() >= 3) {
                auto& posting = index.postings_[f[1]];
                for (std::size_t i = 2; i < f.size(); ++i) {
                    auto space = f[i].rfind(' ');
                    if (space == std::string::npos) throw Error(Errc::parse, "bad posting");
                    auto url = f[i].substr(0, space);
                    if (!index.docs_.contains(url)) throw Error(Errc::parse, "posting for unknown url");
                    posting[url] = static_cast<int>(detail::parse_int(f[i].substr(space + 1)));
                }
            } else {
                throw Error(Errc::parse, "unrecognized index record");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    if (line_no == 0) throw Error(Errc::parse, "empty index file");
    if (index.docs_.size() != expected) throw Error(Errc::parse, "index document count mismatch");
    return index;
}

IngestResult ingest_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(Errc::io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    IngestResult result;
    result.files = files.size();
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw Error(Errc::io, "cannot read " + file.string());
        std::string line;
        while (std::getline(in, line)) {
            if (normalize_query(line).empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                IndexedDoc doc{j.at("url").get<std::string>(), j.value("title", std::string()), {}};
                if (doc.url.empty()) throw Error(Errc::parse, "empty url");
                if (!result.index.add(std::move(doc), j.value("body", std::string()))) ++result.skipped;
            } catch (const nlohmann::json::exception&) {
                ++result.skipped;
            } catch (const Error&) {
                ++result.skipped;
            }
        }
    }

    result.index_path = dir / index_file_name;
    std::ofstream out(result.index_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + result.index_path.string());
    result.index.save(out);
    if (!out.flush()) throw Error(Errc::io, "failed writing " + result.index_path.string());
    return result;
}

TermIndex load_index(const std::filesystem::path& dir) {
    auto path = dir / index_file_name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "no index at " + path.string() + " (run ingest first)");
    return TermIndex::load(in);
}

}  // namespace swarm
