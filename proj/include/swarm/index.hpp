#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace swarm {

struct IndexedDoc {
    std::string url;
    std::string title;
    std::string snippet;
};

struct SearchHit {
    IndexedDoc doc;
    double score = 0.0;
};

/// Lowercased alphanumeric runs; bytes outside ASCII are kept inside words.
std::vector<std::string> index_terms(std::string_view text);

/// Inverted tf-idf index. Documents are kept in url order so the persisted
/// form does not depend on file or line order.
class TermIndex {
  public:
    /// Returns false when the url is already present (the first copy wins).
    bool add(IndexedDoc doc, std::string_view body);

    /// Sum over query terms of tf * ln(1 + N / df); ties broken by url.
    std::vector<SearchHit> search(std::string_view query) const;

    std::size_t size() const noexcept { return docs_.size(); }
    std::size_t term_count() const noexcept { return postings_.size(); }

    void save(std::ostream& out) const;
    static TermIndex load(std::istream& in);

  private:
    // url -> doc; postings keyed by url as well so add() order never matters.
    std::map<std::string, IndexedDoc> docs_;
    std::map<std::string, std::map<std::string, int>> postings_;
};

struct IngestResult {
    TermIndex index;
    std::size_t files = 0;
    std::size_t skipped = 0;
    std::filesystem::path index_path;
};

inline constexpr std::string_view index_file_name = "corpus.index";

/// Indexes every *.jsonl file in `dir` (lines {url, title, body}) and writes
/// the index to dir/corpus.index. Malformed lines are skipped and counted.
IngestResult ingest_corpus(const std::filesystem::path& dir);

/// Reads dir/corpus.index.
TermIndex load_index(const std::filesystem::path& dir);

}  // namespace swarm
