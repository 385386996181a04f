#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "swarm/examination.hpp"
#include "swarm/index.hpp"
#include "swarm/pheromone.hpp"
#include "swarm/querylog.hpp"

namespace swarm {

struct UpstreamResult {
    std::string url;
    std::string title;
    std::string snippet;
};

struct UpstreamPage {
    std::vector<UpstreamResult> results;
    /// Set when the provider had nothing to serve or failed.
    std::optional<std::string> annotation;
};

/// Source of organic results. Implementations must be safe to call from
/// several request threads at once.
class SearchProvider {
  public:
    virtual ~SearchProvider() = default;
    /// Results of `page_number` (1-based), at most results_per_page of them.
    virtual UpstreamPage search(std::string_view query, int page_number) const = 0;
};

class LocalIndexProvider : public SearchProvider {
  public:
    explicit LocalIndexProvider(TermIndex index) : index_(std::move(index)) {}
    UpstreamPage search(std::string_view query, int page_number) const override;

  private:
    TermIndex index_;
};

/// Canned pages: every *.json file in the directory holds
/// {"query": ..., "results": [{"url", "title", "snippet"}, ...]}.
class FixtureProvider : public SearchProvider {
  public:
    explicit FixtureProvider(const std::filesystem::path& dir);
    UpstreamPage search(std::string_view query, int page_number) const override;
    std::size_t size() const noexcept { return fixtures_.size(); }

  private:
    std::map<std::string, std::vector<UpstreamResult>> fixtures_;
};

enum class ProviderKind { local_index, fixture };

struct ServiceConfig {
    Flavor flavor = Flavor::naive;
    double delta = DecayConfig::one_day;
    int k = 3;
    KeyMode key_mode = KeyMode::ngram;
    ProviderKind provider = ProviderKind::fixture;
    /// Corpus directory (local-index) or fixture directory.
    std::filesystem::path provider_path = "data/fixtures";
    std::filesystem::path log_path = "interactions.tsv";
    /// Optional examination table for ranking_bias; the built-in approximation otherwise.
    std::filesystem::path exam_table;
    std::uint64_t seed = 1;
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Key for click tokens; a random one is drawn at startup when empty.
    std::string secret;

    void validate() const;

    /// key=value lines, '#' comments.
    static ServiceConfig parse(std::istream& in);
    static ServiceConfig load(const std::filesystem::path& path);

    /// Applies SWARM_<KEY> variables (e.g. SWARM_K=1) from `getenv`.
    void apply_env(const std::function<const char*(const char*)>& getenv);

    void set(std::string_view key, std::string_view value);
    std::string to_text() const;
};

inline constexpr std::string_view env_prefix = "SWARM_";

/// One log row: the AOL columns plus recommended, flavor, page and a note.
struct LogRecord {
    Interaction row;
    bool recommended = false;
    Flavor flavor = Flavor::naive;
    int page = 1;
    std::string note;
};

std::string format_log_record(const LogRecord& record);

/// Append-only TSV log with a single writer thread; append() never waits for I/O.
class InteractionLog {
  public:
    explicit InteractionLog(const std::filesystem::path& path);
    explicit InteractionLog(std::ostream& sink);
    ~InteractionLog();

    InteractionLog(const InteractionLog&) = delete;
    InteractionLog& operator=(const InteractionLog&) = delete;

    void append(LogRecord record);
    /// Blocks until everything appended so far is written.
    void flush();

  private:
    void run();

    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable drained_;
    std::deque<LogRecord> queue_;
    std::size_t appended_ = 0;
    std::size_t written_ = 0;
    bool stop_ = false;
    std::thread writer_;
};

struct SerpResult {
    int rank = 0;
    DocRef url = DocRef::placeholder(0);
    std::string title;
    std::string snippet;
    bool recommended = false;
    std::string click_token;
};

struct SerpPage {
    std::string query;
    int page_number = 1;
    std::vector<SerpResult> results;
};

struct ServiceStats {
    std::size_t queries = 0;
    std::size_t clicks = 0;
    std::size_t trails = 0;
    std::size_t store_bytes = 0;
};

using Clock = std::function<Timestamp()>;

Timestamp system_clock_now();

class SearchService {
  public:
    SearchService(ServiceConfig config, std::shared_ptr<const SearchProvider> provider,
                  InteractionLog& log, ExaminationTable table, Clock clock = system_clock_now);

    /// Throws invalid_query for a blank query and invalid_argument for page < 1.
    SerpPage handle_search(std::string_view query, int page_number, std::string_view session,
                           Timestamp now);

    /// Destination url for a valid, unused token; nullopt when the token is
    /// unknown, already used or issued to another session (nothing is deposited).
    std::optional<std::string> handle_click(std::string_view token, std::string_view session,
                                            Timestamp now);

    Timestamp now() const { return clock_(); }
    ServiceStats stats() const;
    const PheromoneStore& store() const noexcept { return store_; }
    const ServiceConfig& config() const noexcept { return config_; }

    /// Issued tokens older than this are forgotten.
    static constexpr Timestamp token_ttl = 86400;

  private:
    struct Issued {
        std::string session;
        std::string query;
        int rank = 0;
        DocRef url = DocRef::placeholder(0);
        bool recommended = false;
        int page = 1;
        Timestamp issued_at = 0;
    };

    std::string issue_token(const Issued& issued);
    void expire_tokens(Timestamp now);
    double deposit_increment(const Issued& issued);

    ServiceConfig config_;
    std::shared_ptr<const SearchProvider> provider_;
    InteractionLog& log_;
    ExaminationTable table_;
    Clock clock_;
    PheromoneStore store_;

    std::mutex mutex_;  // tokens, click history and metadata
    std::map<std::string, Issued> tokens_;
    // (session, query) -> ranks clicked so far, for ranking-bias and elaborate deposits.
    std::map<std::pair<std::string, std::string>, std::vector<int>> clicked_;
    std::map<std::string, UpstreamResult> seen_;
    std::uint64_t token_counter_ = 0;

    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::size_t> queries_{0};
    std::atomic<std::size_t> clicks_{0};
};

}  // namespace swarm
