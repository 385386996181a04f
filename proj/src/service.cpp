#include "swarm/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "swarm/digest.hpp"
#include "swarm/error.hpp"
#include "swarm/rng.hpp"
#include "swarm/text.hpp"

namespace swarm {

// ---------------------------------------------------------------------------
// Providers

namespace {

UpstreamPage slice(const std::vector<UpstreamResult>& all, int page_number) {
    UpstreamPage page;
    const auto first = static_cast<std::size_t>(page_number - 1) * results_per_page;
    for (auto i = first; i < all.size() && i < first + results_per_page; ++i) page.results.push_back(all[i]);
    return page;
}

}  // namespace

UpstreamPage LocalIndexProvider::search(std::string_view query, int page_number) const {
    std::vector<UpstreamResult> all;
    for (auto& hit : index_.search(query)) {
        all.push_back({std::move(hit.doc.url), std::move(hit.doc.title), std::move(hit.doc.snippet)});
    }
    auto page = slice(all, page_number);
    if (all.empty()) page.annotation = "no matching documents";
    return page;
}

FixtureProvider::FixtureProvider(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(Errc::io, "fixture directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        try {
            auto j = nlohmann::json::parse(in);
            auto key = normalize_query(j.at("query").get<std::string>());
            if (key.empty()) throw Error(Errc::parse, "blank fixture query");
            std::vector<UpstreamResult> results;
            for (const auto& r : j.at("results")) {
                results.push_back({r.at("url").get<std::string>(), r.value("title", std::string()),
                                   r.value("snippet", std::string())});
            }
            fixtures_[key] = std::move(results);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse, file.string() + ": " + e.what());
        } catch (const Error& e) {
            throw Error(Errc::parse, file.string() + ": " + e.what());
        }
    }
}

UpstreamPage FixtureProvider::search(std::string_view query, int page_number) const {
    auto it = fixtures_.find(normalize_query(query));
    if (it == fixtures_.end()) {
        UpstreamPage page;
        page.annotation = "no fixture for query";
        return page;
    }
    return slice(it->second, page_number);
}

// ---------------------------------------------------------------------------
// Configuration

void ServiceConfig::validate() const {
    if (k < 1 || k > 10) throw Error(Errc::configuration, "k must be in [1, 10]");
    if (!(delta > 0.0)) throw Error(Errc::configuration, "delta must be positive");
    if (port < 0 || port > 65535) throw Error(Errc::configuration, "port out of range");
}

void ServiceConfig::set(std::string_view raw_key, std::string_view raw_value) {
    const auto key = normalize_query(raw_key);
    std::string value(raw_value);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    if (key == "flavor") {
        flavor = parse_flavor(value);
    } else if (key == "delta") {
        delta = detail::parse_double(value);
    } else if (key == "k") {
        k = static_cast<int>(detail::parse_int(value));
    } else if (key == "key_mode") {
        key_mode = parse_key_mode(value);
    } else if (key == "provider") {
        auto v = normalize_query(value);
        if (v == "local-index" || v == "local_index") {
            provider = ProviderKind::local_index;
        } else if (v == "fixture") {
            provider = ProviderKind::fixture;
        } else {
            throw Error(Errc::configuration, "unknown provider '" + value + "'");
        }
    } else if (key == "provider_path") {
        provider_path = value;
    } else if (key == "log_path") {
        log_path = value;
    } else if (key == "exam_table") {
        exam_table = value;
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(detail::parse_int(value));
    } else if (key == "host") {
        host = value;
    } else if (key == "port") {
        port = static_cast<int>(detail::parse_int(value));
    } else if (key == "secret") {
        secret = value;
    } else {
        throw Error(Errc::configuration, "unknown service setting '" + key + "'");
    }
}

ServiceConfig ServiceConfig::parse(std::istream& in) {
    ServiceConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = normalize_query(line);
        if (text.empty() || text.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
        try {
            cfg.set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read service config " + path.string());
    return parse(in);
}

void ServiceConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
    static constexpr const char* keys[] = {"flavor",   "delta",      "k",    "key_mode",
                                           "provider", "provider_path", "log_path", "exam_table",
                                           "seed",     "host",       "port", "secret"};
    for (const char* key : keys) {
        std::string name(env_prefix);
        for (const char* c = key; *c; ++c) name.push_back(static_cast<char>(std::toupper(*c)));
        if (const char* value = getenv(name.c_str())) set(key, value);
    }
    validate();
}

std::string ServiceConfig::to_text() const {
    std::ostringstream out;
    out << "flavor=" << to_string(flavor) << "\ndelta=" << detail::format_double(delta)
        << "\nk=" << k << "\nkey_mode=" << to_string(key_mode)
        << "\nprovider=" << (provider == ProviderKind::fixture ? "fixture" : "local-index")
        << "\nprovider_path=" << provider_path.string() << "\nlog_path=" << log_path.string()
        << "\nexam_table=" << exam_table.string() << "\nseed=" << seed << "\nhost=" << host
        << "\nport=" << port << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Interaction log

std::string format_log_record(const LogRecord& r) {
    auto clean = [](std::string s) {
        for (auto& c : s) {
            if (c == '\t' || c == '\n' || c == '\r') c = ' ';
        }
        return s;
    };
    std::string line;
    line += clean(r.row.user_id) + '\t' + clean(r.row.query) + '\t' + format_timestamp(r.row.timestamp) +
            '\t' + std::to_string(r.row.rank) + '\t' + (r.row.url ? clean(r.row.url->url()) : "") + '\t' +
            (r.recommended ? "1" : "0") + '\t' + std::string(to_string(r.flavor)) + '\t' +
            std::to_string(r.page) + '\t' + clean(r.note);
    return line;
}

InteractionLog::InteractionLog(const std::filesystem::path& path)
    : file_(std::make_unique<std::ofstream>(path, std::ios::app)), out_(file_.get()) {
    if (!*file_) throw Error(Errc::io, "cannot open interaction log " + path.string());
    writer_ = std::thread([this] { run(); });
}

InteractionLog::InteractionLog(std::ostream& sink) : out_(&sink) {
    writer_ = std::thread([this] { run(); });
}

InteractionLog::~InteractionLog() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    writer_.join();
}

void InteractionLog::append(LogRecord record) {
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(record));
        ++appended_;
    }
    wake_.notify_one();
}

void InteractionLog::flush() {
    std::unique_lock lock(mutex_);
    const auto target = appended_;
    drained_.wait(lock, [&] { return written_ >= target; });
}

void InteractionLog::run() {
    std::unique_lock lock(mutex_);
    while (true) {
        wake_.wait(lock, [&] { return stop_ || !queue_.empty(); });
        if (queue_.empty() && stop_) break;
        std::deque<LogRecord> batch;
        batch.swap(queue_);
        lock.unlock();
        for (const auto& record : batch) *out_ << format_log_record(record) << '\n';
        out_->flush();
        lock.lock();
        written_ += batch.size();
        drained_.notify_all();
    }
}

// ---------------------------------------------------------------------------
// Service

Timestamp system_clock_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

SearchService::SearchService(ServiceConfig config, std::shared_ptr<const SearchProvider> provider,
                             InteractionLog& log, ExaminationTable table, Clock clock)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      log_(log),
      table_(std::move(table)),
      clock_(std::move(clock)),
      store_(config_.flavor, DecayConfig{config_.delta, 1e-6}) {
    config_.validate();
    if (!provider_) throw Error(Errc::configuration, "no search provider");
    if (config_.secret.empty()) config_.secret = random_hex(32);
}

std::string SearchService::issue_token(const Issued& issued) {
    // Caller holds mutex_.
    const auto nonce = ++token_counter_;
    auto token = hmac_sha256_hex(config_.secret, std::to_string(nonce) + '\n' + issued.session + '\n' +
                                                     std::to_string(issued.rank) + '\n' + issued.url.url())
                     .substr(0, 32);
    tokens_.emplace(token, issued);
    return token;
}

void SearchService::expire_tokens(Timestamp now) {
    std::erase_if(tokens_, [&](const auto& kv) { return now - kv.second.issued_at > token_ttl; });
}

SerpPage SearchService::handle_search(std::string_view raw_query, int page_number,
                                      std::string_view session, Timestamp now) {
    const auto query = normalize_query(raw_query);
    if (query.empty()) throw Error(Errc::invalid_query, "blank query");
    if (page_number < 1) throw Error(Errc::invalid_argument, "page must be >= 1");

    UpstreamPage upstream;
    try {
        upstream = provider_->search(query, page_number);
    } catch (const std::exception& e) {
        upstream.results.clear();
        upstream.annotation = std::string("upstream error: ") + e.what();
    }

    std::vector<DocRef> recs;
    if (page_number == 1) {
        const auto keys = expand_query_keys(query, config_.key_mode);
        Rng rng(derive_seed(config_.seed, requests_.fetch_add(1)));
        try {
            recs = recommend(store_, keys, config_.k, now, rng);
        } catch (const Error& e) {
            if (e.code() != Errc::clock_skew) throw;
            upstream.annotation = std::string("recommendation skipped: ") + e.what();
        }
    }

    SerpPage page;
    page.query = query;
    page.page_number = page_number;
    {
        std::lock_guard lock(mutex_);
        expire_tokens(now);
        std::set<std::string> used;
        auto push = [&](const UpstreamResult& r, bool recommended) {
            if (page.results.size() >= static_cast<std::size_t>(results_per_page)) return;
            if (!used.insert(r.url).second) return;
            SerpResult out;
            out.rank = (page_number - 1) * results_per_page + static_cast<int>(page.results.size()) + 1;
            out.url = DocRef(r.url);
            out.title = r.title.empty() ? r.url : r.title;
            out.snippet = r.snippet;
            out.recommended = recommended;
            out.click_token = issue_token(
                Issued{std::string(session), query, out.rank, out.url, recommended, page_number, now});
            page.results.push_back(std::move(out));
        };
        for (const auto& r : upstream.results) {
            if (!r.url.empty()) seen_[r.url] = r;
        }
        for (const auto& doc : recs) {
            auto it = seen_.find(doc.url());
            push(it != seen_.end() ? it->second : UpstreamResult{doc.url(), doc.url(), {}}, true);
        }
        for (const auto& r : upstream.results) {
            if (!r.url.empty()) push(r, false);
        }
    }

    queries_.fetch_add(1);
    LogRecord record;
    record.row = Interaction{std::string(session), query, now, 0, std::nullopt};
    record.flavor = config_.flavor;
    record.page = page_number;
    record.note = upstream.annotation.value_or("");
    log_.append(std::move(record));
    return page;
}

double SearchService::deposit_increment(const Issued& issued) {
    // Caller holds mutex_; clicked_ already includes this click.
    switch (config_.flavor) {
        case Flavor::naive:
            return increment_naive(issued.rank);
        case Flavor::ranking_bias: {
            const auto& ranks = clicked_[{issued.session, issued.query}];
            int last = 0;
            for (std::size_t i = 0; i + 1 < ranks.size(); ++i) {
                if (ranks[i] < issued.rank) last = std::max(last, ranks[i]);
            }
            if (!table_.find(issued.rank, last)) return 1.0;
            return increment_ranking_bias(issued.rank, last, table_);
        }
        case Flavor::elaborate:
            return 1.0;
    }
    return 1.0;
}

std::optional<std::string> SearchService::handle_click(std::string_view token,
                                                       std::string_view session, Timestamp now) {
    Issued issued;
    double increment = 1.0;
    std::optional<int> position;
    {
        std::lock_guard lock(mutex_);
        auto it = tokens_.find(std::string(token));
        if (it == tokens_.end() || (!session.empty() && it->second.session != session)) {
            std::clog << "rejected click token '" << token << "'\n";
            return std::nullopt;
        }
        issued = std::move(it->second);
        tokens_.erase(it);
        auto& ranks = clicked_[{issued.session, issued.query}];
        ranks.push_back(issued.rank);
        increment = deposit_increment(issued);
        // Live Elaborate trails: the clicked document takes the slot of its click ordinal.
        if (config_.flavor == Flavor::elaborate) position = static_cast<int>(ranks.size());
    }

    for (const auto& key : expand_query_keys(issued.query, config_.key_mode)) {
        store_.deposit(key, issued.url, position, increment, now);
    }
    clicks_.fetch_add(1);

    LogRecord record;
    record.row = Interaction{issued.session, issued.query, now, issued.rank, issued.url};
    record.recommended = issued.recommended;
    record.flavor = config_.flavor;
    record.page = issued.page;
    log_.append(std::move(record));
    return issued.url.url();
}

ServiceStats SearchService::stats() const {
    return {queries_.load(), clicks_.load(), store_.size(), store_.approx_bytes()};
}

}  // namespace swarm
