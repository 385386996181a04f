#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "swarm/digest.hpp"
#include "swarm/error.hpp"
#include "swarm/http.hpp"
#include "swarm/index.hpp"
#include "swarm/service.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("swarm_service_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_docs(const fs::path& file, const std::vector<std::string>& lines) {
    std::ofstream out(file);
    for (const auto& l : lines) out << l << '\n';
}

std::string doc_json(const std::string& url, const std::string& body) {
    return nlohmann::json{{"url", url}, {"title", url}, {"body", body}}.dump();
}

class FlakyProvider : public SearchProvider {
  public:
    UpstreamPage search(std::string_view query, int page) const override {
        if (fail) throw std::runtime_error("upstream down");
        return fixtures.search(query, page);
    }
    FixtureProvider fixtures{std::filesystem::path(SWARM_DATA_DIR) / "fixtures"};
    std::atomic<bool> fail{false};
};

struct Harness {
    explicit Harness(ServiceConfig cfg = {}, std::shared_ptr<const SearchProvider> provider = nullptr)
        : log(sink),
          service(
              [&] {
                  cfg.secret = "test-secret";
                  return cfg;
              }(),
              provider ? provider : std::make_shared<FixtureProvider>(fs::path(SWARM_DATA_DIR) / "fixtures"), log,
              ExaminationTable::single_browsing_approximation(), [this] { return clock.load(); }) {}

    std::vector<Interaction> logged() {
        log.flush();
        std::stringstream in(sink.str());
        return read_log(in);
    }

    std::stringstream sink;
    InteractionLog log;
    std::atomic<Timestamp> clock{1'150'000'000};
    SearchService service;
};

int recommended_count(const SerpPage& page) {
    return static_cast<int>(std::count_if(page.results.begin(), page.results.end(),
                                          [](const SerpResult& r) { return r.recommended; }));
}

const SerpResult& at_rank(const SerpPage& page, int rank) {
    for (const auto& r : page.results) {
        if (r.rank == rank) return r;
    }
    throw std::runtime_error("rank not served");
}

}  // namespace

TEST(Index, EmptyAndSingleDocument) {
    auto dir = fresh_dir("empty");
    auto result = ingest_corpus(dir);
    EXPECT_EQ(result.index.size(), 0u);
    EXPECT_TRUE(result.index.search("ants").empty());
    EXPECT_TRUE(fs::exists(dir / index_file_name));

    write_docs(dir / "a.jsonl", {doc_json("http://one", "all about ants")});
    auto one = ingest_corpus(dir);
    auto hits = one.index.search("ants");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].doc.url, "http://one");
}

TEST(Index, HigherTermFrequencyRanksFirstAndTiesByUrl) {
    TermIndex index;
    index.add({"http://b", "", ""}, "ants");
    index.add({"http://a", "", ""}, "ants");
    index.add({"http://c", "", ""}, "ants ants ants");
    index.add({"http://d", "", ""}, "bees");
    auto hits = index.search("ants");
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].doc.url, "http://c");
    EXPECT_EQ(hits[1].doc.url, "http://a");
    EXPECT_EQ(hits[2].doc.url, "http://b");
    // idf = ln(1 + 4/3), tf 3.
    EXPECT_NEAR(hits[0].score, 3 * std::log(1.0 + 4.0 / 3.0), 1e-12);
    EXPECT_FALSE(index.add({"http://a", "", ""}, "duplicate"));
}

TEST(Index, HundredDocumentsIdempotentAndMalformedSkipped) {
    auto dir = fresh_dir("hundred");
    std::vector<std::string> lines;
    for (int i = 0; i < 100; ++i) lines.push_back(doc_json("http://doc/" + std::to_string(i), "term" + std::to_string(i % 7)));
    lines.push_back("{not json");
    lines.push_back(R"({"title":"no url"})");
    write_docs(dir / "b.jsonl", {lines.begin() + 50, lines.end()});
    write_docs(dir / "a.jsonl", {lines.begin(), lines.begin() + 50});
    auto first = ingest_corpus(dir);
    EXPECT_EQ(first.index.size(), 100u);
    EXPECT_EQ(first.skipped, 2u);
    const auto checksum = sha256_file(first.index_path);
    auto second = ingest_corpus(dir);
    EXPECT_EQ(sha256_file(second.index_path), checksum);

    auto loaded = load_index(dir);
    EXPECT_EQ(loaded.size(), 100u);
    EXPECT_EQ(loaded.search("term3").size(), first.index.search("term3").size());
}

TEST(Providers, FixtureReplay) {
    FixtureProvider fixtures(fs::path(SWARM_DATA_DIR) / "fixtures");
    auto page = fixtures.search("  ANTS ", 1);
    ASSERT_EQ(page.results.size(), 10u);
    EXPECT_EQ(page.results[0].url, "http://www.ants.com");
    EXPECT_FALSE(page.annotation);
    EXPECT_EQ(fixtures.search("ants", 2).results.size(), 2u);
    auto missing = fixtures.search("bees", 1);
    EXPECT_TRUE(missing.results.empty());
    EXPECT_TRUE(missing.annotation);
}

TEST(ServiceConfigTest, FileAndEnvironment) {
    std::stringstream in("flavor=ranking_bias\nk=2\nkey_mode=exact\nprovider=local-index\nport=9000\n");
    auto cfg = ServiceConfig::parse(in);
    EXPECT_EQ(cfg.flavor, Flavor::ranking_bias);
    EXPECT_EQ(cfg.k, 2);
    EXPECT_EQ(cfg.provider, ProviderKind::local_index);
    cfg.apply_env([](const char* name) -> const char* { return std::string(name) == "SWARM_K" ? "5" : nullptr; });
    EXPECT_EQ(cfg.k, 5);
    EXPECT_THROW(cfg.apply_env([](const char* name) -> const char* {
        return std::string(name) == "SWARM_K" ? "11" : nullptr;
    }),
                 Error);
    ServiceConfig defaults;
    EXPECT_EQ(defaults.k, 3);
    EXPECT_EQ(defaults.key_mode, KeyMode::ngram);
    std::stringstream bad("k=0\n");
    EXPECT_THROW(ServiceConfig::parse(bad), Error);
}

TEST(Service, UnknownQueryServesUpstreamOnly) {
    Harness h;
    auto page = h.service.handle_search("ants", 1, "s1", h.clock);
    EXPECT_EQ(page.results.size(), 10u);
    EXPECT_EQ(recommended_count(page), 0);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(page.results[static_cast<std::size_t>(i)].rank, i + 1);
    EXPECT_THROW(h.service.handle_search("   ", 1, "s1", h.clock), Error);
    EXPECT_THROW(h.service.handle_search("ants", 0, "s1", h.clock), Error);
}

TEST(Service, ClickDepositsAndNextSearchInjects) {
    Harness h;
    auto page = h.service.handle_search("ants", 1, "s1", h.clock);
    const auto& target = at_rank(page, 8);
    auto dest = h.service.handle_click(target.click_token, "s1", h.clock);
    ASSERT_TRUE(dest);
    EXPECT_EQ(*dest, target.url.url());
    auto entry = h.service.store().find(QueryKey("ants"), target.url);
    ASSERT_TRUE(entry);
    EXPECT_DOUBLE_EQ(entry->weight, 1.0);

    h.clock += 5;
    auto again = h.service.handle_search("ants", 1, "s2", h.clock);
    // k = 3 but only one trail exists.
    EXPECT_EQ(recommended_count(again), 1);
    EXPECT_EQ(again.results[0].url, target.url);
    EXPECT_TRUE(again.results[0].recommended);
    EXPECT_EQ(again.results.size(), 10u);
    std::set<std::string> urls;
    for (const auto& r : again.results) EXPECT_TRUE(urls.insert(r.url.url()).second);

    auto second_page = h.service.handle_search("ants", 2, "s2", h.clock);
    EXPECT_EQ(recommended_count(second_page), 0);
    EXPECT_EQ(second_page.results.front().rank, 11);
}

TEST(Service, RankingBiasDeposit) {
    ServiceConfig cfg;
    cfg.flavor = Flavor::ranking_bias;
    Harness h(cfg);
    auto page = h.service.handle_search("ants", 1, "s1", h.clock);
    ASSERT_TRUE(h.service.handle_click(at_rank(page, 4).click_token, "s1", h.clock));
    EXPECT_NEAR(h.service.store().find(QueryKey("ants"), at_rank(page, 4).url)->weight, 1.2195, 1e-3);
}

TEST(Service, ReplayedForgedAndForeignTokensAreRejected) {
    Harness h;
    auto page = h.service.handle_search("ants", 1, "s1", h.clock);
    const auto token = at_rank(page, 2).click_token;
    ASSERT_TRUE(h.service.handle_click(token, "s1", h.clock));
    std::stringstream before;
    h.service.store().save(before);

    EXPECT_FALSE(h.service.handle_click(token, "s1", h.clock));
    EXPECT_FALSE(h.service.handle_click("0123456789abcdef0123456789abcdef", "s1", h.clock));
    EXPECT_FALSE(h.service.handle_click(at_rank(page, 3).click_token, "intruder", h.clock));

    std::stringstream after;
    h.service.store().save(after);
    EXPECT_EQ(before.str(), after.str());
    EXPECT_EQ(h.service.stats().clicks, 1u);
}

TEST(Service, UpstreamFailureDegradesToRecommendations) {
    auto flaky = std::make_shared<FlakyProvider>();
    Harness h({}, flaky);
    auto page = h.service.handle_search("ants", 1, "s1", h.clock);
    ASSERT_TRUE(h.service.handle_click(at_rank(page, 5).click_token, "s1", h.clock));

    flaky->fail = true;
    auto degraded = h.service.handle_search("ants", 1, "s9", h.clock);
    ASSERT_EQ(degraded.results.size(), 1u);
    EXPECT_TRUE(degraded.results[0].recommended);
    EXPECT_EQ(degraded.results[0].url, at_rank(page, 5).url);
    h.log.flush();
    EXPECT_NE(h.sink.str().find("upstream error: upstream down"), std::string::npos);
}

TEST(Service, LogReplaysIntoTheServedSessions) {
    Harness h;
    auto p1 = h.service.handle_search("ants", 1, "alice", h.clock);
    h.clock += 20;
    ASSERT_TRUE(h.service.handle_click(at_rank(p1, 3).click_token, "alice", h.clock));
    h.clock += 40;
    ASSERT_TRUE(h.service.handle_click(at_rank(p1, 6).click_token, "alice", h.clock));
    h.clock += 10;
    h.service.handle_search("bees", 1, "bob", h.clock);
    h.clock += 3600;
    auto p2 = h.service.handle_search("ants", 1, "alice", h.clock);
    ASSERT_TRUE(h.service.handle_click(p2.results[0].click_token, "alice", h.clock));

    auto rows = h.logged();
    ASSERT_EQ(rows.size(), 6u);
    auto sessions = sessionize(rows);
    ASSERT_EQ(sessions.size(), 3u);
    EXPECT_EQ(sessions[0].user_id, "alice");
    EXPECT_EQ(sessions[0].clicks.size(), 2u);
    EXPECT_EQ(sessions[0].clicks[0].rank, 3);
    EXPECT_EQ(sessions[1].query, "bees");
    EXPECT_TRUE(sessions[1].clicks.empty());
    EXPECT_EQ(sessions[2].clicks.size(), 1u);

    h.log.flush();
    std::string text = h.sink.str();
    // Extension columns: recommended flag, flavor, page.
    EXPECT_NE(text.find("\t1\tnaive\t1\t"), std::string::npos);
    EXPECT_NE(text.find("\t0\tnaive\t1\t"), std::string::npos);
}

TEST(Http, RoundTrip) {
    std::stringstream sink;
    InteractionLog log(sink);
    ServiceConfig cfg;
    cfg.secret = "http-test";
    SearchService service(cfg, std::make_shared<FixtureProvider>(fs::path(SWARM_DATA_DIR) / "fixtures"), log,
                          ExaminationTable::single_browsing_approximation());
    httplib::Server server;
    install_routes(server, service);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    EXPECT_EQ(client.Get("/healthz")->status, 200);
    EXPECT_EQ(client.Get("/search?q=%20")->status, 400);

    auto res = client.Get("/search?q=ants");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    auto cookie = res->get_header_value("Set-Cookie");
    ASSERT_FALSE(cookie.empty());
    httplib::Headers headers{{"Cookie", cookie.substr(0, cookie.find(';'))}};
    auto body = nlohmann::json::parse(res->body);
    EXPECT_EQ(body["query"], "ants");
    EXPECT_EQ(body["page"], 1);
    ASSERT_EQ(body["results"].size(), 10u);
    const auto token = body["results"][7]["click_token"].get<std::string>();

    auto click = client.Get("/click?t=" + token, headers);
    ASSERT_TRUE(click);
    EXPECT_EQ(click->status, 302);
    EXPECT_EQ(click->get_header_value("Location"), body["results"][7]["url"]);
    EXPECT_EQ(client.Get("/click?t=" + token, headers)->status, 404);

    auto again = nlohmann::json::parse(client.Get("/search?q=ants", headers)->body);
    EXPECT_EQ(again["results"][0]["url"], body["results"][7]["url"]);
    std::set<std::string> keys;
    for (const auto& r : again["results"]) {
        std::set<std::string> k;
        for (const auto& [name, _] : r.items()) k.insert(name);
        if (keys.empty()) keys = k;
        EXPECT_EQ(k, keys);
    }
    EXPECT_EQ(keys, (std::set<std::string>{"rank", "url", "title", "snippet", "click_token"}));

    auto stats = nlohmann::json::parse(client.Get("/stats")->body);
    EXPECT_EQ(stats["queries"], 2);  // the blank query was refused before counting
    EXPECT_EQ(stats["clicks"], 1);
    EXPECT_EQ(stats["trails"], 1);
    EXPECT_GT(stats["store_bytes"].get<int>(), 0);

    server.stop();
    listener.join();
}
