#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "swarm/error.hpp"
#include "swarm/intent.hpp"

using namespace swarm;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    auto dir = std::filesystem::temp_directory_path() / "swarm_intent_test";
    std::filesystem::create_directories(dir);
    auto path = dir / name;
    std::ofstream(path) << text;
    return path;
}

NameLexicon bundled() {
    std::vector<std::filesystem::path> names{std::string(SWARM_DATA_DIR) + "/lexicon/names_sample.txt"};
    return load_lexicon(names, std::string(SWARM_DATA_DIR) + "/lexicon/suffixes.txt");
}

}  // namespace

TEST(Lexicon, CaseFoldDedup) {
    std::vector<std::filesystem::path> files{write_temp("audi.txt", "Audi\naudi\n# comment\n\n")};
    auto lex = load_lexicon(files);
    EXPECT_EQ(lex.names, (std::set<std::string>{"audi"}));
}

TEST(Lexicon, BundledSample) {
    auto lex = bundled();
    for (const char* term : {"cajastur", "digg", "john", "moore", "uk labour party"}) {
        EXPECT_TRUE(lex.names.contains(term)) << term;
    }
    EXPECT_TRUE(lex.suffixes.contains(".com"));
}

TEST(Lexicon, EmptySuffixFileStillClassifies) {
    std::vector<std::filesystem::path> files{write_temp("names.txt", "digg\n")};
    auto lex = load_lexicon(files, write_temp("empty.txt", ""));
    EXPECT_TRUE(lex.suffixes.empty());
    EXPECT_EQ(classify("best news aggregator sites", lex), Intent::non_navigational);
}

TEST(Lexicon, MissingFileNamed) {
    std::vector<std::filesystem::path> files{"/nonexistent/names.txt"};
    try {
        load_lexicon(files);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/names.txt"), std::string::npos);
    }
}

TEST(Classify, Examples) {
    auto lex = bundled();
    EXPECT_EQ(classify("ants", lex), Intent::navigational);
    EXPECT_EQ(classify("who discovered first antibiotic", lex), Intent::non_navigational);
    EXPECT_EQ(classify("cajastur mortgage rates info", lex), Intent::navigational);
    EXPECT_EQ(classify("cheap tickets at ticketmaster.com", lex), Intent::navigational);
    EXPECT_THROW(classify("   ", lex), Error);
}

TEST(Classify, NamesMatchWholeTokenRunsOnly) {
    auto lex = bundled();
    // "johnson" contains "john" but is a different token.
    EXPECT_EQ(classify("johnson county tax records", lex), Intent::non_navigational);
    EXPECT_EQ(classify("history of the uk labour party", lex), Intent::navigational);
    EXPECT_EQ(classify("uk party labour history", lex), Intent::non_navigational);
}
