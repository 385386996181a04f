#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "swarm/error.hpp"
#include "swarm/metrics.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

CondensedList gains(std::vector<std::uint8_t> g) { return CondensedList{std::move(g)}; }

// Textbook DCG with base-2 discounts and the first position undiscounted.
double reference_dcg(const std::vector<std::uint8_t>& g, int p) {
    double sum = 0.0;
    for (int i = 1; i <= p && i <= static_cast<int>(g.size()); ++i) {
        sum += i == 1 ? g[i - 1] : g[i - 1] / std::log2(static_cast<double>(i));
    }
    return sum;
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no swarm::Error thrown";
    return Errc::invalid_argument;
}

ScoreRecord rec(std::string user, std::string query, double v, int cutoff = 3) {
    return {std::move(query), std::move(user), 0, cutoff, v};
}

}  // namespace

TEST(CondensedListTest, Examples) {
    std::vector<int> c135{1, 3, 5}, c1{1}, c2{2}, none;
    EXPECT_EQ(condensed_list(c135).gains, (std::vector<std::uint8_t>{1, 0, 1, 0, 1}));
    EXPECT_EQ(condensed_list(c1).gains, (std::vector<std::uint8_t>{1}));
    EXPECT_EQ(condensed_list(c2).gains, (std::vector<std::uint8_t>{0, 1}));
    EXPECT_EQ(code_of([&] { condensed_list(none); }), Errc::empty_judgments);
}

TEST(Dcg, WorkedExample) {
    NdcgConfig cfg;
    auto list = gains({1, 0, 1, 0, 1});
    EXPECT_NEAR(dcg(list, 5, cfg), 2.062, 1e-3);
    EXPECT_NEAR(dcg(gains({1, 1, 1, 0, 0}), 5, cfg), 2.631, 1e-3);
    EXPECT_NEAR(ndcg(list, 5, cfg), 0.784, 1e-3);
}

TEST(Dcg, Examples) {
    NdcgConfig cfg;
    EXPECT_EQ(dcg(gains({0, 0, 0}), 3, cfg), 0.0);
    EXPECT_DOUBLE_EQ(dcg(gains({0, 1}), 2, cfg), 1.0);
    EXPECT_DOUBLE_EQ(ndcg(gains({1, 1, 0}), 3, cfg), 1.0);
    EXPECT_NEAR(ndcg(gains({0, 0, 1}), 3, cfg), 0.631, 1e-3);
    EXPECT_EQ(code_of([&] { dcg(gains({1}), 0, cfg); }), Errc::invalid_cutoff);
    EXPECT_EQ(code_of([&] { ndcg(gains({0, 0}), 2, cfg); }), Errc::undefined_normalization);
}

TEST(Dcg, MatchesReferenceOnRandomLists) {
    NdcgConfig cfg;
    Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::uint8_t> g(1 + rng.next() % 15);
        for (auto& x : g) x = rng.uniform() < 0.4;
        g.back() = 1;
        for (int p : {1, 3, 10, 20}) {
            EXPECT_NEAR(dcg(gains(g), p, cfg), reference_dcg(g, p), 1e-12);
            auto ideal = g;
            std::sort(ideal.rbegin(), ideal.rend());
            double v = ndcg(gains(g), p, cfg);
            double best = reference_dcg(ideal, p);
            if (best > 0) { EXPECT_NEAR(v, reference_dcg(g, p) / best, 1e-12); }
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0 + 1e-12);
        }
    }
}

TEST(Averaging, Micro) {
    std::vector<ScoreRecord> a{rec("u", "q", 0.5), rec("u", "q", 0.5)};
    EXPECT_DOUBLE_EQ(micro_average(a, 3), 0.5);
    std::vector<ScoreRecord> b{rec("a", "q", 1.0), rec("a", "q", 0.0), rec("a", "q", 0.5), rec("a", "q", 0.5)};
    EXPECT_DOUBLE_EQ(micro_average(b, 3), 0.5);
    std::vector<ScoreRecord> c{rec("a", "q", 0.784), rec("a", "q", 1.0)};
    EXPECT_NEAR(micro_average(c, 3), 0.892, 1e-12);
    std::vector<ScoreRecord> none;
    EXPECT_EQ(code_of([&] { micro_average(none, 3); }), Errc::no_data);
    EXPECT_EQ(code_of([&] { micro_average(c, 10); }), Errc::no_data);
}

TEST(Averaging, Macro) {
    std::vector<ScoreRecord> r{rec("A", "x", 1.0), rec("A", "y", 0.0), rec("B", "x", 1.0)};
    EXPECT_DOUBLE_EQ(macro_average(r, GroupBy::user, 3), 0.75);
    EXPECT_DOUBLE_EQ(macro_average(r, GroupBy::query, 3), 0.5);

    std::vector<ScoreRecord> single{rec("A", "x", 0.2), rec("A", "x", 0.9), rec("A", "x", 0.4)};
    EXPECT_DOUBLE_EQ(macro_average(single, GroupBy::user, 3), micro_average(single, 3));

    std::vector<ScoreRecord> equal{rec("A", "x", 0.2), rec("A", "x", 0.6), rec("B", "x", 0.1), rec("B", "x", 0.9)};
    EXPECT_NEAR(macro_average(equal, GroupBy::user, 3), micro_average(equal, 3), 1e-15);
    std::vector<ScoreRecord> none;
    EXPECT_EQ(code_of([&] { macro_average(none, GroupBy::query, 3); }), Errc::no_data);
}

TEST(NdcgConfigTest, Validation) {
    NdcgConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.cutoffs = {3, 1};
    EXPECT_THROW(cfg.validate(), Error);
    cfg.cutoffs = {1};
    cfg.base = 1.5;
    EXPECT_THROW(cfg.validate(), Error);
}
