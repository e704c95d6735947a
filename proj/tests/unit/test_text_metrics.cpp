#include "doctest.h"

#include "aed/common.hpp"
#include "aed/metrics.hpp"
#include "aed/text_distance.hpp"

#include "../oracles/checks.hpp"

#include <cmath>
#include <random>

using namespace aed;

using oracle::random_string;

TEST_CASE("edit distance on known pairs") {
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("", "") == 0);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("abc", "") == 3);
    CHECK(edit_distance("flaw", "lawn") == 2);
    // One code point each, though "é" is two bytes.
    CHECK(edit_distance("é", "e") == 1);
}

TEST_CASE("edit distance matches the DP table oracle") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const std::string a = random_string(rng, 12);
        const std::string b = random_string(rng, 12);
        REQUIRE(edit_distance(a, b) == oracle::edit_distance(decode_utf8(a), decode_utf8(b)));
    }
}

TEST_CASE("edit distance is a metric") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_string(rng, 8);
        const std::string b = random_string(rng, 8);
        const std::string c = random_string(rng, 8);
        CHECK(edit_distance(a, b) == edit_distance(b, a));
        CHECK(edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c));
        CHECK((edit_distance(a, b) == 0) == (a == b));
    }
}

TEST_CASE("trigram distance") {
    // {abc, bcd} vs {abc, bce}: cosine 1/2.
    CHECK(embedding_distance("abcd", "abce") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(embedding_distance("abc", "abc") == doctest::Approx(0.0));
    CHECK(embedding_distance("abc", "xyz") == doctest::Approx(1.0));
    // Strings without trigrams.
    CHECK(embedding_distance("ab", "ab") == 0.0);
    CHECK(embedding_distance("ab", "xy") == 1.0);
    CHECK(embedding_distance("", "abc") == 1.0);

    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_string(rng, 10);
        const std::string b = random_string(rng, 10);
        const double d = embedding_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-12);
        CHECK(d == doctest::Approx(embedding_distance(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("malformed UTF-8 decodes to replacement characters") {
    const std::u32string s = decode_utf8(std::string("a\xff" "b"));
    REQUIRE(s.size() == 3);
    CHECK(s[1] == 0xFFFD);
}

TEST_CASE("AUC matches pair counting on random sets with ties") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const auto [s, y] = oracle::random_scored_labels(rng, t);
        REQUIRE(std::fabs(auc(s, y) - oracle::pairwise_auc(s, y)) <= 1e-12);
    }
}

TEST_CASE("AUC edge cases") {
    const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
    CHECK(auc(s, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(auc(s, std::vector<int>{1, 1, 0, 0}) == 0.0);
    CHECK(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(auc(s, std::vector<int>{1, 1, 1, 1}), DataError);
    CHECK_THROWS_AS(auc(s, std::vector<int>{0, 1}), DataError);
    CHECK_THROWS_AS(auc(s, std::vector<int>{0, 1, 2, 1}), DataError);
}

TEST_CASE("classification report by hand") {
    // Threshold 0.5: 0.9 TP, 0.6 FP, 0.4 FN, 0.2 TN.
    const EvalReport r = classification_report(std::vector<double>{0.9, 0.6, 0.4, 0.2}, std::vector<int>{1, 0, 1, 0});
    CHECK(r.confusion.tp == 1);
    CHECK(r.confusion.fp == 1);
    CHECK(r.confusion.fn == 1);
    CHECK(r.confusion.tn == 1);
    CHECK(r.accuracy == 0.5);
    CHECK(r.positive.precision == 0.5);
    CHECK(r.positive.recall == 0.5);
    CHECK(r.macro_precision == 0.5);
    CHECK(r.macro_recall == 0.5);
    CHECK(r.auc == 0.75);
    CHECK(r.n_test == 4);
}

TEST_CASE("classification report never predicting a class") {
    const EvalReport r = classification_report(std::vector<double>{0.1, 0.2, 0.3}, std::vector<int>{1, 0, 0});
    CHECK(r.positive.precision == 0.0);
    CHECK(r.positive.recall == 0.0);
    CHECK(r.negative.recall == 1.0);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
}
