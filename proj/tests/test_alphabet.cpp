#include <gtest/gtest.h>

#include "cspot/alphabet.hpp"
#include "test_util.hpp"

using namespace cspot;

namespace {

TEST(Alphabet, RejectsDuplicateSymbols) {
    EXPECT_THROW(Alphabet({0, U'a', U'a'}, 0), Error);
}

TEST(Alphabet, RejectsBlankOutOfRange) {
    EXPECT_THROW(Alphabet({0, U'a'}, 2), Error);
    EXPECT_THROW(Alphabet({0, U'a'}, -1), Error);
}

TEST(Alphabet, BlankNotAddressableFromText) {
    const Alphabet a = Alphabet::latin_lower();
    EXPECT_EQ(a.index_of(0), -1);
    EXPECT_EQ(a.index_of(U'a'), 1);
    EXPECT_EQ(a.index_of(U'z'), 26);
}

TEST(NormalizeQuery, TalliesCounts) {
    const Alphabet a = Alphabet::latin_lower();
    const Query q = normalize_query("and", a);
    EXPECT_EQ(q.normalized, "and");
    EXPECT_DOUBLE_EQ(q.total_count, 3.0);
    EXPECT_DOUBLE_EQ(q.count_hist[a.index_of(U'a')], 1.0);
    EXPECT_DOUBLE_EQ(q.count_hist[a.index_of(U'n')], 1.0);
    EXPECT_DOUBLE_EQ(q.count_hist[a.index_of(U'd')], 1.0);
    EXPECT_DOUBLE_EQ(q.count_hist[a.blank_index], 0.0);
}

TEST(NormalizeQuery, FoldsCase) {
    const Alphabet a = Alphabet::latin_lower();
    const Query folded = normalize_query("And", a, true);
    const Query plain = normalize_query("and", a, true);
    EXPECT_EQ(folded.normalized, plain.normalized);
    EXPECT_EQ(folded.count_hist, plain.count_hist);
}

TEST(NormalizeQuery, PermutationsShareHistogram) {
    const Alphabet a = Alphabet::latin_lower();
    EXPECT_EQ(normalize_query("dan", a).count_hist, normalize_query("and", a).count_hist);
}

TEST(NormalizeQuery, HistogramMatchesLength) {
    const Alphabet a = Alphabet::latin_lower();
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::string word;
        const int len = rng.range(1, 12);
        for (int i = 0; i < len; ++i) word.push_back(static_cast<char>('a' + rng.range(0, 25)));
        const Query q = normalize_query(word, a);
        double l1 = 0.0;
        for (double v : q.count_hist) l1 += v;
        EXPECT_DOUBLE_EQ(l1, q.total_count);
        EXPECT_DOUBLE_EQ(q.total_count, static_cast<double>(q.normalized.size()));
    }
}

TEST(NormalizeQuery, Idempotent) {
    const Alphabet a = Alphabet::latin_lower();
    for (const char* raw : {"And", "don't", "the,", "Mixed-Case"}) {
        const Query once = normalize_query(raw, a);
        const Query twice = normalize_query(once.normalized, a);
        EXPECT_EQ(once.normalized, twice.normalized);
        EXPECT_EQ(once.count_hist, twice.count_hist);
    }
}

TEST(NormalizeQuery, DropsPunctuation) {
    const Alphabet a = Alphabet::latin_lower();
    EXPECT_EQ(normalize_query("and,", a).normalized, "and");
    EXPECT_EQ(normalize_query("don't", a).normalized, "dont");
}

TEST(NormalizeQuery, UnknownSymbolRejected) {
    const Alphabet a = Alphabet::latin_lower();
    try {
        normalize_query("caf\xC3\xA9", a);  // é
        FAIL() << "expected unknown-symbol";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_symbol);
    }
}

TEST(NormalizeQuery, EmptyAfterNormalizationRejected) {
    const Alphabet a = Alphabet::latin_lower();
    try {
        normalize_query("...", a);
        FAIL() << "expected empty-after-normalization";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::empty_after_normalization);
    }
}

TEST(NormalizeQuery, EmptyRawRejected) {
    EXPECT_THROW(normalize_query("", Alphabet::latin_lower()), Error);
}

TEST(Utf8, RoundTrip) {
    const std::string s = "a\xC3\xA9\xE2\x82\xAC";  // a é €
    EXPECT_EQ(utf8::encode(utf8::decode(s)), s);
}

}  // namespace
