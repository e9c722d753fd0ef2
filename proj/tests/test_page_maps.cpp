#include <gtest/gtest.h>

#include <cstring>

#include "cspot/page_maps.hpp"
#include "test_util.hpp"

using namespace cspot;
using namespace cspot::testutil;

namespace {

void append_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f32(std::string& s, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32(s, bits);
}

// 2x2 grid, 2 channels (blank + 'a'), uniform prob 0.5, scale 0.25,
// assembled by hand so the on-disk layout is pinned independently of the
// writer.
std::string known_payload(float scale_value = 0.25f) {
    std::string bytes = "CPM1";
    append_u32(bytes, 2);  // H_r
    append_u32(bytes, 2);  // W_r
    append_u32(bytes, 2);  // C
    append_u32(bytes, 8);  // downscale
    append_u32(bytes, 0);  // blank_index
    append_u32(bytes, 0);  // blank code point
    append_u32(bytes, U'a');
    for (int i = 0; i < 4; ++i) append_f32(bytes, scale_value);
    for (int i = 0; i < 8; ++i) append_f32(bytes, 0.5f);
    return bytes;
}

TEST(CpmapFormat, LoadsKnownPayload) {
    const PageMaps page = parse_page_maps(known_payload(), "known");
    EXPECT_EQ(page.height_r, 2);
    EXPECT_EQ(page.width_r, 2);
    EXPECT_EQ(page.channels(), 2);
    EXPECT_EQ(page.downscale, 8);
    EXPECT_EQ(page.alphabet.blank_index, 0);
    EXPECT_EQ(page.alphabet.symbols[1], U'a');
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            EXPECT_FLOAT_EQ(page.scale_at(r, c), 0.25f);
            EXPECT_FLOAT_EQ(page.prob_at(r, c, 0), 0.5f);
            EXPECT_FLOAT_EQ(page.prob_at(r, c, 1), 0.5f);
        }
}

TEST(CpmapFormat, ScaleOutOfRangeRejected) {
    try {
        parse_page_maps(known_payload(1.5f), "bad_scale");
        FAIL() << "expected invariant-violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invariant_violation);
        EXPECT_NE(std::string(e.what()).find("scale["), std::string::npos);
    }
}

TEST(CpmapFormat, BadMagicRejected) {
    std::string bytes = known_payload();
    bytes[0] = 'X';
    try {
        parse_page_maps(bytes, "bad_magic");
        FAIL() << "expected bad-magic";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::bad_magic);
    }
}

TEST(CpmapFormat, TruncationRejected) {
    const std::string bytes = known_payload();
    for (size_t cut : {size_t(3), size_t(10), bytes.size() - 1}) {
        try {
            parse_page_maps(bytes.substr(0, cut), "truncated");
            FAIL() << "expected failure at cut " << cut;
        } catch (const Error& e) {
            EXPECT_TRUE(e.code() == Errc::truncated_payload || e.code() == Errc::bad_magic);
        }
    }
}

TEST(CpmapFormat, TrailingBytesRejected) {
    try {
        parse_page_maps(known_payload() + "junk", "trailing");
        FAIL() << "expected truncated-payload";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::truncated_payload);
    }
}

TEST(CpmapFormat, NanRejected) {
    std::string bytes = known_payload();
    std::string nan_bytes;
    append_f32(nan_bytes, std::numeric_limits<float>::quiet_NaN());
    // last probability value
    bytes.replace(bytes.size() - 4, 4, nan_bytes);
    EXPECT_THROW(parse_page_maps(bytes, "nan"), Error);
}

TEST(CpmapFormat, DenormalizedProbRejected) {
    std::string bytes = "CPM1";
    append_u32(bytes, 1);
    append_u32(bytes, 1);
    append_u32(bytes, 2);
    append_u32(bytes, 8);
    append_u32(bytes, 0);
    append_u32(bytes, 0);
    append_u32(bytes, U'a');
    append_f32(bytes, 0.5f);
    append_f32(bytes, 0.4f);  // sums to 0.9
    append_f32(bytes, 0.5f);
    EXPECT_THROW(parse_page_maps(bytes, "denorm"), Error);
}

TEST(CpmapFormat, RoundTripIsByteExact) {
    TempDir dir("roundtrip");
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const PageMaps page =
            random_page(seed, rng.range(1, 12), rng.range(1, 16), rng.range(2, 6));
        const auto path = dir.path() / "page.cpmap";
        write_page_maps(page, path);
        const std::string original = read_file(path);
        const PageMaps loaded = load_page_maps(path);
        write_page_maps(loaded, path);
        EXPECT_EQ(read_file(path), original) << "seed " << seed;
    }
}

TEST(ScaledProb, Product) {
    const PageMaps page = parse_page_maps(known_payload(), "known");
    EXPECT_DOUBLE_EQ(scaled_prob_at(page, 0, 0, 1), 0.5 * 0.25);
}

TEST(ScaledProb, ZeroScaleAnnihilates) {
    PageMaps page = random_page(3, 4, 4);
    for (float& s : page.scale) s = 0.0f;
    for (int k = 0; k < page.channels(); ++k)
        EXPECT_DOUBLE_EQ(scaled_prob_at(page, 2, 1, k), 0.0);
}

TEST(ScaledProb, MatchesElementwiseProduct) {
    const PageMaps page = random_page(17, 9, 13, 5);
    for (int r = 0; r < page.height_r; ++r)
        for (int c = 0; c < page.width_r; ++c)
            for (int k = 0; k < page.channels(); ++k)
                EXPECT_DOUBLE_EQ(scaled_prob_at(page, r, c, k),
                                 static_cast<double>(page.prob_at(r, c, k)) *
                                     static_cast<double>(page.scale_at(r, c)));
}

TEST(ScaledProb, OutOfBoundsRejected) {
    const PageMaps page = random_page(5, 3, 3);
    EXPECT_THROW(scaled_prob_at(page, 3, 0, 0), Error);
    EXPECT_THROW(scaled_prob_at(page, 0, 3, 0), Error);
    EXPECT_THROW(scaled_prob_at(page, 0, 0, 9), Error);
}

TEST(ScaledProb, NonBlankSumBoundedByScale) {
    const PageMaps page = random_page(23, 8, 8, 6);
    for (int r = 0; r < page.height_r; ++r)
        for (int c = 0; c < page.width_r; ++c) {
            double sum = 0.0;
            for (int k = 0; k < page.channels(); ++k) {
                if (k == page.alphabet.blank_index) continue;
                sum += scaled_prob_at(page, r, c, k);
            }
            EXPECT_LE(sum, static_cast<double>(page.scale_at(r, c)) + 1e-6);
        }
}

}  // namespace
