#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cspot/ctc.hpp"
#include "cspot/synth.hpp"
#include "test_util.hpp"

using namespace cspot;
using namespace cspot::testutil;

namespace {

// Brute-force CTC oracle: enumerate every label sequence of length T,
// collapse it (merge repeats, drop blanks) and accumulate the path
// probabilities of sequences matching the query.
double brute_force_log_prob(const StepSequence& seq, const std::vector<int>& query, int blank) {
    const int T = seq.steps;
    const int C = seq.channels;
    double total = 0.0;
    std::vector<int> path(T, 0);
    for (long long code = 0;; ++code) {
        long long rest = code;
        for (int t = 0; t < T; ++t) {
            path[t] = static_cast<int>(rest % C);
            rest /= C;
        }
        if (rest > 0) break;
        std::vector<int> collapsed;
        int prev = -1;
        for (int t = 0; t < T; ++t) {
            if (path[t] != prev && path[t] != blank) collapsed.push_back(path[t]);
            prev = path[t];
        }
        if (collapsed == query) {
            double lp = 0.0;
            for (int t = 0; t < T; ++t) lp += seq.at(t, path[t]);
            total += std::exp(lp);
        }
    }
    return total > 0.0 ? std::log(total) : kLogZero;
}

StepSequence random_steps(uint64_t seed, int T, int C) {
    Rng rng(splitmix64(seed));
    StepSequence seq;
    seq.steps = T;
    seq.channels = C;
    seq.log_probs.resize(static_cast<size_t>(T) * C);
    for (int t = 0; t < T; ++t) {
        double sum = 0.0;
        std::vector<double> p(C);
        for (int c = 0; c < C; ++c) {
            p[c] = rng.unit() + 1e-3;
            sum += p[c];
        }
        for (int c = 0; c < C; ++c)
            seq.log_probs[static_cast<size_t>(t) * C + c] = std::log(p[c] / sum);
    }
    return seq;
}

std::vector<std::vector<int>> all_queries(int max_len, int symbols) {
    std::vector<std::vector<int>> out;
    for (int len = 1; len <= max_len; ++len) {
        std::vector<int> q(len, 1);
        for (;;) {
            out.push_back(q);
            int i = len - 1;
            while (i >= 0 && q[i] == symbols) q[i--] = 1;
            if (i < 0) break;
            ++q[i];
        }
    }
    return out;
}

TEST(CtcForward, MatchesBruteForceEnumeration) {
    const int C = 4;  // blank + 3 symbols
    const int blank = 0;
    uint64_t seed = 100;
    for (int T = 1; T <= 6; ++T) {
        const StepSequence seq = random_steps(seed++, T, C);
        for (const std::vector<int>& q : all_queries(3, C - 1)) {
            const double fast = ctc_sequence_log_prob(seq, q, blank);
            const double slow = brute_force_log_prob(seq, q, blank);
            if (slow == kLogZero) {
                EXPECT_EQ(fast, kLogZero) << "T=" << T;
            } else {
                EXPECT_NEAR(fast, slow, 1e-9) << "T=" << T;
            }
        }
    }
}

TEST(CtcForward, PerStepCompletionMatchesPrefixEnumeration) {
    const int C = 4, blank = 0;
    const StepSequence seq = random_steps(7, 5, C);
    const std::vector<int> query = {1, 2, 1};
    const CtcScoreMatrix m = ctc_forward(seq, query, blank);
    for (int t = 0; t < seq.steps; ++t) {
        StepSequence prefix = seq;
        prefix.steps = t + 1;
        prefix.log_probs.resize(static_cast<size_t>(t + 1) * C);
        const double slow = brute_force_log_prob(prefix, query, blank);
        if (slow == kLogZero)
            EXPECT_EQ(m.completion(t), kLogZero);
        else
            EXPECT_NEAR(m.completion(t), slow, 1e-9) << "t=" << t;
    }
}

TEST(CtcForward, RepeatedLabelNeedsSeparatorBlank) {
    // "aa" cannot be emitted in 2 steps: a,a collapses to "a".
    StepSequence seq;
    seq.steps = 2;
    seq.channels = 2;
    seq.log_probs = {std::log(0.5), std::log(0.5), std::log(0.5), std::log(0.5)};
    EXPECT_EQ(ctc_sequence_log_prob(seq, {1, 1}, 0), kLogZero);
    // with 3 steps the a-blank-a path exists
    StepSequence seq3 = random_steps(3, 3, 2);
    EXPECT_GT(ctc_sequence_log_prob(seq3, {1, 1}, 0), kLogZero);
}

// One-cell page: P(a) = 0.6. The forced score of query "a" is 0.6.
TEST(ForcedScore, SingleStepSingleChar) {
    PageMaps page;
    page.page_id = "t";
    page.height_r = 1;
    page.width_r = 1;
    page.alphabet = Alphabet({0, U'a'}, 0);
    page.downscale = 1;
    page.scale = {1.0f};
    page.prob = {0.4f, 0.6f};
    validate_page_maps(page);
    const Query q = normalize_query("a", page.alphabet);
    SpotConfig cfg;
    cfg.end_overestimate = 0.0;
    const ForcedScore fs = ctc_forced_score(page, {0, 0, 1, 1}, q, false, cfg);
    EXPECT_NEAR(fs.score, 0.6, 1e-6);  // limited by float32 map storage
    EXPECT_EQ(fs.corrected, (Box{0, 0, 1, 1}));
}

PageMaps one_row_page(const std::string& text, int pad_right = 0) {
    // one grid row; column t deterministically emits text[t]
    PageMaps page;
    page.page_id = "row";
    page.alphabet = Alphabet::latin_lower();
    page.height_r = 1;
    page.width_r = static_cast<int>(text.size()) + pad_right;
    page.downscale = 1;
    const int C = page.alphabet.size();
    page.scale.assign(page.width_r, 1.0f);
    page.prob.assign(static_cast<size_t>(page.width_r) * C, 0.0f);
    for (int t = 0; t < page.width_r; ++t) {
        int ch = page.alphabet.blank_index;  // padding and spaces emit blank
        if (t < static_cast<int>(text.size()) && text[t] != ' ')
            ch = page.alphabet.index_of(static_cast<char32_t>(text[t]));
        page.prob[static_cast<size_t>(t) * C + ch] = 1.0f;
    }
    validate_page_maps(page);
    return page;
}

TEST(ForcedScore, CertainEmissionScoresOne) {
    const PageMaps page = one_row_page("ab");
    const Query q = normalize_query("ab", page.alphabet);
    SpotConfig cfg;
    cfg.end_overestimate = 0.0;
    const ForcedScore fs = ctc_forced_score(page, {0, 0, 1, 2}, q, false, cfg);
    EXPECT_NEAR(fs.score, 1.0, 1e-12);
}

TEST(ForcedScore, DegenerateBoxScoresZeroAndKeepsBox) {
    // query "aa" over 2 steps has no valid path
    const PageMaps page = one_row_page("aa");
    const Query q = normalize_query("aa", page.alphabet);
    SpotConfig cfg;
    cfg.end_overestimate = 0.0;
    const Box box{0, 0, 1, 2};
    const ForcedScore fs = ctc_forced_score(page, box, q, true, cfg);
    EXPECT_DOUBLE_EQ(fs.score, 0.0);
    EXPECT_EQ(fs.corrected, box);
}

TEST(ForcedScore, CorrectsOverextendedRightEdge) {
    // "the" followed by a gap and "m..."; the box spills into the next word
    const PageMaps page = one_row_page("the  mouse");
    const Query q = normalize_query("the", page.alphabet);
    SpotConfig cfg;
    cfg.end_overestimate = 0.3;
    const Box spilled{0, 0, 1, 6};  // covers "the  m"
    const ForcedScore one_way = ctc_forced_score(page, spilled, q, false, cfg);
    const int extended_right = 6 + static_cast<int>(std::lround(0.3 * 6));
    EXPECT_LT(one_way.corrected.col_end, extended_right);
    EXPECT_EQ(one_way.corrected.col_end, 3);  // exactly after "the"
    EXPECT_NEAR(one_way.score, 1.0, 1e-12);
}

TEST(ForcedScore, TwoWayCorrectsLeftEdge) {
    // box starts one column early (on the gap before the word)
    const PageMaps page = one_row_page("  and  ");
    const Query q = normalize_query("and", page.alphabet);
    SpotConfig cfg;
    const Box early{0, 1, 1, 6};
    const ForcedScore fs = ctc_forced_score(page, early, q, true, cfg);
    EXPECT_EQ(fs.corrected.col_start, 2);
    EXPECT_EQ(fs.corrected.col_end, 5);
    EXPECT_NEAR(fs.score, 1.0, 1e-12);
}

TEST(ForcedScore, TwoWayNeverWidensBeyondExtension) {
    Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        const PageMaps page = random_page(900 + trial, 6, 20, 5);
        const Query q = normalize_query(trial % 2 ? "ab" : "cad", page.alphabet);
        SpotConfig cfg;
        const Box box = random_box(rng, 6, 20);
        const ForcedScore fs = ctc_forced_score(page, box, q, true, cfg);
        if (fs.score == 0.0) continue;
        const int ext = static_cast<int>(std::lround(cfg.end_overestimate * box.width()));
        EXPECT_GE(fs.corrected.col_start, std::max(0, box.col_start - ext));
        EXPECT_LE(fs.corrected.col_end, std::min(20, box.col_end + ext));
        EXPECT_GE(fs.score, 0.0);
        EXPECT_LE(fs.score, 1.0);
        EXPECT_TRUE(fs.corrected.valid());
    }
}

TEST(ForcedScore, PermutedWordScoresLower) {
    const PageMaps page = one_row_page("dan");
    const Query q = normalize_query("and", page.alphabet);
    SpotConfig cfg;
    cfg.end_overestimate = 0.0;
    const ForcedScore wrong = ctc_forced_score(page, {0, 0, 1, 3}, q, false, cfg);
    const PageMaps right_page = one_row_page("and");
    const ForcedScore right = ctc_forced_score(right_page, {0, 0, 1, 3}, q, false, cfg);
    EXPECT_NEAR(right.score, 1.0, 1e-12);
    EXPECT_LT(wrong.score, 0.05);
}

}  // namespace
