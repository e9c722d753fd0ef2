#pragma once
// CTC forced alignment used as a re-scorer. The forward recursion runs in
// log space over blank-interleaved query states; the best full-query
// completion over all steps both scores the box and corrects its
// horizontal boundaries (one-way: right edge; two-way: both edges via a
// reversed pass).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cspot/page_maps.hpp"
#include "cspot/spot_config.hpp"
#include "cspot/types.hpp"

namespace cspot {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Per-step log distributions over the alphabet, T x C row-major.
struct StepSequence {
    int steps = 0;
    int channels = 0;
    std::vector<double> log_probs;

    double at(int t, int c) const {
        return log_probs[static_cast<size_t>(t) * channels + c];
    }
};

// Forward table over the blank-interleaved state chain. completion(t) is
// the log probability that the whole query has been consumed by step t
// (path ends in the last character or the trailing blank).
struct CtcScoreMatrix {
    int steps = 0;
    int states = 0;  // 2*|query| + 1
    std::vector<double> log_alpha;

    double alpha(int t, int s) const {
        return log_alpha[static_cast<size_t>(t) * states + s];
    }
    double completion(int t) const {
        double v = alpha(t, states - 1);
        if (states >= 2) v = log_sum_exp(v, alpha(t, states - 2));
        return v;
    }
};

inline CtcScoreMatrix ctc_forward(const StepSequence& seq, const std::vector<int>& query,
                                  int blank) {
    const int T = seq.steps;
    const int L = static_cast<int>(query.size());
    const int S = 2 * L + 1;
    CtcScoreMatrix m;
    m.steps = T;
    m.states = S;
    m.log_alpha.assign(static_cast<size_t>(T) * S, kLogZero);
    if (T == 0 || L == 0) return m;

    const auto label = [&](int s) { return (s % 2 == 0) ? blank : query[(s - 1) / 2]; };

    double* a0 = m.log_alpha.data();
    a0[0] = seq.at(0, blank);
    a0[1] = seq.at(0, query[0]);
    for (int t = 1; t < T; ++t) {
        const double* prev = m.log_alpha.data() + static_cast<size_t>(t - 1) * S;
        double* cur = m.log_alpha.data() + static_cast<size_t>(t) * S;
        for (int s = 0; s < S; ++s) {
            double acc = prev[s];
            if (s >= 1) acc = log_sum_exp(acc, prev[s - 1]);
            // Skip transition over a blank, forbidden between equal labels.
            if (s >= 2 && s % 2 == 1 && query[(s - 1) / 2] != query[(s - 3) / 2])
                acc = log_sum_exp(acc, prev[s - 2]);
            if (acc == kLogZero) continue;
            cur[s] = acc + seq.at(t, label(s));
        }
    }
    return m;
}

// Log probability that the full step sequence collapses to the query:
// the standard CTC sequence probability.
inline double ctc_sequence_log_prob(const StepSequence& seq, const std::vector<int>& query,
                                    int blank) {
    if (seq.steps == 0) return kLogZero;
    return ctc_forward(seq, query, blank).completion(seq.steps - 1);
}

namespace detail {

// Steps for columns [col_begin, col_end) of a page, read at the pooled
// center row of the box: per-channel vertical max over a 3-row kernel,
// renormalized to a distribution before the log.
inline StepSequence extract_steps(const PageMaps& page, int center_row, int col_begin,
                                  int col_end) {
    const int C = page.channels();
    StepSequence seq;
    seq.channels = C;
    seq.steps = std::max(0, col_end - col_begin);
    seq.log_probs.assign(static_cast<size_t>(seq.steps) * C, kLogZero);
    const int r0 = std::max(0, center_row - 1);
    const int r1 = std::min(page.height_r - 1, center_row + 1);
    std::vector<double> pooled(C);
    for (int t = 0; t < seq.steps; ++t) {
        const int col = col_begin + t;
        double sum = 0.0;
        for (int k = 0; k < C; ++k) {
            float m = 0.0f;
            for (int r = r0; r <= r1; ++r) m = std::max(m, page.prob_at(r, col, k));
            pooled[k] = m;
            sum += m;
        }
        for (int k = 0; k < C; ++k)
            seq.log_probs[static_cast<size_t>(t) * C + k] =
                pooled[k] > 0.0 ? std::log(pooled[k] / sum) : kLogZero;
    }
    return seq;
}

inline StepSequence reverse_steps(const StepSequence& seq) {
    StepSequence rev;
    rev.steps = seq.steps;
    rev.channels = seq.channels;
    rev.log_probs.resize(seq.log_probs.size());
    for (int t = 0; t < seq.steps; ++t)
        std::copy_n(seq.log_probs.begin() + static_cast<size_t>(seq.steps - 1 - t) * seq.channels,
                    seq.channels, rev.log_probs.begin() + static_cast<size_t>(t) * rev.channels);
    return rev;
}

// Best completion over all steps; earliest step on ties so corrected
// boxes stay tight.
inline std::pair<double, int> best_completion(const CtcScoreMatrix& m) {
    double best = kLogZero;
    int best_t = -1;
    for (int t = 0; t < m.steps; ++t) {
        const double v = m.completion(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    return {best, best_t};
}

}  // namespace detail

struct ForcedScore {
    double score = 0.0;  // exp(log_prob / |query|), per-character geometric mean
    Box corrected;
};

// Score a detected box by forcing the query through the pooled probability
// sequence. The right edge is over-extended before the scan; its corrected
// position is the best completion step. Two-way mode repeats the scan on
// the reversed sequence with the reversed query to place the left edge.
inline ForcedScore ctc_forced_score(const PageMaps& page, const Box& box, const Query& query,
                                    bool two_way, const SpotConfig& cfg) {
    if (!box.valid() || box.row_start < 0 || box.col_start < 0 || box.row_end > page.height_r ||
        box.col_end > page.width_r)
        throw Error(Errc::out_of_bounds, "ctc_forced_score box outside page");
    if (query.indices.empty()) throw Error(Errc::invalid_spec, "empty query");

    const int blank = page.alphabet.blank_index;
    const int L = query.length();
    const int center = box.row_start + (box.height() - 1) / 2;
    const int ext = static_cast<int>(std::lround(cfg.end_overestimate * box.width()));
    const int right_limit = std::min(page.width_r, box.col_end + ext);

    const StepSequence fwd_steps =
        detail::extract_steps(page, center, box.col_start, right_limit);
    const CtcScoreMatrix fwd = ctc_forward(fwd_steps, query.indices, blank);
    const auto [best_lp, best_t] = detail::best_completion(fwd);
    if (best_t < 0) return {0.0, box};  // degenerate: no alignment fits

    const int corrected_right = box.col_start + best_t + 1;
    if (!two_way)
        return {std::exp(best_lp / L),
                Box{box.row_start, box.col_start, box.row_end, corrected_right}};

    // Reversed pass: over-extend the (inverted) end point, i.e. the left
    // edge, then scan right-to-left from the corrected right edge.
    const int left_limit = std::max(0, box.col_start - ext);
    const StepSequence rev_steps = detail::reverse_steps(
        detail::extract_steps(page, center, left_limit, corrected_right));
    std::vector<int> rev_query(query.indices.rbegin(), query.indices.rend());
    const CtcScoreMatrix rev = ctc_forward(rev_steps, rev_query, blank);
    const auto [best_lp2, best_t2] = detail::best_completion(rev);
    if (best_t2 < 0) return {0.0, box};

    const int corrected_left = corrected_right - 1 - best_t2;
    return {std::exp(best_lp2 / L),
            Box{box.row_start, corrected_left, box.row_end, corrected_right}};
}

}  // namespace cspot
