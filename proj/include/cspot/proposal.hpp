#pragma once
// Candidate box generation. Height comes from the smallest square of unit
// scale mass at each cell (query independent, built once per page); width
// from a binary search to the query's total character count; two pruning
// heuristics cut the start set and reject cross-line boxes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cspot/integral.hpp"
#include "cspot/page_maps.hpp"
#include "cspot/spot_config.hpp"
#include "cspot/types.hpp"

namespace cspot {

// Smallest square side with scale mass >= 1, anchored top-left at each
// cell (clamped at the page border). 0 marks cells where even the capped
// maximum side fails.
struct HeightMap {
    static constexpr int kUnreachable = 0;

    int rows = 0;
    int cols = 0;
    std::vector<int> side;

    int at(int r, int c) const { return side[static_cast<size_t>(r) * cols + c]; }
};

namespace detail {

// Mass of the side x side square anchored at (r, c), clamped to the grid.
inline double square_mass(const IntegralImage& scale_int, int r, int c, int side) {
    const int r1 = std::min(r + side, scale_int.rows());
    const int c1 = std::min(c + side, scale_int.cols());
    return scale_int.rect_sum_unchecked(r, c, r1, c1);
}

inline int max_square_side(int rows, int cols) {
    return std::max(1, std::min(rows, cols) / 2);
}

}  // namespace detail

inline HeightMap build_height_map(const IntegralStack& stack) {
    HeightMap hmap;
    hmap.rows = stack.rows();
    hmap.cols = stack.cols();
    hmap.side.assign(static_cast<size_t>(hmap.rows) * hmap.cols, HeightMap::kUnreachable);
    const int max_side = detail::max_square_side(hmap.rows, hmap.cols);
    for (int r = 0; r < hmap.rows; ++r) {
        for (int c = 0; c < hmap.cols; ++c) {
            if (detail::square_mass(stack.scale_int, r, c, max_side) < 1.0) continue;
            int lo = 1, hi = max_side;
            while (lo < hi) {
                const int mid = lo + (hi - lo) / 2;
                if (detail::square_mass(stack.scale_int, r, c, mid) >= 1.0)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            hmap.side[static_cast<size_t>(r) * hmap.cols + c] = lo;
        }
    }
    return hmap;
}

// Cells whose dilated first-character probability clears p_thres. The
// max-pool stands in for "close to a point with non-trivial probability".
inline std::vector<std::pair<int, int>> candidate_starts(const PageMaps& page,
                                                         const Query& query,
                                                         const SpotConfig& cfg) {
    const int H = page.height_r, W = page.width_r;
    const int first = query.indices.front();
    const int radius = cfg.dilation / 2;

    std::vector<float> channel(static_cast<size_t>(H) * W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            channel[static_cast<size_t>(r) * W + c] = page.prob_at(r, c, first);

    if (radius > 0) {
        // Separable max-pool: rows then columns.
        std::vector<float> tmp(channel.size());
        for (int r = 0; r < H; ++r) {
            for (int c = 0; c < W; ++c) {
                float m = 0.0f;
                const int c0 = std::max(0, c - radius), c1 = std::min(W - 1, c + radius);
                for (int cc = c0; cc <= c1; ++cc)
                    m = std::max(m, channel[static_cast<size_t>(r) * W + cc]);
                tmp[static_cast<size_t>(r) * W + c] = m;
            }
        }
        for (int c = 0; c < W; ++c) {
            for (int r = 0; r < H; ++r) {
                float m = 0.0f;
                const int r0 = std::max(0, r - radius), r1 = std::min(H - 1, r + radius);
                for (int rr = r0; rr <= r1; ++rr)
                    m = std::max(m, tmp[static_cast<size_t>(rr) * W + c]);
                channel[static_cast<size_t>(r) * W + c] = m;
            }
        }
    }

    std::vector<std::pair<int, int>> starts;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (channel[static_cast<size_t>(r) * W + c] >= cfg.p_thres) starts.emplace_back(r, c);
    return starts;
}

// Given the height estimate at the start, binary-search the smallest width
// whose scale mass reaches the query count (minus tolerance). Rows are
// clamped at the page bottom.
inline std::optional<Box> estimate_box(const IntegralStack& stack, const HeightMap& hmap,
                                       std::pair<int, int> start, const Query& query,
                                       const SpotConfig& cfg) {
    const int r = start.first, c = start.second;
    if (r < 0 || c < 0 || r >= hmap.rows || c >= hmap.cols)
        throw Error(Errc::out_of_bounds, "start cell outside grid");
    const int h = hmap.at(r, c);
    if (h == HeightMap::kUnreachable) return std::nullopt;

    const int row_end = std::min(r + h, stack.rows());
    const int max_w = stack.cols() - c;
    const double target = query.total_count - cfg.count_tolerance;
    const auto mass = [&](int w) {
        return stack.scale_int.rect_sum_unchecked(r, c, row_end, c + w);
    };
    if (mass(max_w) < target) return std::nullopt;
    int lo = 1, hi = max_w;
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (mass(mid) >= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return Box{r, c, row_end, c + lo};
}

// Ratio of scale mass in the middle band of rows to the whole box; low
// ratios flag boxes whose count was collected across two text lines.
inline bool centering_filter(const IntegralStack& stack, const Box& box, const SpotConfig& cfg) {
    stack.scale_int.check_box(box);
    const double whole = stack.scale_int.rect_sum_unchecked(box.row_start, box.col_start,
                                                            box.row_end, box.col_end);
    if (whole <= 0.0) return false;
    const int quarter = box.height() / 4;  // middle 50% of rows
    const int band_r0 = box.row_start + quarter;
    const int band_r1 = box.row_end - quarter;
    const double band =
        stack.scale_int.rect_sum_unchecked(band_r0, box.col_start, band_r1, box.col_end);
    return band / whole >= cfg.r_thres;
}

inline std::vector<Box> propose(const PageMaps& page, const IntegralStack& stack,
                                const HeightMap& hmap, const Query& query,
                                const SpotConfig& cfg) {
    std::vector<Box> boxes;
    std::unordered_set<uint64_t> seen;
    for (const auto& start : candidate_starts(page, query, cfg)) {
        const auto box = estimate_box(stack, hmap, start, query, cfg);
        if (!box) continue;
        if (!centering_filter(stack, *box, cfg)) continue;
        const uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(box->row_start)) << 48) ^
                             (static_cast<uint64_t>(static_cast<uint32_t>(box->col_start)) << 32) ^
                             (static_cast<uint64_t>(static_cast<uint32_t>(box->row_end)) << 16) ^
                             static_cast<uint64_t>(static_cast<uint32_t>(box->col_end));
        if (seen.insert(key).second) boxes.push_back(*box);
    }
    return boxes;
}

}  // namespace cspot
