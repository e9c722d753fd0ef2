#pragma once
// Proposal ranking: counting cosine similarity, pyramidal descriptors
// (plain counts or PHOC-style clipped), CTC re-scoring and NMS, composed
// into the full per-page spotting pipeline.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cspot/ctc.hpp"
#include "cspot/integral.hpp"
#include "cspot/proposal.hpp"
#include "cspot/spot_config.hpp"
#include "cspot/types.hpp"

namespace cspot {

// Concatenated count histograms over 1..l uniform splits; length
// l(l+1)C/2 with the blank channel zeroed everywhere.
struct PyramidDescriptor {
    int levels = 0;
    int channels = 0;
    std::vector<double> values;

    static size_t expected_size(int levels, int channels) {
        return static_cast<size_t>(levels) * (levels + 1) / 2 * channels;
    }
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Plain first-pass similarity: cosine between the box count histogram and
// the query histogram, blank excluded. 0 for an empty box histogram.
inline double cosine_count_score(const IntegralStack& stack, const Box& box, const Query& query) {
    std::vector<double> hist = count_histogram(stack, box);
    hist[stack.blank_index] = 0.0;
    return cosine(hist, query.count_hist);
}

namespace detail {

inline double gaussian_cdf(double x, double mu, double sigma) {
    return 0.5 * (1.0 + std::erf((x - mu) / (sigma * std::sqrt(2.0))));
}

}  // namespace detail

// Query-side pyramid. Each character spreads unit mass over a level's
// uniform segments through a Gaussian at its center; the spread is
// renormalized per level so every character contributes exactly 1.
// Level 1 is always the plain count histogram.
inline PyramidDescriptor pyramid_descriptor_query(const Query& query, int levels,
                                                  double sigma_frac) {
    const int C = static_cast<int>(query.count_hist.size());
    const int n = query.length();
    PyramidDescriptor d;
    d.levels = levels;
    d.channels = C;
    d.values.assign(PyramidDescriptor::expected_size(levels, C), 0.0);

    size_t offset = 0;
    for (int k = 1; k <= levels; ++k) {
        if (k == 1) {
            std::copy(query.count_hist.begin(), query.count_hist.end(), d.values.begin());
            offset += C;
            continue;
        }
        const double sigma = sigma_frac / n;
        for (int i = 0; i < n; ++i) {
            const double mu = (i + 0.5) / n;
            std::vector<double> mass(k);
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                const double a = static_cast<double>(j) / k;
                const double b = static_cast<double>(j + 1) / k;
                mass[j] = sigma > 0.0
                              ? detail::gaussian_cdf(b, mu, sigma) - detail::gaussian_cdf(a, mu, sigma)
                              : (mu >= static_cast<double>(j) / k && mu < static_cast<double>(j + 1) / k
                                     ? 1.0
                                     : 0.0);
                total += mass[j];
            }
            for (int j = 0; j < k; ++j)
                d.values[offset + static_cast<size_t>(j) * C + query.indices[i]] +=
                    total > 0.0 ? mass[j] / total : 0.0;
        }
        offset += static_cast<size_t>(k) * C;
    }
    return d;
}

// Box-side pyramid: level k splits the box into k equal-width column
// slices (remainder columns go to the last slice) and stacks their count
// histograms. Blank channel zeroed.
inline PyramidDescriptor pyramid_descriptor_box(const IntegralStack& stack, const Box& box,
                                                int levels) {
    stack.scale_int.check_box(box);
    const int C = stack.channels();
    PyramidDescriptor d;
    d.levels = levels;
    d.channels = C;
    d.values.assign(PyramidDescriptor::expected_size(levels, C), 0.0);

    size_t offset = 0;
    for (int k = 1; k <= levels; ++k) {
        const int base = box.width() / k;
        for (int j = 0; j < k; ++j) {
            const int c0 = box.col_start + j * base;
            const int c1 = (j == k - 1) ? box.col_end : c0 + base;
            if (c1 > c0) {
                for (int ch = 0; ch < C; ++ch) {
                    if (ch == stack.blank_index) continue;
                    d.values[offset + static_cast<size_t>(j) * C + ch] =
                        stack.channel_int[ch].rect_sum_unchecked(box.row_start, c0, box.row_end,
                                                                 c1);
                }
            }
        }
        offset += static_cast<size_t>(k) * C;
    }
    return d;
}

// PHOC-style variant: bins clipped at 1.
inline PyramidDescriptor phoc_descriptor(PyramidDescriptor desc) {
    for (double& v : desc.values) v = std::min(v, 1.0);
    return desc;
}

inline double grid_iou(const Box& a, const Box& b) {
    const long long inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

inline bool detection_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.row_start != b.box.row_start) return a.box.row_start < b.box.row_start;
    if (a.box.col_start != b.box.col_start) return a.box.col_start < b.box.col_start;
    if (a.box.row_end != b.box.row_end) return a.box.row_end < b.box.row_end;
    return a.box.col_end < b.box.col_end;
}

}  // namespace detail

// Greedy NMS, descending score, coordinate tie-break for determinism.
// Every kept pair has IoU <= iou_thres.
inline std::vector<Detection> nms(std::vector<Detection> dets, double iou_thres) {
    std::sort(dets.begin(), dets.end(), detail::detection_order);
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (grid_iou(d.box, k.box) > iou_thres) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

// Full per-page pipeline: propose, descriptor scoring, NMS, top-K,
// optional CTC re-scoring with boundary correction, final NMS.
inline std::vector<Detection> spot(const PageMaps& page, const IntegralStack& stack,
                                   const HeightMap& hmap, const Query& query,
                                   const SpotConfig& cfg) {
    const std::vector<Box> boxes = propose(page, stack, hmap, query, cfg);
    if (boxes.empty()) return {};

    PyramidDescriptor qdesc = pyramid_descriptor_query(query, cfg.levels, cfg.sigma_frac);
    if (cfg.use_phoc) qdesc = phoc_descriptor(std::move(qdesc));
    const Stage first_stage = cfg.levels == 1 ? Stage::counting : Stage::pyramid;

    std::vector<Detection> dets;
    dets.reserve(boxes.size());
    for (const Box& box : boxes) {
        PyramidDescriptor bdesc = pyramid_descriptor_box(stack, box, cfg.levels);
        if (cfg.use_phoc) bdesc = phoc_descriptor(std::move(bdesc));
        dets.push_back({box, cosine(qdesc.values, bdesc.values), page.page_id, first_stage});
    }

    dets = nms(std::move(dets), cfg.nms_iou);
    if (static_cast<int>(dets.size()) > cfg.top_k) dets.resize(cfg.top_k);

    if (cfg.ctc != CtcMode::off) {
        const bool two_way = cfg.ctc == CtcMode::two_way;
        for (Detection& d : dets) {
            const ForcedScore fs = ctc_forced_score(page, d.box, query, two_way, cfg);
            d.box = fs.corrected;
            d.score = fs.score;
            d.stage = two_way ? Stage::ctc_two_way : Stage::ctc_one_way;
        }
        dets = nms(std::move(dets), cfg.nms_iou);
    }
    return dets;
}

}  // namespace cspot
