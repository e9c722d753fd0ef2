#pragma once
// Overlap metrics and retrieval evaluation. Besides standard IoU this
// implements x-IoU (column-interval IoU gated by a 0.1 IoU prerequisite)
// and IoW, which divides the gt intersection by the gt area plus every
// erroneous overlap with other words, so enlarged but clean boxes are not
// penalized. All evaluation runs in pixel space.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cspot/types.hpp"

namespace cspot {

struct GtWord {
    std::string page_id;
    std::string text;  // normalized
    Box box;           // pixel space
};

enum class OverlapMetric { iou, x_iou, iow };

inline const char* overlap_metric_name(OverlapMetric m) {
    switch (m) {
        case OverlapMetric::iou: return "iou";
        case OverlapMetric::x_iou: return "x_iou";
        case OverlapMetric::iow: return "iow";
    }
    return "iou";
}

inline OverlapMetric parse_overlap_metric(const std::string& s) {
    if (s == "iou") return OverlapMetric::iou;
    if (s == "x_iou") return OverlapMetric::x_iou;
    if (s == "iow") return OverlapMetric::iow;
    throw Error(Errc::invalid_spec, "unknown overlap metric \"" + s + "\"");
}

inline double iou(const Box& a, const Box& b) {
    const long long inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

// 1-D IoU over column intervals, gated on IoU > 0.1 so the detection has
// to sit on the right line before the x-axis comparison applies.
inline double x_iou(const Box& det, const Box& gt) {
    if (iou(det, gt) <= 0.1) return 0.0;
    const int lo = std::max(det.col_start, gt.col_start);
    const int hi = std::min(det.col_end, gt.col_end);
    if (hi <= lo) return 0.0;
    const int uni = std::max(det.col_end, gt.col_end) - std::min(det.col_start, gt.col_start);
    return static_cast<double>(hi - lo) / static_cast<double>(uni);
}

// |det n gt| / (|gt| + sum of det's intersections with the other words).
// others must exclude gt itself; every other word counts, including other
// instances of the same text.
inline double iow(const Box& det, const GtWord& gt, const std::vector<const GtWord*>& others) {
    const long long inter = intersection_area(det, gt.box);
    double denom = static_cast<double>(gt.box.area());
    for (const GtWord* o : others) denom += static_cast<double>(intersection_area(det, o->box));
    if (denom <= 0.0) return 0.0;
    return static_cast<double>(inter) / denom;
}

// Groups all ground-truth words per page so iow can see its neighbors.
struct GtIndex {
    std::map<std::string, std::vector<GtWord>> by_page;

    explicit GtIndex(const std::vector<GtWord>& words) {
        for (const GtWord& w : words) by_page[w.page_id].push_back(w);
    }

    const std::vector<GtWord>* page(const std::string& id) const {
        auto it = by_page.find(id);
        return it == by_page.end() ? nullptr : &it->second;
    }
};

namespace detail {

// gt must point into *page_words for the self-exclusion to hold.
inline double overlap_value(OverlapMetric metric, const Box& det_px, const GtWord* gt,
                            const std::vector<GtWord>* page_words) {
    switch (metric) {
        case OverlapMetric::iou:
            return iou(det_px, gt->box);
        case OverlapMetric::x_iou:
            return x_iou(det_px, gt->box);
        case OverlapMetric::iow: {
            std::vector<const GtWord*> others;
            if (page_words) {
                others.reserve(page_words->size());
                for (const GtWord& w : *page_words)
                    if (&w != gt) others.push_back(&w);
            }
            return iow(det_px, *gt, others);
        }
    }
    return 0.0;
}

}  // namespace detail

// Detection-style AP with greedy one-to-one matching in rank order: each
// detection claims the best-overlapping unclaimed gt instance of the query
// on its page; it is relevant when that overlap clears the threshold.
// AP = sum of precision at relevant ranks / number of gt instances.
// Detections must already be in pixel space and sorted by descending
// score; query_gts must point into the GtIndex storage.
inline double average_precision(const std::vector<Detection>& ranked,
                                const std::vector<const GtWord*>& query_gts,
                                OverlapMetric metric, double threshold, const GtIndex& index) {
    if (query_gts.empty()) return 0.0;
    std::vector<bool> claimed(query_gts.size(), false);
    double ap_sum = 0.0;
    int hits = 0;
    for (size_t rank = 0; rank < ranked.size(); ++rank) {
        const Detection& det = ranked[rank];
        const std::vector<GtWord>* page_words = index.page(det.page_id);
        int best = -1;
        double best_overlap = 0.0;
        for (size_t g = 0; g < query_gts.size(); ++g) {
            if (claimed[g] || query_gts[g]->page_id != det.page_id) continue;
            const double ov =
                detail::overlap_value(metric, det.box, query_gts[g], page_words);
            if (ov > best_overlap) {
                best_overlap = ov;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_overlap >= threshold) {
            claimed[best] = true;
            ++hits;
            ap_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap_sum / static_cast<double>(query_gts.size());
}

struct EvalReport {
    double map_value = 0.0;
    std::vector<std::pair<std::string, double>> per_query_ap;  // query -> AP
    OverlapMetric metric = OverlapMetric::iou;
    double threshold = 0.0;
    std::vector<std::string> skipped_queries;  // no gt instances
};

// MAP over all queries that have at least one gt instance. Detections per
// query must already be rank-merged across pages (descending score).
inline EvalReport evaluate(
    const std::vector<std::pair<std::string, std::vector<Detection>>>& dets_per_query,
    const std::vector<GtWord>& all_gts, OverlapMetric metric, double threshold) {
    GtIndex index(all_gts);
    std::unordered_map<std::string, std::vector<const GtWord*>> gts_by_text;
    for (const auto& [page_id, words] : index.by_page)
        for (const GtWord& w : words) gts_by_text[w.text].push_back(&w);

    EvalReport report;
    report.metric = metric;
    report.threshold = threshold;
    double sum = 0.0;
    for (const auto& [query, dets] : dets_per_query) {
        auto it = gts_by_text.find(query);
        if (it == gts_by_text.end()) {
            report.skipped_queries.push_back(query);
            continue;
        }
        const double ap = average_precision(dets, it->second, metric, threshold, index);
        report.per_query_ap.emplace_back(query, ap);
        sum += ap;
    }
    if (!report.per_query_ap.empty())
        report.map_value = sum / static_cast<double>(report.per_query_ap.size());
    return report;
}

}  // namespace cspot
