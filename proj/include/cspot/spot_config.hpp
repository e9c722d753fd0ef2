#pragma once
// All spotting tunables in one place. Defaults follow the configuration
// that performed best in validation: p_thres 0.05, r_thres 0.5, one
// pyramid level with plain counting, two-way CTC re-scoring.

#include <string>

#include "cspot/types.hpp"

namespace cspot {

enum class CtcMode { off, one_way, two_way };

inline const char* ctc_mode_name(CtcMode m) {
    switch (m) {
        case CtcMode::off: return "off";
        case CtcMode::one_way: return "one_way";
        case CtcMode::two_way: return "two_way";
    }
    return "off";
}

inline CtcMode parse_ctc_mode(const std::string& s) {
    if (s == "off") return CtcMode::off;
    if (s == "one_way") return CtcMode::one_way;
    if (s == "two_way") return CtcMode::two_way;
    throw Error(Errc::invalid_spec, "unknown ctc mode \"" + s + "\"");
}

struct SpotConfig {
    double p_thres = 0.05;         // first-character probability threshold
    double r_thres = 0.5;          // centered-mass ratio threshold
    int dilation = 3;              // max-pool kernel for start pruning, odd
    int levels = 1;                // pyramid levels l
    double nms_iou = 0.2;          // suppression threshold between stages
    int top_k = 30;                // candidates kept per page for re-scoring
    double end_overestimate = 0.3; // width growth before CTC boundary search
    double count_tolerance = 0.15; // slack on the width-search count target
    double sigma_frac = 0.3;       // Gaussian std in character widths, query pyramid
    CtcMode ctc = CtcMode::two_way;
    bool use_phoc = false;         // clip descriptor bins at 1

    void validate() const {
        if (!(p_thres > 0.0 && p_thres < 1.0))
            throw Error(Errc::invalid_spec, "p_thres must be in (0,1)");
        if (!(r_thres > 0.0 && r_thres < 1.0))
            throw Error(Errc::invalid_spec, "r_thres must be in (0,1)");
        if (dilation < 1 || dilation % 2 == 0)
            throw Error(Errc::invalid_spec, "dilation must be odd and >= 1");
        if (levels < 1) throw Error(Errc::invalid_spec, "levels must be >= 1");
        if (top_k < 1) throw Error(Errc::invalid_spec, "top_k must be >= 1");
        if (nms_iou < 0.0 || nms_iou > 1.0)
            throw Error(Errc::invalid_spec, "nms_iou must be in [0,1]");
        if (end_overestimate < 0.0)
            throw Error(Errc::invalid_spec, "end_overestimate must be >= 0");
        if (count_tolerance < 0.0)
            throw Error(Errc::invalid_spec, "count_tolerance must be >= 0");
        if (sigma_frac <= 0.0)
            throw Error(Errc::invalid_spec, "sigma_frac must be > 0");
    }
};

}  // namespace cspot
