#pragma once
// Core value types shared across the spotting pipeline: grid boxes,
// detections and the error taxonomy used by loaders and the CLI.

#include <stdexcept>
#include <string>

namespace cspot {

// Half-open rectangle [row_start, row_end) x [col_start, col_end).
// Used both for feature-map grid cells and for pixel coordinates;
// pixel boxes are grid boxes with every coordinate multiplied by the
// page downscale factor.
struct Box {
    int row_start = 0;
    int col_start = 0;
    int row_end = 0;
    int col_end = 0;

    int height() const { return row_end - row_start; }
    int width() const { return col_end - col_start; }
    long long area() const {
        return static_cast<long long>(height()) * width();
    }
    bool valid() const { return row_start < row_end && col_start < col_end; }

    Box scaled(int factor) const {
        return {row_start * factor, col_start * factor,
                row_end * factor, col_end * factor};
    }

    friend bool operator==(const Box&, const Box&) = default;
};

inline long long intersection_area(const Box& a, const Box& b) {
    const int r0 = a.row_start > b.row_start ? a.row_start : b.row_start;
    const int c0 = a.col_start > b.col_start ? a.col_start : b.col_start;
    const int r1 = a.row_end < b.row_end ? a.row_end : b.row_end;
    const int c1 = a.col_end < b.col_end ? a.col_end : b.col_end;
    if (r1 <= r0 || c1 <= c0) return 0;
    return static_cast<long long>(r1 - r0) * (c1 - c0);
}

// Which stage of the pipeline produced a detection's score.
enum class Stage { counting, pyramid, ctc_one_way, ctc_two_way };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::counting: return "counting";
        case Stage::pyramid: return "pyramid";
        case Stage::ctc_one_way: return "ctc_one_way";
        case Stage::ctc_two_way: return "ctc_two_way";
    }
    return "unknown";
}

struct Detection {
    Box box;  // grid cells
    double score = 0.0;
    std::string page_id;
    Stage stage = Stage::counting;
};

enum class Errc {
    bad_magic,
    truncated_payload,
    invariant_violation,
    unknown_symbol,
    empty_after_normalization,
    out_of_bounds,
    layout_overflow,
    grid_too_large,
    invalid_spec,
    io_error,
    mismatched_page_ids,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::bad_magic: return "bad-magic";
        case Errc::truncated_payload: return "truncated-payload";
        case Errc::invariant_violation: return "invariant-violation";
        case Errc::unknown_symbol: return "unknown-symbol";
        case Errc::empty_after_normalization: return "empty-after-normalization";
        case Errc::out_of_bounds: return "out-of-bounds";
        case Errc::layout_overflow: return "layout-overflow";
        case Errc::grid_too_large: return "grid-too-large";
        case Errc::invalid_spec: return "invalid-spec";
        case Errc::io_error: return "io-error";
        case Errc::mismatched_page_ids: return "mismatched-page-ids";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace cspot
