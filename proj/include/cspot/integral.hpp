#pragma once
// Summed-area tables over the scale map and the scaled probability
// channels. Every counting operation in the pipeline reduces to O(1)
// rect_sum calls against these tables.

#include <string>
#include <vector>

#include "cspot/page_maps.hpp"
#include "cspot/types.hpp"

namespace cspot {

// Cumulative sums with a sentinel zero row and column, accumulated in
// double regardless of source precision so page-sized sums stay monotone.
class IntegralImage {
public:
    IntegralImage() = default;

    template <typename SourceFn>
    static IntegralImage build(int rows, int cols, SourceFn src) {
        IntegralImage img;
        img.rows_ = rows;
        img.cols_ = cols;
        img.data_.assign(static_cast<size_t>(rows + 1) * (cols + 1), 0.0);
        const int stride = cols + 1;
        for (int r = 0; r < rows; ++r) {
            double row_sum = 0.0;
            const double* above = img.data_.data() + static_cast<size_t>(r) * stride;
            double* cur = img.data_.data() + static_cast<size_t>(r + 1) * stride;
            for (int c = 0; c < cols; ++c) {
                row_sum += static_cast<double>(src(r, c));
                cur[c + 1] = above[c + 1] + row_sum;
            }
        }
        return img;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    // Inclusion-exclusion over the sentinel-padded table; constant time.
    double rect_sum(const Box& box) const {
        check_box(box);
        return rect_sum_unchecked(box.row_start, box.col_start, box.row_end, box.col_end);
    }

    // Hot-path variant for callers that already guarantee bounds
    // (binary searches issue millions of these).
    double rect_sum_unchecked(int r0, int c0, int r1, int c1) const {
        const int stride = cols_ + 1;
        const double* top = data_.data() + static_cast<size_t>(r0) * stride;
        const double* bot = data_.data() + static_cast<size_t>(r1) * stride;
        return bot[c1] - top[c1] - bot[c0] + top[c0];
    }

    double at(int r, int c) const { return data_[static_cast<size_t>(r) * (cols_ + 1) + c]; }

    void check_box(const Box& box) const {
        if (!box.valid() || box.row_start < 0 || box.col_start < 0 || box.row_end > rows_ ||
            box.col_end > cols_)
            throw Error(Errc::out_of_bounds,
                        "box [" + std::to_string(box.row_start) + "," +
                            std::to_string(box.col_start) + "," + std::to_string(box.row_end) +
                            "," + std::to_string(box.col_end) + ") on " +
                            std::to_string(rows_) + "x" + std::to_string(cols_) + " grid");
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double rect_sum(const IntegralImage& img, const Box& box) { return img.rect_sum(box); }

// Integral images of S and of every channel of F_s for one page.
struct IntegralStack {
    std::string page_id;
    IntegralImage scale_int;
    std::vector<IntegralImage> channel_int;  // one per alphabet channel
    int blank_index = 0;

    int rows() const { return scale_int.rows(); }
    int cols() const { return scale_int.cols(); }
    int channels() const { return static_cast<int>(channel_int.size()); }
};

inline IntegralStack build_integrals(const PageMaps& page) {
    IntegralStack stack;
    stack.page_id = page.page_id;
    stack.blank_index = page.alphabet.blank_index;
    stack.scale_int = IntegralImage::build(
        page.height_r, page.width_r,
        [&](int r, int c) { return static_cast<double>(page.scale_at(r, c)); });
    const int C = page.channels();
    stack.channel_int.resize(C);
    for (int k = 0; k < C; ++k) {
        stack.channel_int[k] = IntegralImage::build(
            page.height_r, page.width_r, [&](int r, int c) {
                return static_cast<double>(page.prob_at(r, c, k)) *
                       static_cast<double>(page.scale_at(r, c));
            });
    }
    return stack;
}

// Character occurrences y_c over a box: channel c holds the F_s box sum.
// The blank channel is included here; downstream consumers zero it.
inline std::vector<double> count_histogram(const IntegralStack& stack, const Box& box) {
    stack.scale_int.check_box(box);
    std::vector<double> hist(stack.channels());
    for (int k = 0; k < stack.channels(); ++k)
        hist[k] = stack.channel_int[k].rect_sum_unchecked(box.row_start, box.col_start,
                                                          box.row_end, box.col_end);
    return hist;
}

}  // namespace cspot
