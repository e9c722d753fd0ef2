#pragma once
// Deterministic synthetic page generator. Words are laid out on
// non-overlapping line bands; every glyph is a uniform block depositing
// total scale mass 1.0 inside its ground-truth box, which is exactly the
// property the counting pipeline consumes. Also hosts the brute-force
// sliding-box oracle the fast proposal stage is validated against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cspot/alphabet.hpp"
#include "cspot/metrics.hpp"
#include "cspot/page_maps.hpp"
#include "cspot/parallel.hpp"
#include "cspot/types.hpp"

namespace cspot {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// mt19937_64 output is specified by the standard; the helpers below avoid
// std distributions, whose sequences differ across library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(engine_() % static_cast<uint64_t>(hi - lo + 1));
    }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[engine_() % v.size()];
    }

private:
    std::mt19937_64 engine_;
};

struct IntRange {
    int lo = 0;
    int hi = 0;
    bool contains(int v) const { return v >= lo && v <= hi; }
};

struct SynthSpec {
    uint64_t seed = 1;
    int pages = 1;
    int page_height_cells = 48;
    int page_width_cells = 96;
    IntRange lines_per_page{3, 5};
    IntRange words_per_line{2, 4};
    std::vector<std::string> lexicon;
    IntRange char_width_cells{3, 3};
    IntRange char_height_cells{3, 3};
    double noise = 0.0;  // probability mass leaked off the true channel
    IntRange spacing{2, 4};
    int downscale = 8;
    double distractor_fraction = 0.0;  // pages seeded with permutation pairs
    std::vector<std::pair<std::string, std::string>> distractor_pairs = {{"and", "dan"}};

    void validate() const {
        if (pages < 1) throw Error(Errc::invalid_spec, "pages must be >= 1");
        if (page_height_cells < 3 || page_width_cells < 3)
            throw Error(Errc::invalid_spec, "page grid too small");
        if (lexicon.empty()) throw Error(Errc::invalid_spec, "lexicon is empty");
        for (const IntRange* r :
             {&lines_per_page, &words_per_line, &char_width_cells, &char_height_cells, &spacing})
            if (r->lo < 0 || r->lo > r->hi)
                throw Error(Errc::invalid_spec, "range with lo > hi or negative bounds");
        if (lines_per_page.lo < 1 || words_per_line.lo < 1 || char_width_cells.lo < 1 ||
            char_height_cells.lo < 1 || spacing.lo < 1)
            throw Error(Errc::invalid_spec, "layout ranges must start at 1");
        if (noise < 0.0 || noise >= 1.0)
            throw Error(Errc::invalid_spec, "noise must be in [0,1)");
        if (downscale < 1) throw Error(Errc::invalid_spec, "downscale must be >= 1");
        if (distractor_fraction < 0.0 || distractor_fraction > 1.0)
            throw Error(Errc::invalid_spec, "distractor_fraction must be in [0,1]");
    }
};

struct SynthPage {
    PageMaps maps;
    std::vector<GtWord> gts;
};

namespace detail {

// blank (code point 0, channel 0) + sorted unique characters of the
// lexicon and distractor pairs.
inline Alphabet derive_alphabet(const SynthSpec& spec) {
    std::set<char32_t> chars;
    for (const std::string& w : spec.lexicon)
        for (char32_t cp : utf8::decode(w)) chars.insert(cp);
    for (const auto& [a, b] : spec.distractor_pairs) {
        for (char32_t cp : utf8::decode(a)) chars.insert(cp);
        for (char32_t cp : utf8::decode(b)) chars.insert(cp);
    }
    std::vector<char32_t> symbols;
    symbols.push_back(0);
    symbols.insert(symbols.end(), chars.begin(), chars.end());
    return Alphabet(std::move(symbols), 0);
}

struct GlyphWriter {
    PageMaps& page;
    double noise;

    void background(int r, int c) {
        const int C = page.channels();
        float* cell = page.prob.data() + (static_cast<size_t>(r) * page.width_r + c) * C;
        const float spread = C > 1 ? static_cast<float>(noise / (C - 1)) : 0.0f;
        for (int k = 0; k < C; ++k) cell[k] = spread;
        cell[page.alphabet.blank_index] = static_cast<float>(1.0 - noise);
    }

    void glyph(int r, int c, int channel, float scale_value) {
        const int C = page.channels();
        float* cell = page.prob.data() + (static_cast<size_t>(r) * page.width_r + c) * C;
        const float spread = C > 2 ? static_cast<float>(noise / (C - 2)) : 0.0f;
        for (int k = 0; k < C; ++k) cell[k] = spread;
        cell[page.alphabet.blank_index] = 0.0f;
        cell[channel] = static_cast<float>(1.0 - noise);
        page.scale[static_cast<size_t>(r) * page.width_r + c] = scale_value;
    }
};

inline SynthPage generate_page(const SynthSpec& spec, const Alphabet& alphabet, int page_index,
                               bool with_distractors) {
    Rng rng(splitmix64(spec.seed + 0x9E37u) ^ splitmix64(static_cast<uint64_t>(page_index)));

    SynthPage out;
    PageMaps& page = out.maps;
    char id[32];
    std::snprintf(id, sizeof id, "page_%04d", page_index);
    page.page_id = id;
    page.height_r = spec.page_height_cells;
    page.width_r = spec.page_width_cells;
    page.alphabet = alphabet;
    page.downscale = spec.downscale;
    page.prob.assign(static_cast<size_t>(page.height_r) * page.width_r * alphabet.size(), 0.0f);
    page.scale.assign(static_cast<size_t>(page.height_r) * page.width_r, 0.0f);

    GlyphWriter writer{page, spec.noise};
    for (int r = 0; r < page.height_r; ++r)
        for (int c = 0; c < page.width_r; ++c) writer.background(r, c);

    // Forced words are placed before lexicon samples so distractor pairs
    // always land on the page.
    std::deque<std::string> forced;
    if (with_distractors && !spec.distractor_pairs.empty()) {
        const auto& pair = spec.distractor_pairs[rng.range(
            0, static_cast<int>(spec.distractor_pairs.size()) - 1)];
        forced.push_back(pair.first);
        forced.push_back(pair.second);
    }

    const int margin = 1;
    const int n_lines = rng.range(spec.lines_per_page.lo, spec.lines_per_page.hi);
    int row = margin;
    int lines_placed = 0;
    for (int line = 0; line < n_lines; ++line) {
        const int h = rng.range(spec.char_height_cells.lo, spec.char_height_cells.hi);
        const int w_c = rng.range(spec.char_width_cells.lo, spec.char_width_cells.hi);
        if (row + h > page.height_r - margin) break;  // page full, place fewer lines

        const int n_words = rng.range(spec.words_per_line.lo, spec.words_per_line.hi);
        int col = margin;
        for (int word_i = 0; word_i < n_words; ++word_i) {
            std::string word;
            bool was_forced = false;
            if (!forced.empty()) {
                word = forced.front();
                was_forced = true;
            } else {
                word = rng.pick(spec.lexicon);
            }
            const std::u32string chars = utf8::decode(word);
            int repeats = 0;
            for (size_t p = 1; p < chars.size(); ++p)
                if (chars[p] == chars[p - 1]) ++repeats;
            const int word_width = static_cast<int>(chars.size()) * w_c + repeats;
            if (col + word_width > page.width_r - margin) {
                if (col == margin)
                    throw Error(Errc::layout_overflow,
                                "word \"" + word + "\" wider than page " +
                                    std::to_string(page_index));
                break;  // line full
            }
            if (was_forced) forced.pop_front();

            const float cell_scale = 1.0f / static_cast<float>(w_c * h);
            int glyph_col = col;
            for (size_t p = 0; p < chars.size(); ++p) {
                // one empty column between repeated letters; the blank
                // probability it carries is what lets a CTC path traverse
                // the double letter
                if (p > 0 && chars[p] == chars[p - 1]) ++glyph_col;
                const int channel = alphabet.index_of(chars[p]);
                if (channel < 0)
                    throw Error(Errc::unknown_symbol,
                                "lexicon word \"" + word + "\" outside alphabet");
                for (int r = row; r < row + h; ++r)
                    for (int c = glyph_col; c < glyph_col + w_c; ++c)
                        writer.glyph(r, c, channel, cell_scale);
                glyph_col += w_c;
            }
            GtWord gt;
            gt.page_id = page.page_id;
            gt.text = word;
            gt.box = Box{row, col, row + h, glyph_col}.scaled(spec.downscale);
            out.gts.push_back(gt);
            col = glyph_col + rng.range(spec.spacing.lo, spec.spacing.hi);
        }
        ++lines_placed;
        row += h + rng.range(spec.spacing.lo, spec.spacing.hi);
    }
    if (lines_placed == 0)
        throw Error(Errc::layout_overflow,
                    "no line fits page " + std::to_string(page_index));
    if (!forced.empty())
        throw Error(Errc::layout_overflow,
                    "distractor pair does not fit page " + std::to_string(page_index));

    validate_page_maps(page);
    return out;
}

}  // namespace detail

// Pages carry independent derived seeds, so parallel generation yields
// identical output to serial generation.
inline std::vector<SynthPage> generate(const SynthSpec& spec, int workers = 1) {
    spec.validate();
    const Alphabet alphabet = detail::derive_alphabet(spec);
    if (spec.noise > 0.0 && alphabet.size() <= 2)
        throw Error(Errc::invalid_spec,
                    "noise > 0 needs at least two non-blank channels to spread over");
    const int n_distractor =
        static_cast<int>(std::lround(spec.distractor_fraction * spec.pages));
    std::vector<SynthPage> pages(spec.pages);
    parallel_for(spec.pages, workers, [&](int p) {
        pages[p] = detail::generate_page(spec, alphabet, p, p < n_distractor);
    });
    return pages;
}

// Brute-force sliding-box reference: enumerates every (rows, start column)
// combination and collects the minimal-width boxes whose scale mass first
// reaches the query count minus tolerance, paired with |mass - count|.
// Sums come from per-column row prefixes, independent of the integral
// stack. A tiny epsilon keeps boundary ties permissive so the set is a
// safe superset for containment checks against the fast stage.
inline std::vector<std::pair<Box, double>> naive_spot_oracle(const SynthPage& page,
                                                             const Query& query,
                                                             double tolerance = 0.15) {
    const PageMaps& maps = page.maps;
    const int H = maps.height_r, W = maps.width_r;
    if (H > 32 || W > 48)
        throw Error(Errc::grid_too_large,
                    "oracle limited to 32x48 grids, got " + std::to_string(H) + "x" +
                        std::to_string(W));

    // col_pref[c][r] = sum of scale over rows [0, r) of column c.
    std::vector<std::vector<double>> col_pref(W, std::vector<double>(H + 1, 0.0));
    for (int c = 0; c < W; ++c)
        for (int r = 0; r < H; ++r)
            col_pref[c][r + 1] = col_pref[c][r] + static_cast<double>(maps.scale_at(r, c));

    const double target = query.total_count;
    const double thr = target - tolerance;
    constexpr double eps = 1e-9;

    std::vector<std::pair<Box, double>> hits;
    for (int r0 = 0; r0 < H; ++r0) {
        for (int r1 = r0 + 1; r1 <= H; ++r1) {
            for (int c0 = 0; c0 < W; ++c0) {
                double mass = 0.0;
                for (int c1 = c0 + 1; c1 <= W; ++c1) {
                    const double prev = mass;
                    mass += col_pref[c1 - 1][r1] - col_pref[c1 - 1][r0];
                    if (mass >= thr - eps && prev < thr + eps)
                        hits.push_back({Box{r0, c0, r1, c1}, std::abs(mass - target)});
                }
            }
        }
    }
    return hits;
}

}  // namespace cspot
