#pragma once
// Per-page character probability map F, scale map S and the ".cpmap"
// binary format that carries them. Loading validates every invariant the
// downstream pipeline relies on; writing reproduces the payload bit-exactly.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cspot/alphabet.hpp"
#include "cspot/types.hpp"

namespace cspot {

// One page of model output on the downscaled H_r x W_r grid.
// prob is laid out row-major with the channel innermost, scale row-major.
struct PageMaps {
    std::string page_id;
    int height_r = 0;
    int width_r = 0;
    Alphabet alphabet;
    int downscale = 1;
    std::vector<float> prob;   // height_r * width_r * C
    std::vector<float> scale;  // height_r * width_r

    int channels() const { return alphabet.size(); }

    float prob_at(int row, int col, int channel) const {
        return prob[(static_cast<size_t>(row) * width_r + col) * channels() + channel];
    }
    float scale_at(int row, int col) const {
        return scale[static_cast<size_t>(row) * width_r + col];
    }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height_r && col >= 0 && col < width_r;
    }

    void check_cell(int row, int col, int channel) const {
        if (!in_bounds(row, col) || channel < 0 || channel >= channels())
            throw Error(Errc::out_of_bounds,
                        "cell (" + std::to_string(row) + "," + std::to_string(col) +
                            ") channel " + std::to_string(channel));
    }
};

// F_s[i,j,k] = F[i,j,k] * S[i,j], computed on demand.
inline double scaled_prob_at(const PageMaps& page, int row, int col, int channel) {
    page.check_cell(row, col, channel);
    return static_cast<double>(page.prob_at(row, col, channel)) *
           static_cast<double>(page.scale_at(row, col));
}

namespace detail {

constexpr char kMapMagic[4] = {'C', 'P', 'M', '1'};
constexpr double kProbSumTolerance = 1e-3;

struct LeReader {
    const unsigned char* p;
    size_t left;
    const std::string& name;

    void need(size_t n) const {
        if (left < n)
            throw Error(Errc::truncated_payload,
                        name + ": expected " + std::to_string(n) + " more bytes, have " +
                            std::to_string(left));
    }
    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                     (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
        p += 4;
        left -= 4;
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

inline void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_f32(std::string& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

inline std::string cell_name(const char* field, int row, int col) {
    return std::string(field) + "[" + std::to_string(row) + "," + std::to_string(col) + "]";
}

}  // namespace detail

// Validates all PageMaps invariants: value ranges, per-cell probability
// normalization and finiteness. Used by the loader and by the synthetic
// generator before it emits anything.
inline void validate_page_maps(const PageMaps& page) {
    if (page.height_r <= 0 || page.width_r <= 0)
        throw Error(Errc::invariant_violation, "empty grid");
    if (page.downscale < 1)
        throw Error(Errc::invariant_violation,
                    "downscale " + std::to_string(page.downscale) + " < 1");
    page.alphabet.validate();
    const int C = page.channels();
    if (page.scale.size() != static_cast<size_t>(page.height_r) * page.width_r)
        throw Error(Errc::invariant_violation, "scale buffer size mismatch");
    if (page.prob.size() != static_cast<size_t>(page.height_r) * page.width_r * C)
        throw Error(Errc::invariant_violation, "prob buffer size mismatch");

    for (int r = 0; r < page.height_r; ++r) {
        for (int c = 0; c < page.width_r; ++c) {
            const float s = page.scale_at(r, c);
            if (!std::isfinite(s) || s < 0.0f || s > 1.0f)
                throw Error(Errc::invariant_violation,
                            detail::cell_name("scale", r, c) + " = " + std::to_string(s) +
                                " outside [0,1]");
            double sum = 0.0;
            for (int k = 0; k < C; ++k) {
                const float p = page.prob_at(r, c, k);
                if (!std::isfinite(p) || p < 0.0f || p > 1.0f)
                    throw Error(Errc::invariant_violation,
                                detail::cell_name("prob", r, c) + " channel " +
                                    std::to_string(k) + " = " + std::to_string(p) +
                                    " outside [0,1]");
                sum += p;
            }
            if (sum < 1.0 - detail::kProbSumTolerance || sum > 1.0 + detail::kProbSumTolerance)
                throw Error(Errc::invariant_violation,
                            detail::cell_name("prob", r, c) + " channel sum " +
                                std::to_string(sum) + " not normalized");
        }
    }
}

inline std::string serialize_page_maps(const PageMaps& page) {
    std::string out;
    const int C = page.channels();
    out.reserve(24 + 4 * (static_cast<size_t>(C) + page.scale.size() + page.prob.size()));
    out.append(detail::kMapMagic, 4);
    detail::put_u32(out, static_cast<uint32_t>(page.height_r));
    detail::put_u32(out, static_cast<uint32_t>(page.width_r));
    detail::put_u32(out, static_cast<uint32_t>(C));
    detail::put_u32(out, static_cast<uint32_t>(page.downscale));
    detail::put_u32(out, static_cast<uint32_t>(page.alphabet.blank_index));
    for (char32_t cp : page.alphabet.symbols) detail::put_u32(out, static_cast<uint32_t>(cp));
    for (float s : page.scale) detail::put_f32(out, s);
    for (float p : page.prob) detail::put_f32(out, p);
    return out;
}

inline PageMaps parse_page_maps(const std::string& bytes, const std::string& name) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), detail::kMapMagic, 4) != 0)
        throw Error(Errc::bad_magic, name + ": not a .cpmap file");
    detail::LeReader in{reinterpret_cast<const unsigned char*>(bytes.data()) + 4,
                        bytes.size() - 4, name};

    PageMaps page;
    page.page_id = name;
    page.height_r = static_cast<int>(in.u32());
    page.width_r = static_cast<int>(in.u32());
    const uint32_t C = in.u32();
    page.downscale = static_cast<int>(in.u32());
    const uint32_t blank = in.u32();
    if (C == 0 || C > 1u << 20)
        throw Error(Errc::invariant_violation, name + ": channel count " + std::to_string(C));
    if (blank >= C)
        throw Error(Errc::invariant_violation,
                    name + ": blank_index " + std::to_string(blank) + " >= C");
    std::vector<char32_t> symbols(C);
    for (uint32_t k = 0; k < C; ++k) symbols[k] = static_cast<char32_t>(in.u32());
    page.alphabet = Alphabet(std::move(symbols), static_cast<int>(blank));

    const size_t cells = static_cast<size_t>(page.height_r) * page.width_r;
    page.scale.resize(cells);
    for (size_t i = 0; i < cells; ++i) page.scale[i] = in.f32();
    page.prob.resize(cells * C);
    for (size_t i = 0; i < cells * C; ++i) page.prob[i] = in.f32();
    if (in.left != 0)
        throw Error(Errc::truncated_payload,
                    name + ": " + std::to_string(in.left) + " trailing bytes after payload");

    validate_page_maps(page);
    return page;
}

inline PageMaps load_page_maps(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    PageMaps page = parse_page_maps(bytes, path.stem().string());
    return page;
}

inline void write_page_maps(const PageMaps& page, const std::filesystem::path& path) {
    validate_page_maps(page);
    const std::string bytes = serialize_page_maps(page);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Errc::io_error, "short write to " + path.string());
}

}  // namespace cspot
