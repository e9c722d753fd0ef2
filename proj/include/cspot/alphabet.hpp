#pragma once
// Alphabet handling and query normalization. The alphabet is the ordered
// list of character channels of a probability map, one of which is the
// CTC blank. Queries are normalized against it before any spotting.

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cspot/types.hpp"

namespace cspot {
namespace utf8 {

// Minimal UTF-8 codec; rejects nothing fancy, just enough for query and
// lexicon strings.
inline std::u32string decode(const std::string& s) {
    std::u32string out;
    size_t i = 0;
    while (i < s.size()) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        int extra = 0;
        if (b < 0x80) {
            cp = b;
        } else if ((b & 0xE0) == 0xC0) {
            cp = b & 0x1F;
            extra = 1;
        } else if ((b & 0xF0) == 0xE0) {
            cp = b & 0x0F;
            extra = 2;
        } else if ((b & 0xF8) == 0xF0) {
            cp = b & 0x07;
            extra = 3;
        } else {
            throw Error(Errc::unknown_symbol, "invalid UTF-8 byte in \"" + s + "\"");
        }
        if (i + extra >= s.size())
            throw Error(Errc::unknown_symbol, "truncated UTF-8 sequence in \"" + s + "\"");
        for (int k = 1; k <= extra; ++k) {
            const unsigned char cont = static_cast<unsigned char>(s[i + k]);
            if ((cont & 0xC0) != 0x80)
                throw Error(Errc::unknown_symbol, "invalid UTF-8 continuation in \"" + s + "\"");
            cp = (cp << 6) | (cont & 0x3F);
        }
        out.push_back(cp);
        i += 1 + extra;
    }
    return out;
}

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(const std::u32string& s) {
    std::string out;
    for (char32_t cp : s) append(out, cp);
    return out;
}

}  // namespace utf8

inline char32_t fold_char(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + (U'a' - U'A');
    return cp;
}

inline bool is_ignorable(char32_t cp) {
    // Punctuation and whitespace are dropped during normalization when the
    // alphabet does not carry them (queries like "and," or "don't").
    if (cp == U' ' || cp == U'\t') return true;
    if (cp < 0x80) {
        const char c = static_cast<char>(cp);
        static const std::string punct = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
        return punct.find(c) != std::string::npos;
    }
    return false;
}

// Ordered character channels of a map. symbols[blank_index] is the CTC
// blank; it never appears in normalized text.
struct Alphabet {
    std::vector<char32_t> symbols;
    int blank_index = 0;

    Alphabet() = default;
    Alphabet(std::vector<char32_t> syms, int blank) : symbols(std::move(syms)), blank_index(blank) {
        validate();
        rebuild_index();
    }

    int size() const { return static_cast<int>(symbols.size()); }

    // Channel for a code point, -1 if absent. The blank channel is not
    // addressable through text.
    int index_of(char32_t cp) const {
        auto it = index_.find(cp);
        if (it == index_.end()) return -1;
        return it->second;
    }

    void validate() const {
        if (symbols.empty())
            throw Error(Errc::invariant_violation, "alphabet is empty");
        if (blank_index < 0 || blank_index >= size())
            throw Error(Errc::invariant_violation,
                        "blank_index " + std::to_string(blank_index) +
                            " outside [0, " + std::to_string(size()) + ")");
        std::vector<char32_t> sorted = symbols;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw Error(Errc::invariant_violation, "alphabet symbols are not unique");
    }

    void rebuild_index() {
        index_.clear();
        for (int i = 0; i < size(); ++i) {
            if (i == blank_index) continue;
            index_.emplace(symbols[i], i);
        }
    }

    // blank + lowercase a..z, the alphabet used throughout the synthetic
    // corpora. Blank is channel 0 with code point 0.
    static Alphabet latin_lower() {
        std::vector<char32_t> syms;
        syms.push_back(0);
        for (char32_t c = U'a'; c <= U'z'; ++c) syms.push_back(c);
        return Alphabet(std::move(syms), 0);
    }

private:
    std::unordered_map<char32_t, int> index_;
};

// A normalized text query: the channel sequence plus its count histogram
// t_c (blank entry always zero).
struct Query {
    std::string raw;
    std::string normalized;
    std::vector<int> indices;        // channel per character, no blanks
    std::vector<double> count_hist;  // length C
    double total_count = 0.0;

    int length() const { return static_cast<int>(indices.size()); }
};

// Maps raw text onto the alphabet. Case folding is attempted first when
// requested but the unfolded character wins if only it is present in the
// alphabet. Characters absent from the alphabet are dropped when they are
// punctuation/whitespace and rejected otherwise.
inline Query normalize_query(const std::string& raw, const Alphabet& alphabet,
                             bool fold_case = true) {
    if (raw.empty()) throw Error(Errc::invalid_spec, "query is empty");
    Query q;
    q.raw = raw;
    q.count_hist.assign(alphabet.size(), 0.0);
    std::u32string kept;
    for (char32_t cp : utf8::decode(raw)) {
        char32_t use = cp;
        int idx = -1;
        if (fold_case) idx = alphabet.index_of(fold_char(cp));
        if (idx >= 0) {
            use = fold_char(cp);
        } else {
            idx = alphabet.index_of(cp);
        }
        if (idx < 0) {
            if (is_ignorable(cp)) continue;
            throw Error(Errc::unknown_symbol,
                        "query \"" + raw + "\" contains a symbol outside the alphabet");
        }
        kept.push_back(use);
        q.indices.push_back(idx);
        q.count_hist[idx] += 1.0;
    }
    if (q.indices.empty())
        throw Error(Errc::empty_after_normalization,
                    "query \"" + raw + "\" is empty after normalization");
    q.normalized = utf8::encode(kept);
    q.total_count = static_cast<double>(q.indices.size());
    return q;
}

}  // namespace cspot
