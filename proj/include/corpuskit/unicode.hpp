#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/unicode_data.hpp"

namespace corpuskit::unicode {

using unicode_data::CharClass;

constexpr char32_t kReplacementChar = 0xFFFD;

namespace detail {

// Direct-indexed class table for the ASCII range; the binary search over
// kClassRanges dominates profiles otherwise.
inline const std::array<CharClass, 128>& ascii_class_table() {
    static const std::array<CharClass, 128> table = [] {
        std::array<CharClass, 128> t{};
        using unicode_data::kClassRanges;
        using unicode_data::kClassRangeCount;
        for (size_t cp = 0; cp < 128; ++cp) {
            size_t lo = 0, hi = kClassRangeCount;
            while (hi - lo > 1) {
                size_t mid = (lo + hi) / 2;
                if (kClassRanges[mid].start <= cp) lo = mid; else hi = mid;
            }
            t[cp] = kClassRanges[lo].cls;
        }
        return t;
    }();
    return table;
}

}  // namespace detail

inline CharClass char_class(char32_t cp) {
    using unicode_data::kClassRanges;
    using unicode_data::kClassRangeCount;
    if (cp < 0x80) return detail::ascii_class_table()[cp];
    if (cp >= 0x110000) return CharClass::Other;
    size_t lo = 0, hi = kClassRangeCount;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (kClassRanges[mid].start <= cp) lo = mid; else hi = mid;
    }
    return kClassRanges[lo].cls;
}

inline bool is_letter(char32_t cp) {
    if (cp < 0x80)  // fast path
        return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    CharClass c = char_class(cp);
    return c == CharClass::Lu || c == CharClass::Ll || c == CharClass::Lo_;
}

inline bool is_upper(char32_t cp) {
    if (cp < 0x80) return cp >= 'A' && cp <= 'Z';
    return char_class(cp) == CharClass::Lu;
}

inline bool is_lower(char32_t cp) {
    if (cp < 0x80) return cp >= 'a' && cp <= 'z';
    return char_class(cp) == CharClass::Ll;
}

inline bool is_digit(char32_t cp) {
    if (cp < 0x80) return cp >= '0' && cp <= '9';
    return char_class(cp) == CharClass::Nd;
}

inline bool is_punct(char32_t cp) {
    return char_class(cp) == CharClass::P;
}

// ASCII whitespace plus Unicode space separators.
inline bool is_space(char32_t cp) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v')
        return true;
    return cp >= 0x80 && char_class(cp) == CharClass::Zs;
}

// Per-scalar predicate bits; one lookup replaces a handful of char_class
// fetches in scanning loops.
enum : uint8_t {
    kFlagSpace = 1,
    kFlagLetter = 2,
    kFlagLower = 4,
    kFlagUpper = 8,
    kFlagDigit = 16,
    kFlagPunct = 32,
    kFlagSpecial = 64,  // symbols (S) and unclassified (Other), excluding spaces
};

inline uint8_t char_flags(char32_t c) {
    static const std::array<uint8_t, 128> ascii = [] {
        std::array<uint8_t, 128> t{};
        for (char32_t cp = 0; cp < 128; ++cp) {
            uint8_t f = 0;
            if (is_space(cp)) f |= kFlagSpace;
            if (is_letter(cp)) f |= kFlagLetter;
            if (is_lower(cp)) f |= kFlagLower;
            if (is_upper(cp)) f |= kFlagUpper;
            if (is_digit(cp)) f |= kFlagDigit;
            if (is_punct(cp)) f |= kFlagPunct;
            CharClass cc = char_class(cp);
            if (!is_space(cp) && (cc == CharClass::S || cc == CharClass::Other))
                f |= kFlagSpecial;
            t[cp] = f;
        }
        return t;
    }();
    if (c < 0x80) return ascii[c];
    switch (char_class(c)) {
        case CharClass::Zs: return kFlagSpace;
        case CharClass::Lu: return kFlagLetter | kFlagUpper;
        case CharClass::Ll: return kFlagLetter | kFlagLower;
        case CharClass::Lo_: return kFlagLetter;
        case CharClass::Nd: return kFlagDigit;
        case CharClass::P: return kFlagPunct;
        case CharClass::S: return kFlagSpecial;
        case CharClass::Other: return kFlagSpecial;
        default: return 0;
    }
}

// Lowercasing for ASCII and Latin-1; sufficient for the German stopword list.
inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
}

inline uint8_t combining_class(char32_t cp) {
    using unicode_data::kCombiningClass;
    using unicode_data::kCombiningClassCount;
    if (cp < 0x300) return 0;
    size_t lo = 0, hi = kCombiningClassCount;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (kCombiningClass[mid].cp < cp) lo = mid + 1; else hi = mid;
    }
    if (lo < kCombiningClassCount && kCombiningClass[lo].cp == cp)
        return kCombiningClass[lo].ccc;
    return 0;
}

// --- UTF-8 decoding with repair ----------------------------------------

struct DecodeResult {
    std::u32string codepoints;
    size_t replacements = 0;  // invalid byte sequences replaced with U+FFFD
};

// Decodes possibly-broken UTF-8. Invalid sequences become U+FFFD (counted),
// CESU-8 style encoded surrogate pairs are recombined.
inline DecodeResult decode_utf8(std::string_view in) {
    DecodeResult r;
    r.codepoints.reserve(in.size());
    size_t i = 0, n = in.size();
    auto byte = [&](size_t k) { return static_cast<uint8_t>(in[k]); };
    while (i < n) {
        uint8_t b0 = byte(i);
        if (b0 < 0x80) {
            r.codepoints.push_back(b0);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
        else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
        else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
        else {
            r.codepoints.push_back(kReplacementChar);
            ++r.replacements;
            ++i;
            continue;
        }
        if (i + len > n) {
            r.codepoints.push_back(kReplacementChar);
            ++r.replacements;
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            uint8_t b = byte(i + k);
            if ((b & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp > 0x10FFFF ||
            (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) {
            r.codepoints.push_back(kReplacementChar);
            ++r.replacements;
            ++i;
            continue;
        }
        if (cp >= 0xD800 && cp <= 0xDFFF) {
            // Encoded surrogate. Recombine a high+low pair, replace lone ones.
            if (cp <= 0xDBFF && i + len + 3 <= n) {
                size_t j = i + len;
                if ((byte(j) & 0xF0) == 0xE0 && j + 3 <= n &&
                    (byte(j + 1) & 0xC0) == 0x80 && (byte(j + 2) & 0xC0) == 0x80) {
                    char32_t lo = ((byte(j) & 0x0F) << 12) |
                                  ((byte(j + 1) & 0x3F) << 6) | (byte(j + 2) & 0x3F);
                    if (lo >= 0xDC00 && lo <= 0xDFFF) {
                        r.codepoints.push_back(0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00));
                        i = j + 3;
                        continue;
                    }
                }
            }
            r.codepoints.push_back(kReplacementChar);
            ++r.replacements;
            i += len;
            continue;
        }
        r.codepoints.push_back(cp);
        i += len;
    }
    return r;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

inline std::string encode_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

// --- NFC normalization ---------------------------------------------------

namespace detail {

constexpr char32_t kHangulSBase = 0xAC00, kHangulLBase = 0x1100,
                   kHangulVBase = 0x1161, kHangulTBase = 0x11A7;
constexpr int kHangulLCount = 19, kHangulVCount = 21, kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

inline const unicode_data::Decomp* find_decomp(char32_t cp) {
    using unicode_data::kCanonicalDecomp;
    using unicode_data::kCanonicalDecompCount;
    size_t lo = 0, hi = kCanonicalDecompCount;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (kCanonicalDecomp[mid].cp < cp) lo = mid + 1; else hi = mid;
    }
    if (lo < kCanonicalDecompCount && kCanonicalDecomp[lo].cp == cp)
        return &kCanonicalDecomp[lo];
    return nullptr;
}

inline char32_t compose_pair(char32_t a, char32_t b) {
    // Hangul LV / LVT composition.
    if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
        b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
        return kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) * kHangulTCount;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
        (a - kHangulSBase) % kHangulTCount == 0 &&
        b > kHangulTBase && b < kHangulTBase + kHangulTCount) {
        return a + (b - kHangulTBase);
    }
    using unicode_data::kCompPairs;
    using unicode_data::kCompPairCount;
    size_t lo = 0, hi = kCompPairCount;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (kCompPairs[mid].first < a ||
            (kCompPairs[mid].first == a && kCompPairs[mid].second < b))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < kCompPairCount && kCompPairs[lo].first == a && kCompPairs[lo].second == b)
        return kCompPairs[lo].composed;
    return 0;
}

}  // namespace detail

inline std::u32string nfc(const std::u32string& in) {
    bool ascii = true;
    for (char32_t cp : in)
        if (cp >= 0x80) { ascii = false; break; }
    if (ascii) return in;

    // Canonical decomposition.
    std::u32string d;
    d.reserve(in.size());
    for (char32_t cp : in) {
        if (cp >= detail::kHangulSBase && cp < detail::kHangulSBase + detail::kHangulSCount) {
            char32_t s = cp - detail::kHangulSBase;
            d.push_back(detail::kHangulLBase + s / detail::kHangulNCount);
            d.push_back(detail::kHangulVBase + (s % detail::kHangulNCount) / detail::kHangulTCount);
            char32_t t = s % detail::kHangulTCount;
            if (t) d.push_back(detail::kHangulTBase + t);
            continue;
        }
        if (const auto* dec = detail::find_decomp(cp)) {
            for (int k = 0; k < dec->len; ++k) d.push_back(dec->to[k]);
        } else {
            d.push_back(cp);
        }
    }

    // Canonical ordering of combining marks.
    for (size_t i = 1; i < d.size(); ++i) {
        uint8_t cc = combining_class(d[i]);
        if (cc == 0) continue;
        size_t j = i;
        while (j > 0 && combining_class(d[j - 1]) > cc) {
            std::swap(d[j - 1], d[j]);
            --j;
        }
    }

    // Canonical composition.
    std::u32string out;
    out.reserve(d.size());
    size_t starter = std::u32string::npos;
    int last_cc = -1;
    for (char32_t cp : d) {
        uint8_t cc = combining_class(cp);
        if (starter != std::u32string::npos && (last_cc < static_cast<int>(cc) || last_cc == -1)) {
            if (char32_t comp = detail::compose_pair(out[starter], cp)) {
                out[starter] = comp;
                continue;
            }
        }
        if (cc == 0) {
            starter = out.size();
            last_cc = -1;
        } else {
            last_cc = cc;
        }
        out.push_back(cp);
    }
    return out;
}

inline std::string nfc_utf8(std::string_view in) {
    return encode_utf8(nfc(decode_utf8(in).codepoints));
}

// Number of Unicode scalar values in a UTF-8 string.
inline size_t scalar_count(std::string_view s) {
    size_t n = 0;
    for (char c : s)
        if ((static_cast<uint8_t>(c) & 0xC0) != 0x80) ++n;
    return n;
}

}  // namespace corpuskit::unicode
