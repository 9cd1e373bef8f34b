#pragma once

// Encoding repair and OCR whitespace cleanup. All passes are idempotent:
// fix_encoding internally re-applies itself until the text stops changing
// (each changing sub-pass shortens the text, so this terminates).

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpuskit/unicode.hpp"

namespace corpuskit::formatting {

struct EncodingReport {
    size_t byte_replacements = 0;   // undecodable bytes replaced with U+FFFD
    size_t mojibake_repairs = 0;
    size_t entities_decoded = 0;
    size_t controls_removed = 0;
};

// Overridable quote normalization table (defaults documented in config).
struct QuoteMap {
    std::unordered_map<char32_t, char32_t> map;

    static QuoteMap defaults() {
        QuoteMap q;
        for (char32_t cp : {0x201CU, 0x201DU, 0x201EU, 0x201FU, 0x00ABU, 0x00BBU,
                            0x2033U, 0x301DU, 0x301EU})
            q.map[cp] = U'"';
        for (char32_t cp : {0x2018U, 0x2019U, 0x201AU, 0x201BU, 0x2039U, 0x203AU,
                            0x02BCU, 0x2032U})
            q.map[cp] = U'\'';
        return q;
    }
};

namespace detail {

// Windows-1252 printable images of the 0x80-0x9F byte range, needed to
// recognize UTF-8 continuation bytes that were mis-decoded through cp1252.
inline int cp1252_byte(char32_t cp) {
    switch (cp) {
        case 0x20AC: return 0x80; case 0x201A: return 0x82; case 0x0192: return 0x83;
        case 0x201E: return 0x84; case 0x2026: return 0x85; case 0x2020: return 0x86;
        case 0x2021: return 0x87; case 0x02C6: return 0x88; case 0x2030: return 0x89;
        case 0x0160: return 0x8A; case 0x2039: return 0x8B; case 0x0152: return 0x8C;
        case 0x017D: return 0x8E; case 0x2018: return 0x91; case 0x2019: return 0x92;
        case 0x201C: return 0x93; case 0x201D: return 0x94; case 0x2022: return 0x95;
        case 0x2013: return 0x96; case 0x2014: return 0x97; case 0x02DC: return 0x98;
        case 0x2122: return 0x99; case 0x0161: return 0x9A; case 0x203A: return 0x9B;
        case 0x0153: return 0x9C; case 0x017E: return 0x9E; case 0x0178: return 0x9F;
        default: break;
    }
    if (cp <= 0xFF) return static_cast<int>(cp);
    return -1;
}

inline bool is_continuation_image(char32_t cp) {
    int b = cp1252_byte(cp);
    return b >= 0x80 && b <= 0xBF;
}

// Repairs double-encoded UTF-8 (text decoded as Latin-1/cp1252 and re-encoded).
inline std::u32string repair_mojibake(const std::u32string& in, size_t& repairs) {
    std::u32string out;
    out.reserve(in.size());
    size_t i = 0, n = in.size();
    while (i < n) {
        char32_t lead = in[i];
        int need = 0;
        if (lead >= 0xC2 && lead <= 0xDF) need = 1;
        else if (lead >= 0xE0 && lead <= 0xEF) need = 2;
        else if (lead >= 0xF0 && lead <= 0xF4) need = 3;
        if (need > 0 && i + need < n) {
            bool ok = true;
            char32_t cp = lead & (need == 1 ? 0x1F : need == 2 ? 0x0F : 0x07);
            for (int k = 1; k <= need && ok; ++k) {
                if (!is_continuation_image(in[i + k])) ok = false;
                else cp = (cp << 6) | (cp1252_byte(in[i + k]) & 0x3F);
            }
            if (ok && cp >= 0xA0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF) &&
                unicode::char_class(cp) != unicode::CharClass::Other) {
                out.push_back(cp);
                i += need + 1;
                ++repairs;
                continue;
            }
        }
        out.push_back(lead);
        ++i;
    }
    return out;
}

// Removes C0/C1 controls except newline; tabs become spaces, CRLF/CR become
// newlines, ANSI escape sequences are dropped.
inline std::u32string strip_controls(const std::u32string& in, size_t& removed) {
    std::u32string out;
    out.reserve(in.size());
    for (size_t i = 0; i < in.size(); ++i) {
        char32_t cp = in[i];
        if (cp == 0x1B) {  // ESC: swallow CSI sequence or the single escape char
            ++removed;
            if (i + 1 < in.size() && in[i + 1] == '[') {
                size_t j = i + 2;
                while (j < in.size() && !(in[j] >= 0x40 && in[j] <= 0x7E)) ++j;
                i = j < in.size() ? j : in.size() - 1;
            }
            continue;
        }
        if (cp == '\t') { out.push_back(' '); continue; }
        if (cp == '\r') {
            if (i + 1 < in.size() && in[i + 1] == '\n') continue;
            out.push_back('\n');
            continue;
        }
        if (cp == '\n') { out.push_back(cp); continue; }
        if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) {
            ++removed;
            continue;
        }
        out.push_back(cp);
    }
    return out;
}

inline const std::unordered_map<std::u32string, std::u32string>& entity_table() {
    static const auto* table = [] {
        auto* m = new std::unordered_map<std::u32string, std::u32string>();
        m->reserve(unicode_data::kHtmlEntityCount);
        for (size_t i = 0; i < unicode_data::kHtmlEntityCount; ++i) {
            const auto& e = unicode_data::kHtmlEntities[i];
            std::u32string name, value;
            for (const char* p = e.name; *p; ++p) name.push_back(static_cast<unsigned char>(*p));
            value = unicode::decode_utf8(e.value).codepoints;
            (*m)[name] = value;
        }
        return m;
    }();
    return *table;
}

inline std::u32string decode_entities(const std::u32string& in, size_t& decoded) {
    std::u32string out;
    out.reserve(in.size());
    size_t i = 0, n = in.size();
    while (i < n) {
        if (in[i] != '&') {
            out.push_back(in[i++]);
            continue;
        }
        size_t end = i + 1;
        size_t limit = std::min(n, i + 40);
        while (end < limit && in[end] != ';' && in[end] != '&' && in[end] > 0x20) ++end;
        if (end >= n || in[end] != ';' || end == i + 1) {
            out.push_back(in[i++]);
            continue;
        }
        std::u32string body(in.begin() + i + 1, in.begin() + end);
        char32_t numeric = 0;
        bool ok = false;
        if (body.size() > 1 && body[0] == '#') {
            size_t k = 1;
            int base = 10;
            if (k < body.size() && (body[k] == 'x' || body[k] == 'X')) { base = 16; ++k; }
            ok = k < body.size();
            for (; k < body.size() && ok; ++k) {
                char32_t c = body[k];
                int d = (c >= '0' && c <= '9') ? c - '0'
                      : (base == 16 && c >= 'a' && c <= 'f') ? c - 'a' + 10
                      : (base == 16 && c >= 'A' && c <= 'F') ? c - 'A' + 10 : -1;
                if (d < 0 || d >= base) { ok = false; break; }
                numeric = numeric * base + d;
                if (numeric > 0x10FFFF) { ok = false; break; }
            }
            if (ok && (numeric == 0 || (numeric >= 0xD800 && numeric <= 0xDFFF))) ok = false;
            if (ok) {
                out.push_back(numeric);
                ++decoded;
                i = end + 1;
                continue;
            }
        } else {
            auto it = entity_table().find(body);
            if (it != entity_table().end()) {
                out += it->second;
                ++decoded;
                i = end + 1;
                continue;
            }
        }
        out.push_back(in[i++]);
    }
    return out;
}

inline std::u32string map_chars(const std::u32string& in, const QuoteMap& quotes) {
    static const auto* lig = [] {
        auto* m = new std::unordered_map<char32_t, std::u32string>();
        for (size_t i = 0; i < unicode_data::kLigatureMapCount; ++i)
            (*m)[unicode_data::kLigatureMap[i].cp] =
                unicode::decode_utf8(unicode_data::kLigatureMap[i].to).codepoints;
        for (size_t i = 0; i < unicode_data::kWidthMapCount; ++i)
            (*m)[unicode_data::kWidthMap[i].cp] =
                unicode::decode_utf8(unicode_data::kWidthMap[i].to).codepoints;
        return m;
    }();
    // both tables only ever map characters above ASCII (unless a custom quote
    // map says otherwise), so plain text can skip the hash lookups
    bool quotes_have_ascii = false;
    for (const auto& [from, to] : quotes.map)
        if (from < 0x80) { quotes_have_ascii = true; break; }
    std::u32string out;
    out.reserve(in.size());
    for (char32_t cp : in) {
        if (cp < 0x80 && !quotes_have_ascii) {
            out.push_back(cp);
            continue;
        }
        if (auto q = quotes.map.find(cp); q != quotes.map.end()) {
            out.push_back(q->second);
            continue;
        }
        if (auto it = lig->find(cp); it != lig->end()) {
            out += it->second;
            continue;
        }
        out.push_back(cp);
    }
    return out;
}

// Scalars below this bound get a precomputed "inert" bit for the fast path.
inline constexpr char32_t kInertTableLimit = 0x2800;

// True for scalars that every sub-pass leaves alone on their own: not a
// control, not ligature/width-mapped, combining class zero and NFC-stable
// as a singleton. Pair effects (mojibake lead + continuation image, NFC
// recomposition) are excluded by the caller: it bails on any combining mark
// and on any lead candidate followed by a continuation image.
inline bool scalar_inert(char32_t cp) {
    static const std::vector<bool>& table = *[] {
        auto* t = new std::vector<bool>(kInertTableLimit, false);
        for (char32_t c = 0xA0; c < kInertTableLimit; ++c) {
            if (unicode::combining_class(c) != 0) continue;
            std::u32string s(1, c);
            if (unicode::nfc(s) != s) continue;
            bool mapped = false;
            for (size_t i = 0; i < unicode_data::kLigatureMapCount && !mapped; ++i)
                mapped = unicode_data::kLigatureMap[i].cp == c;
            for (size_t i = 0; i < unicode_data::kWidthMapCount && !mapped; ++i)
                mapped = unicode_data::kWidthMap[i].cp == c;
            if (!mapped) (*t)[c] = true;
        }
        return t;
    }();
    return cp >= 0xA0 && cp < kInertTableLimit && table[cp];
}

// True when every sub-pass provably leaves the text byte-identical, so the
// decode/transform/encode machinery can be skipped entirely.
inline bool encoding_clean(std::string_view text, const QuoteMap& quotes) {
    // text whose every scalar is pass-inert is untouched by the whole
    // machinery; scan strictly-valid UTF-8 and bail to the slow path on
    // anything questionable
    for (const auto& [from, to] : quotes.map)
        if (from < 0x80) return false;
    {
        bool clean = true;
        bool prev_lead = false;  // previous scalar in 0xC2..0xF4, a mojibake lead image
        size_t i = 0, n = text.size();
        while (i < n) {
            // SWAR bulk step: 8 printable non-'&' ASCII bytes at a time
            constexpr uint64_t kHi = 0x8080808080808080ULL;
            constexpr uint64_t kLo = 0x0101010101010101ULL;
            while (i + 8 <= n) {
                uint64_t v;
                std::memcpy(&v, text.data() + i, 8);
                uint64_t nonascii = v & kHi;
                uint64_t below20 = (v - kLo * 0x20) & ~v & kHi;
                uint64_t x = v ^ (kLo * '&');
                uint64_t amp = (x - kLo) & ~x & kHi;
                uint64_t y = v ^ (kLo * 0x7F);
                uint64_t del = (y - kLo) & ~y & kHi;
                if (nonascii | below20 | amp | del) break;
                prev_lead = false;
                i += 8;
            }
            if (i >= n) break;
            uint8_t b = static_cast<uint8_t>(text[i]);
            if (b < 0x80) {
                if (b != '\n' && (b < 0x20 || b == 0x7F || b == '&')) { clean = false; break; }
                prev_lead = false;
                ++i;
                continue;
            }
            // strict UTF-8 decode of one scalar; anything invalid, overlong
            // or surrogate goes to the slow path
            char32_t cp;
            size_t len;
            auto cont = [&](size_t k) {
                return i + k < n && (static_cast<uint8_t>(text[i + k]) & 0xC0) == 0x80;
            };
            if (b >= 0xC2 && b <= 0xDF && cont(1)) {
                cp = (static_cast<char32_t>(b & 0x1F) << 6) |
                     (static_cast<uint8_t>(text[i + 1]) & 0x3F);
                len = 2;
            } else if (b >= 0xE0 && b <= 0xEF && cont(1) && cont(2)) {
                cp = (static_cast<char32_t>(b & 0x0F) << 12) |
                     ((static_cast<char32_t>(static_cast<uint8_t>(text[i + 1])) & 0x3F) << 6) |
                     (static_cast<uint8_t>(text[i + 2]) & 0x3F);
                len = 3;
                if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) { clean = false; break; }
            } else if (b >= 0xF0 && b <= 0xF4 && cont(1) && cont(2) && cont(3)) {
                cp = (static_cast<char32_t>(b & 0x07) << 18) |
                     ((static_cast<char32_t>(static_cast<uint8_t>(text[i + 1])) & 0x3F) << 12) |
                     ((static_cast<char32_t>(static_cast<uint8_t>(text[i + 2])) & 0x3F) << 6) |
                     (static_cast<uint8_t>(text[i + 3]) & 0x3F);
                len = 4;
                if (cp < 0x10000 || cp > 0x10FFFF) { clean = false; break; }
            } else {
                clean = false;
                break;
            }
            if (!detail::scalar_inert(cp) || quotes.map.count(cp) ||
                (prev_lead && detail::is_continuation_image(cp))) {
                clean = false;
                break;
            }
            prev_lead = cp >= 0xC2 && cp <= 0xF4;
            i += len;
        }
        return clean;
    }
}

}  // namespace detail

// Repairs encoding damage: mojibake, HTML entities, controls and escape
// sequences, ligatures, character width, quotes; output is NFC-normalized.
inline std::string fix_encoding(std::string_view text, EncodingReport* report = nullptr,
                                const QuoteMap& quotes = QuoteMap::defaults()) {
    EncodingReport local;
    EncodingReport& rep = report ? *report : local;
    if (detail::encoding_clean(text, quotes)) return std::string(text);
    std::string cur(text);
    for (int pass = 0; pass < 16; ++pass) {
        auto dec = unicode::decode_utf8(cur);
        if (pass == 0) rep.byte_replacements += dec.replacements;
        std::u32string cps = detail::repair_mojibake(dec.codepoints, rep.mojibake_repairs);
        cps = detail::strip_controls(cps, rep.controls_removed);
        cps = detail::decode_entities(cps, rep.entities_decoded);
        cps = detail::map_chars(cps, quotes);
        std::string next = unicode::encode_utf8(unicode::nfc(cps));
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

// Buffer-reusing overload: clean text comes back in its own allocation.
inline std::string fix_encoding(std::string&& text, EncodingReport* report = nullptr,
                                const QuoteMap& quotes = QuoteMap::defaults()) {
    if (detail::encoding_clean(text, quotes)) return std::move(text);
    return fix_encoding(std::string_view(text), report, quotes);
}

// Disambiguates string literals between the view and rvalue overloads.
inline std::string fix_encoding(const char* text, EncodingReport* report = nullptr,
                                const QuoteMap& quotes = QuoteMap::defaults()) {
    return fix_encoding(std::string_view(text), report, quotes);
}

// Collapses space runs, trims lines, caps newline runs at two, and joins
// end-of-line hyphenation. Lowercase continuations drop the hyphen; uppercase
// continuations keep it (German nouns are capitalized, so those are likely
// genuine compounds).
namespace detail {

// Fast-path check: after trimming outer blanks, text with no tabs, no double
// spaces, no space touching a newline, no 3+ newline runs and no line-final
// hyphen comes out of the slow path unchanged. On success b/e hold the
// trimmed bounds.
inline bool whitespace_clean(std::string_view text, size_t& b, size_t& e) {
    b = 0;
    e = text.size();
    while (b < e && (text[b] == ' ' || text[b] == '\t' || text[b] == '\n')) ++b;
    while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t' || text[e - 1] == '\n')) --e;
    for (size_t i = b; i < e; ++i) {
        char c = text[i];
        if (c == '\t') {
            return false;
        } else if (c == ' ') {
            // trailing trim guarantees i+1 < e here
            char nx = text[i + 1];
            if (nx == ' ' || nx == '\n') return false;
        } else if (c == '\n') {
            char nx = text[i + 1];
            if (nx == ' ' || nx == '\t') return false;
            if (nx == '\n' && i + 2 < e &&
                (text[i + 2] == '\n' || text[i + 2] == ' ' || text[i + 2] == '\t'))
                return false;
        } else if (c == '-' && i + 1 < e && text[i + 1] == '\n') {
            return false;  // hyphenation joins need the slow path
        }
    }
    return true;
}

}  // namespace detail

inline std::string fix_whitespace(std::string_view text) {
    {
        size_t b, e;
        if (detail::whitespace_clean(text, b, e)) return std::string(text.substr(b, e - b));
    }
    // Split into lines, collapsing horizontal whitespace and trimming.
    std::vector<std::string> lines;
    std::string line;
    auto flush = [&] {
        while (!line.empty() && line.back() == ' ') line.pop_back();
        lines.push_back(std::move(line));
        line.clear();
    };
    for (char c : text) {
        if (c == '\n') { flush(); continue; }
        if (c == ' ' || c == '\t') {
            if (!line.empty() && line.back() != ' ') line.push_back(' ');
            continue;
        }
        line.push_back(c);
    }
    flush();

    // Hyphenation repair across line breaks.
    auto first_scalar = [](const std::string& s) -> char32_t {
        if (s.empty()) return 0;
        return unicode::decode_utf8(std::string_view(s).substr(0, 4)).codepoints[0];
    };
    auto last_scalar_before_hyphen = [](const std::string& s) -> char32_t {
        // s ends with '-'; decode the scalar preceding it.
        size_t end = s.size() - 1;
        size_t start = end;
        while (start > 0 && (static_cast<uint8_t>(s[start - 1]) & 0xC0) == 0x80) --start;
        if (start == 0) return 0;
        --start;
        while (start > 0 && (static_cast<uint8_t>(s[start]) & 0xC0) == 0x80) --start;
        return unicode::decode_utf8(std::string_view(s).substr(start, end - start)).codepoints[0];
    };
    std::vector<std::string> joined;
    joined.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string cur = std::move(lines[i]);
        while (i + 1 < lines.size() && cur.size() >= 2 && cur.back() == '-' &&
               !lines[i + 1].empty()) {
            char32_t cont = first_scalar(lines[i + 1]);
            char32_t before = last_scalar_before_hyphen(cur);
            if (!unicode::is_letter(before)) break;
            if (unicode::is_lower(cont)) {
                cur.pop_back();
                cur += lines[i + 1];
                ++i;
            } else if (unicode::is_upper(cont)) {
                cur += lines[i + 1];
                ++i;
            } else {
                break;
            }
        }
        joined.push_back(std::move(cur));
    }

    // Reassemble, capping blank-line runs at one and trimming outer blanks.
    std::string out;
    size_t pending_newlines = 0;
    bool any = false;
    for (const auto& l : joined) {
        if (l.empty()) {
            if (any) ++pending_newlines;
            continue;
        }
        if (any) out.append(std::min<size_t>(pending_newlines + 1, 2), '\n');
        pending_newlines = 0;
        out += l;
        any = true;
    }
    return out;
}

// Buffer-reusing overload: already-clean text is returned without a copy.
inline std::string fix_whitespace(std::string&& text) {
    size_t b, e;
    if (detail::whitespace_clean(text, b, e)) {
        text.resize(e);
        if (b) text.erase(0, b);
        return std::move(text);
    }
    return fix_whitespace(std::string_view(text));
}

inline std::string fix_whitespace(const char* text) {
    return fix_whitespace(std::string_view(text));
}

// Removes wiki-style [[link|display]] and {{template}} spans; Markdown
// markers are untouched. Unbalanced spans are stripped to end of line and
// counted as warnings.
inline std::string strip_markup(std::string_view text, size_t* warnings = nullptr);

namespace detail {

inline std::string strip_markup_pass(std::string_view text, size_t& warn) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0, n = text.size();
    auto starts = [&](size_t pos, char a, char b) {
        return pos + 1 < n && text[pos] == a && text[pos + 1] == b;
    };
    while (i < n) {
        if (starts(i, '[', '[')) {
            size_t depth = 1, j = i + 2;
            size_t pipe = std::string::npos;
            while (j < n && text[j] != '\n' && depth > 0) {
                if (starts(j, '[', '[')) { depth++; j += 2; continue; }
                if (starts(j, ']', ']')) { depth--; j += 2; continue; }
                if (text[j] == '|' && depth == 1) pipe = j;
                ++j;
            }
            if (depth == 0) {
                size_t body_end = j - 2;
                size_t body_start = pipe == std::string::npos ? i + 2 : pipe + 1;
                out.append(text.substr(body_start, body_end - body_start));
            } else {
                ++warn;  // unbalanced: drop to end of line
            }
            i = j;
            continue;
        }
        if (starts(i, '{', '{')) {
            size_t depth = 1, j = i + 2;
            while (j < n && text[j] != '\n' && depth > 0) {
                if (starts(j, '{', '{')) { depth++; j += 2; continue; }
                if (starts(j, '}', '}')) { depth--; j += 2; continue; }
                ++j;
            }
            if (depth != 0) ++warn;
            i = j;
            continue;
        }
        out.push_back(text[i++]);
    }
    return out;
}

}  // namespace detail

inline std::string strip_markup(std::string_view text, size_t* warnings) {
    // Display text of a link may itself contain markup; iterate to a fixpoint.
    size_t warn = 0;
    std::string cur(text);
    for (;;) {
        std::string next = detail::strip_markup_pass(cur, warn);
        if (next == cur) break;
        cur = std::move(next);
    }
    if (warnings) *warnings = warn;
    return cur;
}

}  // namespace corpuskit::formatting
