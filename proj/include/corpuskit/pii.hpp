#pragma once

// PII detection and replacement for the six categories: email, phone, IPv4,
// credit card, IBAN, URL. Numbers are checksum-validated (Luhn, mod-97) to
// keep false positives off historical numeric text. Replacements default to
// the generic values table and are themselves detected, so redaction is a
// fixpoint.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corpuskit::pii {

enum class Category : uint8_t { Email, Phone, Ip, CreditCard, Iban, Url };

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Email, Category::Phone, Category::Ip,
    Category::CreditCard, Category::Iban, Category::Url};

inline const char* category_name(Category c) {
    switch (c) {
        case Category::Email: return "email";
        case Category::Phone: return "phone";
        case Category::Ip: return "ip";
        case Category::CreditCard: return "credit_card";
        case Category::Iban: return "iban";
        case Category::Url: return "url";
    }
    return "email";
}

// Overlap tie-break priority; lower wins.
inline int category_priority(Category c) {
    switch (c) {
        case Category::Url: return 0;
        case Category::Email: return 1;
        case Category::Iban: return 2;
        case Category::CreditCard: return 3;
        case Category::Phone: return 4;
        case Category::Ip: return 5;
    }
    return 6;
}

struct ReplacementTable {
    std::array<std::string, 6> values;

    static ReplacementTable defaults() {
        ReplacementTable t;
        t.values[static_cast<size_t>(Category::Email)] = "name@beispiel.de";
        t.values[static_cast<size_t>(Category::Phone)] = "+49 123 45678910";
        t.values[static_cast<size_t>(Category::Ip)] = "192.0.2.255";
        t.values[static_cast<size_t>(Category::CreditCard)] = "4242 4242 4242 4242";
        t.values[static_cast<size_t>(Category::Iban)] = "DE02 1203 0000 0000 2020 51";
        t.values[static_cast<size_t>(Category::Url)] = "https://www.beispiel.de";
        return t;
    }

    const std::string& value(Category c) const { return values[static_cast<size_t>(c)]; }
};

struct PiiSpan {
    Category category;
    size_t begin;
    size_t end;  // byte offsets, exclusive
};

// --- validators --------------------------------------------------------------

inline bool luhn_valid(std::string_view digits) {
    int sum = 0;
    bool dbl = false;
    for (size_t i = digits.size(); i-- > 0;) {
        int d = digits[i] - '0';
        if (dbl) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        dbl = !dbl;
    }
    return sum % 10 == 0;
}

// compact = IBAN with spaces removed, uppercase letters
inline bool iban_mod97_valid(std::string_view compact) {
    if (compact.size() < 5) return false;
    // rearrange: body + first four chars, letters as two-digit values
    uint64_t rem = 0;
    auto feed = [&rem](char c) {
        if (c >= 'A' && c <= 'Z') {
            int v = c - 'A' + 10;
            rem = (rem * 10 + static_cast<uint64_t>(v / 10)) % 97;
            rem = (rem * 10 + static_cast<uint64_t>(v % 10)) % 97;
        } else {
            rem = (rem * 10 + static_cast<uint64_t>(c - '0')) % 97;
        }
    };
    for (size_t i = 4; i < compact.size(); ++i) feed(compact[i]);
    for (size_t i = 0; i < 4; ++i) feed(compact[i]);
    return rem == 1;
}

inline int iban_country_length(char a, char b) {
    static const std::unordered_map<uint16_t, int>* table = [] {
        auto* t = new std::unordered_map<uint16_t, int>;
        auto put = [t](const char* cc, int len) {
            (*t)[static_cast<uint16_t>((cc[0] << 8) | cc[1])] = len;
        };
        put("AT", 20); put("BE", 16); put("BG", 22); put("CH", 21); put("CZ", 24);
        put("DE", 22); put("DK", 18); put("EE", 20); put("ES", 24); put("FI", 18);
        put("FR", 27); put("GB", 22); put("GR", 27); put("HR", 21); put("HU", 28);
        put("IE", 22); put("IT", 27); put("LI", 21); put("LT", 20); put("LU", 20);
        put("LV", 21); put("NL", 18); put("NO", 15); put("PL", 28); put("PT", 25);
        put("RO", 24); put("SE", 24); put("SI", 19); put("SK", 24);
        return t;
    }();
    auto it = table->find(static_cast<uint16_t>((a << 8) | b));
    return it == table->end() ? 0 : it->second;
}

// --- detection ----------------------------------------------------------------

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }

inline bool email_local_char(char c) {
    return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
inline bool email_domain_char(char c) { return is_alnum(c) || c == '.' || c == '-'; }

inline void detect_emails(std::string_view t, std::vector<PiiSpan>& out) {
    for (size_t at = t.find('@'); at != std::string_view::npos; at = t.find('@', at + 1)) {
        size_t lb = at;
        while (lb > 0 && email_local_char(t[lb - 1])) --lb;
        size_t re = at + 1;
        while (re < t.size() && email_domain_char(t[re])) ++re;
        while (re > at + 1 && (t[re - 1] == '.' || t[re - 1] == '-')) --re;
        if (lb == at || re == at + 1) continue;
        // domain needs a dot and an alphabetic TLD of length >= 2
        std::string_view domain = t.substr(at + 1, re - at - 1);
        size_t dot = domain.rfind('.');
        if (dot == std::string_view::npos || dot + 3 > domain.size()) continue;
        bool tld_ok = true;
        for (size_t i = dot + 1; i < domain.size(); ++i)
            if (!is_alpha(domain[i])) tld_ok = false;
        if (!tld_ok) continue;
        out.push_back({Category::Email, lb, re});
    }
}

inline void detect_urls(std::string_view t, std::vector<PiiSpan>& out) {
    auto emit = [&](size_t start) {
        size_t e = start;
        while (e < t.size()) {
            unsigned char c = static_cast<unsigned char>(t[e]);
            if (c <= ' ' || c == '"' || c == '<' || c == '>') break;
            ++e;
        }
        while (e > start) {
            char c = t[e - 1];
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
                c == ')' || c == ']' || c == '}' || c == '\'' || c == '"')
                --e;
            else
                break;
        }
        if (t.substr(start, e - start).find('.') == std::string_view::npos) return;
        if (e > start) out.push_back({Category::Url, start, e});
    };
    for (const std::string_view scheme : {"https://", "http://", "ftp://"}) {
        for (size_t p = t.find(scheme); p != std::string_view::npos;
             p = t.find(scheme, p + 1))
            emit(p);
    }
    for (size_t p = t.find("www."); p != std::string_view::npos; p = t.find("www.", p + 1)) {
        if (p > 0 && (is_alnum(t[p - 1]) || t[p - 1] == '.' || t[p - 1] == '/')) continue;
        if (p + 4 < t.size() && is_alnum(t[p + 4])) emit(p);
    }
}

// The numeric detectors iterate precollected trigger positions instead of
// rescanning the whole text; `resume` mirrors the i = end skips of a plain
// loop, so the matches are identical.
inline void detect_ips(std::string_view t, const std::vector<uint32_t>& starts,
                       std::vector<PiiSpan>& out) {
    size_t resume = 0;
    for (uint32_t start : starts) {
        size_t i = start;
        if (i < resume) continue;
        if (i > 0 && (is_alnum(t[i - 1]) || t[i - 1] == '.')) continue;
        size_t p = i;
        bool ok = true;
        for (int octet = 0; octet < 4 && ok; ++octet) {
            size_t d = p;
            int val = 0;
            while (d < t.size() && is_digit(t[d]) && d - p < 3) val = val * 10 + (t[d++] - '0');
            if (d == p || val > 255) {
                ok = false;
                break;
            }
            p = d;
            if (octet < 3) {
                if (p < t.size() && t[p] == '.') ++p;
                else ok = false;
            }
        }
        if (!ok) continue;
        // reject when more address-like material follows ("1.2.3.4.5"), but a
        // sentence-final period is fine
        if (p < t.size() &&
            (is_alnum(t[p]) || (t[p] == '.' && p + 1 < t.size() && is_alnum(t[p + 1]))))
            continue;
        out.push_back({Category::Ip, i, p});
        resume = p + 1;
    }
}

// Phone numbers: start with '+', '0', or '(', then digits with space, dash,
// slash, or parenthesis separators; 7-15 digits total.
inline void detect_phones(std::string_view t, const std::vector<uint32_t>& starts,
                          std::vector<PiiSpan>& out) {
    auto is_sep = [](char c) {
        return c == ' ' || c == '-' || c == '/' || c == '(' || c == ')';
    };
    size_t resume = 0;
    for (uint32_t start : starts) {
        size_t i = start;
        if (i < resume) continue;
        char c = t[i];
        if (i > 0 && (is_alnum(t[i - 1]) || t[i - 1] == '+')) continue;
        size_t p = i + (c == '+' ? 1 : 0);
        size_t digits = 0, end = p;
        size_t j = p;
        while (j < t.size() && (is_digit(t[j]) || is_sep(t[j]))) {
            if (is_digit(t[j])) {
                ++digits;
                end = j + 1;
            } else if (t[j] == ' ' && j > p && t[j - 1] == ' ') {
                break;  // at most one space between groups
            }
            ++j;
        }
        if (digits < 7 || digits > 15) continue;
        if (end < t.size() && is_alpha(t[end])) continue;
        out.push_back({Category::Phone, i, end});
        resume = end + 1;
    }
}

// Credit cards: 13-19 digits in space- or dash-separated groups, Luhn-valid.
inline void detect_cards(std::string_view t, const std::vector<uint32_t>& starts,
                         std::vector<PiiSpan>& out) {
    size_t resume = 0;
    for (uint32_t start : starts) {
        size_t i = start;
        if (i < resume) continue;
        if (i > 0 && (is_alnum(t[i - 1]) || t[i - 1] == '.' || t[i - 1] == '+')) continue;
        char digits[19];  // groups past the card maximum only need the count
        size_t ndigits = 0;
        size_t j = i, end = i;
        while (j < t.size()) {
            if (is_digit(t[j])) {
                if (ndigits < sizeof(digits)) digits[ndigits] = t[j];
                ++ndigits;
                end = ++j;
            } else if ((t[j] == ' ' || t[j] == '-') && j + 1 < t.size() && is_digit(t[j + 1]) &&
                       j > i && is_digit(t[j - 1])) {
                ++j;
            } else {
                break;
            }
        }
        if (ndigits >= 13 && ndigits <= 19 &&
            !(end < t.size() && (is_alnum(t[end]) || t[end] == '.')) &&
            luhn_valid(std::string_view(digits, ndigits))) {
            out.push_back({Category::CreditCard, i, end});
        }
        resume = end + 1;
    }
}

inline void detect_ibans(std::string_view t, const std::vector<uint32_t>& starts,
                         std::vector<PiiSpan>& out) {
    size_t resume = 0;
    for (uint32_t start : starts) {
        size_t i = start;
        if (i < resume || i + 4 > t.size()) continue;
        if (!(t[i + 1] >= 'A' && t[i + 1] <= 'Z')) continue;
        if (!is_digit(t[i + 2]) || !is_digit(t[i + 3])) continue;
        if (i > 0 && is_alnum(t[i - 1])) continue;
        int want = iban_country_length(t[i], t[i + 1]);
        if (want == 0) continue;
        std::string compact;
        size_t j = i, end = i;
        while (j < t.size() && static_cast<int>(compact.size()) < want) {
            char c = t[j];
            if (is_digit(c) || (c >= 'A' && c <= 'Z')) {
                compact.push_back(c);
                end = ++j;
            } else if (c == ' ' && j > i && is_alnum(t[j - 1]) && j + 1 < t.size() &&
                       is_alnum(t[j + 1])) {
                ++j;
            } else {
                break;
            }
        }
        if (static_cast<int>(compact.size()) != want) continue;
        if (end < t.size() && is_alnum(t[end])) continue;
        if (!iban_mod97_valid(compact)) continue;
        out.push_back({Category::Iban, i, end});
        resume = end + 1;
    }
}

}  // namespace detail

// Non-overlapping spans in text order; overlaps resolved longest-match-first,
// ties by category priority.
inline std::vector<PiiSpan> detect(std::string_view text) {
    std::vector<PiiSpan> cand;
    // one trigger-collection pass; the detectors then only visit candidates
    static thread_local std::vector<uint32_t> digit_pos, phone_pos, upper_pos;
    digit_pos.clear();
    phone_pos.clear();
    upper_pos.clear();
    bool has_at = false, has_colon_slash = false, has_www = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (detail::is_digit(c)) {
            digit_pos.push_back(static_cast<uint32_t>(i));
            if (c == '0') phone_pos.push_back(static_cast<uint32_t>(i));
        } else if (c == '+' || c == '(') {
            phone_pos.push_back(static_cast<uint32_t>(i));
        } else if (c >= 'A' && c <= 'Z') {
            upper_pos.push_back(static_cast<uint32_t>(i));
        } else if (c == '@') {
            has_at = true;
        } else if (c == '/' && i > 0 && text[i - 1] == ':') {
            has_colon_slash = true;
        } else if (c == '.' && i >= 3 && text.compare(i - 3, 4, "www.") == 0) {
            has_www = true;
        }
    }
    if (has_at) detail::detect_emails(text, cand);
    if (has_colon_slash || has_www) detail::detect_urls(text, cand);
    if (!digit_pos.empty()) {
        detail::detect_ips(text, digit_pos, cand);
        detail::detect_phones(text, phone_pos, cand);
        detail::detect_cards(text, digit_pos, cand);
        detail::detect_ibans(text, upper_pos, cand);
    }
    if (cand.empty()) return cand;
    std::sort(cand.begin(), cand.end(), [](const PiiSpan& a, const PiiSpan& b) {
        size_t la = a.end - a.begin, lb = b.end - b.begin;
        if (la != lb) return la > lb;
        int pa = category_priority(a.category), pb = category_priority(b.category);
        if (pa != pb) return pa < pb;
        return a.begin < b.begin;
    });
    std::vector<PiiSpan> chosen;
    for (const auto& c : cand) {
        bool clash = false;
        for (const auto& k : chosen)
            if (c.begin < k.end && k.begin < c.end) {
                clash = true;
                break;
            }
        if (!clash) chosen.push_back(c);
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const PiiSpan& a, const PiiSpan& b) { return a.begin < b.begin; });
    return chosen;
}

struct RedactionResult {
    std::string text;
    std::array<uint64_t, 6> counts{};

    uint64_t count(Category c) const { return counts[static_cast<size_t>(c)]; }
    uint64_t total() const {
        uint64_t t = 0;
        for (uint64_t c : counts) t += c;
        return t;
    }
};

inline RedactionResult redact(std::string_view text,
                              const ReplacementTable& table = ReplacementTable::defaults()) {
    RedactionResult r;
    auto spans = detect(text);
    if (spans.empty()) {
        r.text = std::string(text);
        return r;
    }
    r.text.reserve(text.size());
    size_t pos = 0;
    for (const auto& s : spans) {
        r.text.append(text.substr(pos, s.begin - pos));
        const std::string& repl = table.value(s.category);
        // skip no-op replacements so counts reflect actual changes on re-runs
        if (text.substr(s.begin, s.end - s.begin) != repl)
            ++r.counts[static_cast<size_t>(s.category)];
        r.text.append(repl);
        pos = s.end;
    }
    r.text.append(text.substr(pos));
    return r;
}

}  // namespace corpuskit::pii
