#pragma once

// The 30 quality metrics and their exclusion thresholds.
//
// Conventions (fixed here, mirrored by the brute-force oracle in tests):
//  - word  = maximal run of non-whitespace scalars
//  - line  = '\n'-separated, blank lines ignored for line metrics
//  - paragraph = maximal block of consecutive non-blank lines
//  - n-grams are over words; a "character fraction" counts each covered
//    scalar position once, relative to the total scalar count of the text
//  - duplicated = occurrences after the first; the top n-gram is the most
//    frequent one (earliest first occurrence wins ties) and counts only
//    when it occurs at least twice

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/stopwords.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit::quality {

struct QualityMetrics {
    double alphabetic_word_ratio = 0;
    double bullet_line_ratio = 0;
    double ellipsis_line_ratio = 0;
    double ellipsis_ratio = 0;
    double hash_ratio = 0;
    uint64_t stopword_count = 0;
    double dup_line_fraction = 0;
    double dup_line_char_fraction = 0;
    double dup_para_fraction = 0;
    double dup_para_char_fraction = 0;
    std::array<double, 6> dup_ngram_char_fraction{};  // n = 5..10
    std::array<double, 3> top_ngram_char_fraction{};  // n = 2..4
    double spacing_anomaly_ratio = 0;
    double case_anomaly_ratio = 0;
    double word_fragment_ratio = 0;
    double line_artifact_ratio = 0;
    double special_char_density = 0;
    double repeated_char_ratio = 0;
    double numeric_context_errors = 0;
    double avg_word_length = 0;
    double word_length_std = 0;
    double very_short_word_ratio = 0;
    double very_long_word_ratio = 0;
};

struct QualityThresholds {
    double max_alphabetic_word_ratio = 0.99;
    double max_bullet_line_ratio = 0.70;
    double max_ellipsis_line_ratio = 0.30;
    double max_ellipsis_ratio = 0.10;
    double max_hash_ratio = 0.10;
    double min_stopword_count = 6.00;
    double max_dup_line_fraction = 0.25;
    double max_dup_line_char_fraction = 0.15;
    double max_dup_para_fraction = 0.30;
    double max_dup_para_char_fraction = 0.20;
    std::array<double, 6> max_dup_ngram_char_fraction = {0.39, 0.39, 0.38, 0.38, 0.37, 0.37};
    std::array<double, 3> max_top_ngram_char_fraction = {0.07, 0.10, 0.13};
    double max_spacing_anomaly_ratio = 0.15;
    double max_case_anomaly_ratio = 0.10;
    double max_word_fragment_ratio = 0.20;
    double max_line_artifact_ratio = 0.25;
    double max_special_char_density = 0.03;
    double max_repeated_char_ratio = 0.05;
    double max_numeric_context_errors = 0.08;
    double min_avg_word_length = 4.80;
    double max_avg_word_length = 7.30;
    double min_word_length_std = 1.00;
    double max_word_length_std = 5.00;
    double max_very_short_word_ratio = 0.10;
    double max_very_long_word_ratio = 0.10;
};

// Table-driven view of every exclusion rule: metric name, direction, bound.
enum class Direction : uint8_t { ExcludeIfGreater, ExcludeIfLess };

struct Rule {
    std::string name;
    Direction direction;
    double bound;
    std::function<double(const QualityMetrics&)> value;
};

inline std::vector<Rule> threshold_rules(const QualityThresholds& t) {
    std::vector<Rule> r;
    auto gt = [&](std::string name, double bound, auto get) {
        r.push_back({std::move(name), Direction::ExcludeIfGreater, bound,
                     [get](const QualityMetrics& m) { return get(m); }});
    };
    auto lt = [&](std::string name, double bound, auto get) {
        r.push_back({std::move(name), Direction::ExcludeIfLess, bound,
                     [get](const QualityMetrics& m) { return get(m); }});
    };
    gt("alphabetic_word_ratio", t.max_alphabetic_word_ratio,
       [](const QualityMetrics& m) { return m.alphabetic_word_ratio; });
    gt("bullet_line_ratio", t.max_bullet_line_ratio,
       [](const QualityMetrics& m) { return m.bullet_line_ratio; });
    gt("ellipsis_line_ratio", t.max_ellipsis_line_ratio,
       [](const QualityMetrics& m) { return m.ellipsis_line_ratio; });
    gt("ellipsis_ratio", t.max_ellipsis_ratio,
       [](const QualityMetrics& m) { return m.ellipsis_ratio; });
    gt("hash_ratio", t.max_hash_ratio, [](const QualityMetrics& m) { return m.hash_ratio; });
    lt("stopword_count", t.min_stopword_count,
       [](const QualityMetrics& m) { return static_cast<double>(m.stopword_count); });
    gt("dup_line_fraction", t.max_dup_line_fraction,
       [](const QualityMetrics& m) { return m.dup_line_fraction; });
    gt("dup_line_char_fraction", t.max_dup_line_char_fraction,
       [](const QualityMetrics& m) { return m.dup_line_char_fraction; });
    gt("dup_para_fraction", t.max_dup_para_fraction,
       [](const QualityMetrics& m) { return m.dup_para_fraction; });
    gt("dup_para_char_fraction", t.max_dup_para_char_fraction,
       [](const QualityMetrics& m) { return m.dup_para_char_fraction; });
    for (int n = 5; n <= 10; ++n) {
        size_t idx = static_cast<size_t>(n - 5);
        gt("dup_" + std::to_string(n) + "gram_char_fraction", t.max_dup_ngram_char_fraction[idx],
           [idx](const QualityMetrics& m) { return m.dup_ngram_char_fraction[idx]; });
    }
    for (int n = 2; n <= 4; ++n) {
        size_t idx = static_cast<size_t>(n - 2);
        gt("top_" + std::to_string(n) + "gram_char_fraction", t.max_top_ngram_char_fraction[idx],
           [idx](const QualityMetrics& m) { return m.top_ngram_char_fraction[idx]; });
    }
    gt("spacing_anomaly_ratio", t.max_spacing_anomaly_ratio,
       [](const QualityMetrics& m) { return m.spacing_anomaly_ratio; });
    gt("case_anomaly_ratio", t.max_case_anomaly_ratio,
       [](const QualityMetrics& m) { return m.case_anomaly_ratio; });
    gt("word_fragment_ratio", t.max_word_fragment_ratio,
       [](const QualityMetrics& m) { return m.word_fragment_ratio; });
    gt("line_artifact_ratio", t.max_line_artifact_ratio,
       [](const QualityMetrics& m) { return m.line_artifact_ratio; });
    gt("special_char_density", t.max_special_char_density,
       [](const QualityMetrics& m) { return m.special_char_density; });
    gt("repeated_char_ratio", t.max_repeated_char_ratio,
       [](const QualityMetrics& m) { return m.repeated_char_ratio; });
    gt("numeric_context_errors", t.max_numeric_context_errors,
       [](const QualityMetrics& m) { return m.numeric_context_errors; });
    lt("avg_word_length_min", t.min_avg_word_length,
       [](const QualityMetrics& m) { return m.avg_word_length; });
    gt("avg_word_length_max", t.max_avg_word_length,
       [](const QualityMetrics& m) { return m.avg_word_length; });
    lt("word_length_std_min", t.min_word_length_std,
       [](const QualityMetrics& m) { return m.word_length_std; });
    gt("word_length_std_max", t.max_word_length_std,
       [](const QualityMetrics& m) { return m.word_length_std; });
    gt("very_short_word_ratio", t.max_very_short_word_ratio,
       [](const QualityMetrics& m) { return m.very_short_word_ratio; });
    gt("very_long_word_ratio", t.max_very_long_word_ratio,
       [](const QualityMetrics& m) { return m.very_long_word_ratio; });
    return r;
}

struct Verdict {
    bool keep = true;
    std::vector<std::string> violations;
};

// Direct checks in threshold_rules order; building the rule table per call
// costs 32 small allocations, which adds up at one evaluate per document.
inline Verdict evaluate(const QualityMetrics& m, const QualityThresholds& t) {
    Verdict v;
    auto gt = [&v](const char* name, double x, double bound) {
        if (x > bound) v.violations.push_back(name);
    };
    auto lt = [&v](const char* name, double x, double bound) {
        if (x < bound) v.violations.push_back(name);
    };
    gt("alphabetic_word_ratio", m.alphabetic_word_ratio, t.max_alphabetic_word_ratio);
    gt("bullet_line_ratio", m.bullet_line_ratio, t.max_bullet_line_ratio);
    gt("ellipsis_line_ratio", m.ellipsis_line_ratio, t.max_ellipsis_line_ratio);
    gt("ellipsis_ratio", m.ellipsis_ratio, t.max_ellipsis_ratio);
    gt("hash_ratio", m.hash_ratio, t.max_hash_ratio);
    lt("stopword_count", static_cast<double>(m.stopword_count), t.min_stopword_count);
    gt("dup_line_fraction", m.dup_line_fraction, t.max_dup_line_fraction);
    gt("dup_line_char_fraction", m.dup_line_char_fraction, t.max_dup_line_char_fraction);
    gt("dup_para_fraction", m.dup_para_fraction, t.max_dup_para_fraction);
    gt("dup_para_char_fraction", m.dup_para_char_fraction, t.max_dup_para_char_fraction);
    static const char* dup_names[6] = {
        "dup_5gram_char_fraction",  "dup_6gram_char_fraction", "dup_7gram_char_fraction",
        "dup_8gram_char_fraction",  "dup_9gram_char_fraction", "dup_10gram_char_fraction"};
    for (size_t i = 0; i < 6; ++i)
        gt(dup_names[i], m.dup_ngram_char_fraction[i], t.max_dup_ngram_char_fraction[i]);
    static const char* top_names[3] = {"top_2gram_char_fraction", "top_3gram_char_fraction",
                                       "top_4gram_char_fraction"};
    for (size_t i = 0; i < 3; ++i)
        gt(top_names[i], m.top_ngram_char_fraction[i], t.max_top_ngram_char_fraction[i]);
    gt("spacing_anomaly_ratio", m.spacing_anomaly_ratio, t.max_spacing_anomaly_ratio);
    gt("case_anomaly_ratio", m.case_anomaly_ratio, t.max_case_anomaly_ratio);
    gt("word_fragment_ratio", m.word_fragment_ratio, t.max_word_fragment_ratio);
    gt("line_artifact_ratio", m.line_artifact_ratio, t.max_line_artifact_ratio);
    gt("special_char_density", m.special_char_density, t.max_special_char_density);
    gt("repeated_char_ratio", m.repeated_char_ratio, t.max_repeated_char_ratio);
    gt("numeric_context_errors", m.numeric_context_errors, t.max_numeric_context_errors);
    lt("avg_word_length_min", m.avg_word_length, t.min_avg_word_length);
    gt("avg_word_length_max", m.avg_word_length, t.max_avg_word_length);
    lt("word_length_std_min", m.word_length_std, t.min_word_length_std);
    gt("word_length_std_max", m.word_length_std, t.max_word_length_std);
    gt("very_short_word_ratio", m.very_short_word_ratio, t.max_very_short_word_ratio);
    gt("very_long_word_ratio", m.very_long_word_ratio, t.max_very_long_word_ratio);
    v.keep = v.violations.empty();
    return v;
}

namespace detail {

// Open-addressing counter keyed by 64-bit n-gram hashes; reused across the
// n-gram families for speed. Key, count and first position live in one slot
// so a probe touches a single cache line.
class NgramCounter {
public:
    void reset(size_t expected) {
        size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        if (slots_.size() < cap) {
            slots_.assign(cap, Slot{kEmpty, 0, 0});
        } else if (used_.size() * 4 < slots_.size()) {
            // sparse previous use: clear only the touched slots
            for (size_t u : used_) slots_[u].key = kEmpty;
        } else {
            for (auto& s : slots_) s.key = kEmpty;
        }
        used_.clear();
        mask_ = slots_.size() - 1;
    }

    // Returns the count after insertion.
    uint32_t add(uint64_t key, uint32_t pos) {
        size_t i = probe(key, pos);
        return slots_[i].count;
    }

    // Like add, but returns the slot so callers can read the final count
    // later without re-probing.
    uint32_t add_slot(uint64_t key, uint32_t pos) {
        return static_cast<uint32_t>(probe(key, pos));
    }

    uint32_t count_at(uint32_t slot) const { return slots_[slot].count; }
    uint32_t first_at(uint32_t slot) const { return slots_[slot].first; }

    uint32_t count(uint64_t key) const {
        size_t i = (key * 0x9E3779B97F4A7C15ULL) & mask_;
        for (;;) {
            if (slots_[i].key == kEmpty) return 0;
            if (slots_[i].key == key) return slots_[i].count;
            i = (i + 1) & mask_;
        }
    }

    uint32_t first(uint64_t key) const {
        size_t i = (key * 0x9E3779B97F4A7C15ULL) & mask_;
        for (;;) {
            if (slots_[i].key == key) return slots_[i].first;
            i = (i + 1) & mask_;
        }
    }

private:
    struct Slot {
        uint64_t key;
        uint32_t count;
        uint32_t first;
    };

    size_t probe(uint64_t key, uint32_t pos) {
        size_t i = (key * 0x9E3779B97F4A7C15ULL) & mask_;
        for (;;) {
            if (slots_[i].key == kEmpty) {
                slots_[i] = {key, 1, pos};
                used_.push_back(i);
                return i;
            }
            if (slots_[i].key == key) {
                ++slots_[i].count;
                return i;
            }
            i = (i + 1) & mask_;
        }
    }

    static constexpr uint64_t kEmpty = ~0ULL;
    std::vector<Slot> slots_;
    std::vector<size_t> used_;
    size_t mask_ = 0;
};

using unicode::char_flags;
using unicode::kFlagDigit;
using unicode::kFlagLetter;
using unicode::kFlagLower;
using unicode::kFlagPunct;
using unicode::kFlagSpace;
using unicode::kFlagUpper;

inline uint64_t hash_span(const char32_t* p, size_t n) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<uint64_t>(p[i]);
        h *= 0x100000001b3ULL;
    }
    return h == ~0ULL ? 0 : h;
}

struct Span {
    uint32_t begin;
    uint32_t end;  // exclusive, scalar indices
    uint32_t len() const { return end - begin; }
};

}  // namespace detail

inline QualityMetrics compute_metrics(std::string_view text) {
    QualityMetrics m;
    std::u32string cps = unicode::decode_utf8(text).codepoints;
    const size_t total = cps.size();
    if (total == 0) return m;

    // --- words, split and scanned in one pass ------------------------------
    // one char_class fetch per scalar feeds every per-char predicate; the
    // lowered form goes into a stack buffer so the stopword probe does not
    // allocate
    // scratch reused across calls; compute_metrics runs per document and
    // fresh vectors each time would dominate short texts
    static thread_local std::vector<detail::Span> words;
    static thread_local std::vector<uint64_t> word_hashes;  // hash_span of each word
    static thread_local std::vector<uint8_t> is_single_letter;
    words.clear();
    words.reserve(total / 5 + 4);
    word_hashes.clear();
    word_hashes.reserve(total / 5 + 4);
    is_single_letter.clear();
    is_single_letter.reserve(total / 5 + 4);
    uint64_t alpha_words = 0, stopwords = 0, hash_chars = 0;
    uint64_t glued = 0, case_anomalies = 0, fragments = 0, numeric_errors = 0;
    uint64_t very_short = 0, very_long = 0;
    uint64_t len_sum = 0, len_sq_sum = 0;
    {
        const size_t max_stop = max_german_stopword_length();
        char lbuf[64];
        size_t i = 0;
        while (i < total) {
            while (i < total && unicode::is_space(cps[i])) ++i;
            if (i >= total) break;
            const size_t start = i;
            bool all_alpha = true;
            bool lower_upper = false;   // interior upper preceded by lower
            bool glue_pattern = false;  // lower{2,} Upper lower{2,}
            bool letter_digit = false, digit_letter = false;
            size_t lower_run = 0;
            size_t letters = 0;
            char32_t only_letter = 0;
            size_t first_nonpunct = total, last_nonpunct = total;
            size_t llen = 0;
            bool loverflow = false;
            uint8_t prev_flags = 0;
            uint64_t wh = 0xcbf29ce484222325ULL;  // FNV over the word, same as hash_span
            while (i < total) {
                char32_t c = cps[i];
                uint8_t f = detail::char_flags(c);
                if (f & detail::kFlagSpace) break;  // space ends the word
                // runs of lowercase letters are the bulk of prose; none of
                // the anomaly transitions can fire inside one, so handle the
                // whole run with just the hash/lowered-buffer updates
                if (f == (detail::kFlagLetter | detail::kFlagLower)) {
                    if (i > start && (prev_flags & detail::kFlagDigit)) digit_letter = true;
                    if (first_nonpunct == total) first_nonpunct = i;
                    const size_t run_begin = i;
                    do {
                        wh ^= static_cast<uint64_t>(c);
                        wh *= 0x100000001b3ULL;
                        if (llen + 4 <= sizeof(lbuf)) {
                            // already lowercase, so no case mapping needed
                            if (c < 0x80) {
                                lbuf[llen++] = static_cast<char>(c);
                            } else if (c < 0x800) {
                                lbuf[llen++] = static_cast<char>(0xC0 | (c >> 6));
                                lbuf[llen++] = static_cast<char>(0x80 | (c & 0x3F));
                            } else if (c < 0x10000) {
                                lbuf[llen++] = static_cast<char>(0xE0 | (c >> 12));
                                lbuf[llen++] = static_cast<char>(0x80 | ((c >> 6) & 0x3F));
                                lbuf[llen++] = static_cast<char>(0x80 | (c & 0x3F));
                            } else {
                                lbuf[llen++] = static_cast<char>(0xF0 | (c >> 18));
                                lbuf[llen++] = static_cast<char>(0x80 | ((c >> 12) & 0x3F));
                                lbuf[llen++] = static_cast<char>(0x80 | ((c >> 6) & 0x3F));
                                lbuf[llen++] = static_cast<char>(0x80 | (c & 0x3F));
                            }
                        } else {
                            loverflow = true;
                        }
                        ++i;
                        if (i >= total) break;
                        c = cps[i];
                        f = detail::char_flags(c);
                    } while (f == (detail::kFlagLetter | detail::kFlagLower));
                    letters += i - run_begin;
                    lower_run += i - run_begin;
                    only_letter = cps[i - 1];
                    last_nonpunct = i - 1;
                    prev_flags = detail::kFlagLetter | detail::kFlagLower;
                    if (i >= total || (f & detail::kFlagSpace)) break;
                    continue;  // current char is not a lowercase letter
                }
                wh ^= static_cast<uint64_t>(c);
                wh *= 0x100000001b3ULL;
                if (!(f & detail::kFlagLetter)) all_alpha = false;
                if (c == '#') ++hash_chars;
                if (i > start) {
                    if ((prev_flags & detail::kFlagLower) && (f & detail::kFlagUpper)) {
                        lower_upper = true;
                        // glue shape: lower{2,} Upper lower{2,}; lowercase
                        // letters are never spaces, so in-word is implied
                        if (lower_run >= 2 && i + 2 < total && unicode::is_lower(cps[i + 1]) &&
                            unicode::is_lower(cps[i + 2]))
                            glue_pattern = true;
                    }
                    if ((prev_flags & detail::kFlagLetter) && (f & detail::kFlagDigit))
                        letter_digit = true;
                    if ((prev_flags & detail::kFlagDigit) && (f & detail::kFlagLetter))
                        digit_letter = true;
                }
                lower_run = (f & detail::kFlagLower) ? lower_run + 1 : 0;
                if (f & detail::kFlagLetter) {
                    ++letters;
                    only_letter = c;
                }
                if (!(f & detail::kFlagPunct)) {
                    if (first_nonpunct == total) first_nonpunct = i;
                    last_nonpunct = i;
                    if (llen + 4 <= sizeof(lbuf)) {
                        char32_t lc = unicode::to_lower(c);
                        if (lc < 0x80) {
                            lbuf[llen++] = static_cast<char>(lc);
                        } else if (lc < 0x800) {
                            lbuf[llen++] = static_cast<char>(0xC0 | (lc >> 6));
                            lbuf[llen++] = static_cast<char>(0x80 | (lc & 0x3F));
                        } else if (lc < 0x10000) {
                            lbuf[llen++] = static_cast<char>(0xE0 | (lc >> 12));
                            lbuf[llen++] = static_cast<char>(0x80 | ((lc >> 6) & 0x3F));
                            lbuf[llen++] = static_cast<char>(0x80 | (lc & 0x3F));
                        } else {
                            lbuf[llen++] = static_cast<char>(0xF0 | (lc >> 18));
                            lbuf[llen++] = static_cast<char>(0x80 | ((lc >> 12) & 0x3F));
                            lbuf[llen++] = static_cast<char>(0x80 | ((lc >> 6) & 0x3F));
                            lbuf[llen++] = static_cast<char>(0x80 | (lc & 0x3F));
                        }
                    } else {
                        loverflow = true;  // far beyond any stopword anyway
                    }
                }
                prev_flags = f;
                ++i;
            }
            const size_t end = i;
            words.push_back({static_cast<uint32_t>(start), static_cast<uint32_t>(end)});
            word_hashes.push_back(wh == ~0ULL ? 0 : wh);
            size_t stripped_len = first_nonpunct == total ? 0 : last_nonpunct - first_nonpunct + 1;
            size_t s_end = first_nonpunct == total ? end : last_nonpunct + 1;
            bool stopword = !loverflow && llen <= max_stop &&
                            is_german_stopword(std::string_view(lbuf, llen));
            uint64_t len = end - start;
            len_sum += len;
            len_sq_sum += len * len;
            if (all_alpha) ++alpha_words;
            if (stopword) ++stopwords;
            if (stripped_len <= 1) ++very_short;
            if (stripped_len >= 15) ++very_long;
            if (glue_pattern) ++glued;
            if (lower_upper && !glue_pattern) ++case_anomalies;
            if (letter_digit && digit_letter) ++numeric_errors;
            // fragments: 1-2 letter stripped words, excluding stopwords and
            // initials ("K." style)
            if (stripped_len >= 1 && stripped_len <= 2 && letters == stripped_len) {
                bool initial = stripped_len == 1 && end > s_end && cps[s_end] == '.' &&
                               unicode::is_upper(only_letter);
                if (!initial && !stopword) ++fragments;
            }
            is_single_letter.push_back(stripped_len == 1 && letters == 1 ? 1 : 0);
        }
    }
    const size_t nwords = words.size();
    // single-letter runs (>= 3 consecutive one-letter words) count as
    // spacing anomalies, in addition to glued words
    uint64_t spaced = 0;
    for (size_t w = 0; w < nwords;) {
        if (!is_single_letter[w]) { ++w; continue; }
        size_t j = w;
        while (j < nwords && is_single_letter[j]) ++j;
        if (j - w >= 3) spaced += j - w;
        w = j;
    }
    if (nwords > 0) {
        double nw = static_cast<double>(nwords);
        m.alphabetic_word_ratio = static_cast<double>(alpha_words) / nw;
        m.hash_ratio = std::min(1.0, static_cast<double>(hash_chars) / nw);
        m.spacing_anomaly_ratio = std::min(1.0, static_cast<double>(glued + spaced) / nw);
        m.case_anomaly_ratio = static_cast<double>(case_anomalies) / nw;
        m.word_fragment_ratio = static_cast<double>(fragments) / nw;
        m.numeric_context_errors = static_cast<double>(numeric_errors) / nw;
        m.very_short_word_ratio = static_cast<double>(very_short) / nw;
        m.very_long_word_ratio = static_cast<double>(very_long) / nw;
        m.avg_word_length = static_cast<double>(len_sum) / nw;
        double mean = m.avg_word_length;
        double var = static_cast<double>(len_sq_sum) / nw - mean * mean;
        m.word_length_std = std::sqrt(std::max(0.0, var));
    }
    m.stopword_count = stopwords;

    // --- lines and paragraphs ----------------------------------------------
    // one walk splits lines, detects blank lines, and accumulates the FNV
    // hashes for both the line and paragraph dup metrics; FNV is sequential,
    // so a paragraph hash continues from the first line's hash state across
    // the interior newlines (the trailing newline is excluded via ph_mark)
    static thread_local std::vector<detail::Span> real_lines;  // non-blank lines
    static thread_local std::vector<uint64_t> line_hashes;     // parallel to real_lines
    static thread_local std::vector<detail::Span> paragraphs;
    static thread_local std::vector<uint64_t> para_hashes;
    real_lines.clear();
    line_hashes.clear();
    paragraphs.clear();
    para_hashes.clear();
    {
        constexpr uint64_t kOff = 0xcbf29ce484222325ULL, kPrime = 0x100000001b3ULL;
        size_t start = 0;
        uint64_t lh = kOff;
        bool nonblank = false;
        bool open = false;
        uint64_t ph = 0, ph_mark = 0;
        uint32_t p_begin = 0, p_end = 0;
        for (size_t i = 0; i <= total; ++i) {
            if (i < total && cps[i] != '\n') {
                char32_t c = cps[i];
                lh ^= static_cast<uint64_t>(c);
                lh *= kPrime;
                if (open) {
                    ph ^= static_cast<uint64_t>(c);
                    ph *= kPrime;
                }
                if (nonblank || !unicode::is_space(c)) nonblank = true;
                continue;
            }
            // line terminator (or end of text): line is [start, i)
            if (nonblank) {
                real_lines.push_back({static_cast<uint32_t>(start), static_cast<uint32_t>(i)});
                line_hashes.push_back(lh == ~0ULL ? 0 : lh);
                if (!open) {
                    open = true;
                    p_begin = static_cast<uint32_t>(start);
                    ph = lh;  // hash over [p_begin, i) so far
                }
                ph_mark = ph;
                p_end = static_cast<uint32_t>(i);
            } else if (open) {
                paragraphs.push_back({p_begin, p_end});
                para_hashes.push_back(ph_mark == ~0ULL ? 0 : ph_mark);
                open = false;
            }
            if (open && i < total) {
                ph ^= static_cast<uint64_t>(U'\n');
                ph *= kPrime;
            }
            start = i + 1;
            lh = kOff;
            nonblank = false;
        }
        if (open) {
            paragraphs.push_back({p_begin, p_end});
            para_hashes.push_back(ph_mark == ~0ULL ? 0 : ph_mark);
        }
    }

    static thread_local detail::NgramCounter seen;
    auto dup_fractions = [&](const std::vector<detail::Span>& items,
                             const std::vector<uint64_t>& hashes, double& frac,
                             double& char_frac) {
        if (items.empty()) return;
        seen.reset(items.size());
        uint64_t dup = 0, dup_chars = 0, total_chars = 0;
        for (uint32_t i = 0; i < items.size(); ++i) {
            total_chars += items[i].len();
            if (seen.add(hashes[i], i) > 1) {
                ++dup;
                dup_chars += items[i].len();
            }
        }
        frac = static_cast<double>(dup) / static_cast<double>(items.size());
        if (total_chars > 0)
            char_frac = static_cast<double>(dup_chars) / static_cast<double>(total_chars);
    };
    dup_fractions(real_lines, line_hashes, m.dup_line_fraction, m.dup_line_char_fraction);
    dup_fractions(paragraphs, para_hashes, m.dup_para_fraction, m.dup_para_char_fraction);

    // line-shape metrics
    if (!real_lines.empty()) {
        uint64_t bullets = 0, ellipsis_lines = 0, artifacts = 0;
        for (const auto& l : real_lines) {
            char32_t first = cps[l.begin];
            if (first == 0x2022 || first == '-') ++bullets;
            if (cps[l.end - 1] == 0x2026 ||
                (l.len() >= 3 && cps[l.end - 1] == '.' && cps[l.end - 2] == '.' &&
                 cps[l.end - 3] == '.'))
                ++ellipsis_lines;
            // artifacts: lone (possibly dash-framed) page number, single
            // character, or separator run
            size_t digits = 0, seps = 0, others = 0, chars = 0;
            for (size_t i = l.begin; i < l.end; ++i) {
                char32_t c = cps[i];
                if (c == ' ') continue;
                ++chars;
                if (unicode::is_digit(c)) ++digits;
                else if (c == '-' || c == 0x2013 || c == 0x2014 || c == '_' || c == '=' ||
                         c == '*' || c == '~' || c == '.' || c == 0x00B7)
                    ++seps;
                else ++others;
                // an "other" char rules out everything except single_char,
                // and a second char rules that out too
                if (others > 0 && chars > 1) break;
            }
            bool page_number = others == 0 && digits >= 1 && digits <= 4;
            bool single_char = chars == 1;
            bool separator_run = others == 0 && digits == 0 && seps >= 3;
            if (page_number || single_char || separator_run) ++artifacts;
        }
        double nl = static_cast<double>(real_lines.size());
        m.bullet_line_ratio = static_cast<double>(bullets) / nl;
        m.ellipsis_line_ratio = static_cast<double>(ellipsis_lines) / nl;
        m.line_artifact_ratio = static_cast<double>(artifacts) / nl;
    }

    // --- character-level scans ----------------------------------------------
    {
        // collect the hit intervals of both patterns, then count their union;
        // clean text produces none, so no bitmap needed
        std::vector<std::pair<size_t, size_t>> hits;
        // runs of one scalar, length >= 4; the same walk counts special
        // chars (symbols and unclassified) and ellipses, classifying each
        // run once: a run of L dots holds L/3 non-overlapping "..." and a
        // run of L U+2026 holds L ellipses
        uint64_t special = 0, ellipses = 0;
        for (size_t i = 0; i < total;) {
            size_t j = i + 1;
            while (j < total && cps[j] == cps[i]) ++j;
            if (detail::char_flags(cps[i]) & unicode::kFlagSpecial) special += j - i;
            if (cps[i] == 0x2026) ellipses += j - i;
            else if (cps[i] == '.') ellipses += (j - i) / 3;
            if (j - i >= 4) hits.emplace_back(i, j);
            i = j;
        }
        m.special_char_density = static_cast<double>(special) / static_cast<double>(total);
        if (nwords > 0)
            m.ellipsis_ratio =
                std::min(1.0, static_cast<double>(ellipses) / static_cast<double>(nwords));
        // >= 3 consecutive repeats of one 2-gram
        for (size_t i = 0; i + 1 < total;) {
            size_t reps = 1;
            while (i + 2 * reps + 1 < total && cps[i + 2 * reps] == cps[i] &&
                   cps[i + 2 * reps + 1] == cps[i + 1])
                ++reps;
            if (reps >= 3) {
                hits.emplace_back(i, i + 2 * reps);
                i += 2 * reps;
            } else {
                ++i;
            }
        }
        uint64_t repeated = 0;
        if (!hits.empty()) {
            std::sort(hits.begin(), hits.end());
            size_t b = hits[0].first, e = hits[0].second;
            for (size_t h = 1; h < hits.size(); ++h) {
                if (hits[h].first <= e) {
                    e = std::max(e, hits[h].second);
                } else {
                    repeated += e - b;
                    b = hits[h].first;
                    e = hits[h].second;
                }
            }
            repeated += e - b;
        }
        m.repeated_char_ratio = static_cast<double>(repeated) / static_cast<double>(total);
    }

    // --- word n-gram families ------------------------------------------------
    if (nwords > 0) {
        // word identities come from the scan pass; n-gram keys are a rolling
        // polynomial over them, inserted into the counter as they roll so the
        // key sequence never needs materializing (equal slot <=> equal key)
        const std::vector<uint64_t>& word_ids = word_hashes;

        static thread_local detail::NgramCounter counter;
        static thread_local std::vector<uint32_t> slots;
        // covered-position intervals arrive sorted by begin (k increasing),
        // so their union folds up in one pass
        std::vector<std::pair<uint32_t, uint32_t>> iv;
        auto merged_length = [&iv]() {
            uint64_t cov = 0;
            if (iv.empty()) return cov;
            uint32_t b = iv[0].first, e = iv[0].second;
            for (size_t h = 1; h < iv.size(); ++h) {
                if (iv[h].first <= e) {
                    e = std::max(e, iv[h].second);
                } else {
                    cov += e - b;
                    b = iv[h].first;
                    e = iv[h].second;
                }
            }
            cov += e - b;
            return cov;
        };
        auto count_ngrams = [&](size_t n) {
            const size_t ng = nwords - n + 1;
            counter.reset(ng);
            slots.resize(ng);
            const uint64_t B = 0x9E3779B97F4A7C15ULL;
            uint64_t Bn = 1;  // B^(n-1)
            for (size_t k = 1; k < n; ++k) Bn *= B;
            uint64_t h = 0;
            for (size_t k = 0; k < n; ++k) h = h * B + word_ids[k];
            slots[0] = counter.add_slot(h, 0);
            for (size_t k = n; k < nwords; ++k) {
                h = (h - word_ids[k - n] * Bn) * B + word_ids[k];
                slots[k - n + 1] = counter.add_slot(h, static_cast<uint32_t>(k - n + 1));
            }
            return ng;
        };

        // duplicated n-grams, n = 5..10
        for (size_t n = 5; n <= 10; ++n) {
            if (nwords < n) break;  // longer n-grams don't fit either
            const size_t ng = count_ngrams(n);
            iv.clear();
            for (size_t k = 0; k < ng; ++k) {
                if (counter.count_at(slots[k]) < 2) continue;
                iv.emplace_back(words[k].begin, words[k + n - 1].end);
            }
            m.dup_ngram_char_fraction[n - 5] =
                static_cast<double>(merged_length()) / static_cast<double>(total);
            // a repeated (n+1)-gram contains a repeated n-gram, so nothing
            // longer can be duplicated either; the remaining fractions stay 0
            if (iv.empty()) break;
        }

        // top n-gram, n = 2..4
        for (size_t n = 2; n <= 4; ++n) {
            if (nwords < n) continue;
            const size_t ng = count_ngrams(n);
            uint32_t best_slot = 0;
            uint32_t best_count = 0, best_first = 0;
            for (size_t k = 0; k < ng; ++k) {
                uint32_t c = counter.count_at(slots[k]);
                if (c < best_count) continue;
                uint32_t f = counter.first_at(slots[k]);
                if (c > best_count || (c == best_count && f < best_first)) {
                    best_count = c;
                    best_first = f;
                    best_slot = slots[k];
                }
            }
            if (best_count < 2) continue;
            iv.clear();
            for (size_t k = 0; k < ng; ++k) {
                if (slots[k] != best_slot) continue;
                iv.emplace_back(words[k].begin, words[k + n - 1].end);
            }
            m.top_ngram_char_fraction[n - 2] =
                static_cast<double>(merged_length()) / static_cast<double>(total);
        }
    }
    return m;
}

// Nearest-rank percentile calibration over a metrics sample. Exclude-if-
// greater metrics get the (100-p)th percentile, exclude-if-less the p-th.
inline QualityThresholds calibrate_thresholds(const std::vector<QualityMetrics>& sample,
                                              double percentile = 5.0) {
    if (sample.size() < 20)
        throw std::invalid_argument("calibration requires at least 20 documents");
    if (percentile <= 0.0 || percentile >= 50.0)
        throw std::invalid_argument("percentile must be in (0, 50)");

    auto nearest_rank = [&](std::vector<double>& vals, double p) {
        std::sort(vals.begin(), vals.end());
        size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(vals.size())));
        rank = std::max<size_t>(1, std::min(rank, vals.size()));
        return vals[rank - 1];
    };

    QualityThresholds out;
    QualityThresholds defaults;
    auto rules = threshold_rules(defaults);
    std::vector<double> vals(sample.size());
    // Write calibrated bounds back through a parallel rule table built on `out`.
    // Rule order is identical for any thresholds object.
    std::vector<double> bounds;
    for (const auto& rule : rules) {
        for (size_t i = 0; i < sample.size(); ++i) vals[i] = rule.value(sample[i]);
        double p = rule.direction == Direction::ExcludeIfGreater ? 100.0 - percentile : percentile;
        bounds.push_back(nearest_rank(vals, p));
    }
    size_t i = 0;
    out.max_alphabetic_word_ratio = bounds[i++];
    out.max_bullet_line_ratio = bounds[i++];
    out.max_ellipsis_line_ratio = bounds[i++];
    out.max_ellipsis_ratio = bounds[i++];
    out.max_hash_ratio = bounds[i++];
    out.min_stopword_count = bounds[i++];
    out.max_dup_line_fraction = bounds[i++];
    out.max_dup_line_char_fraction = bounds[i++];
    out.max_dup_para_fraction = bounds[i++];
    out.max_dup_para_char_fraction = bounds[i++];
    for (size_t k = 0; k < 6; ++k) out.max_dup_ngram_char_fraction[k] = bounds[i++];
    for (size_t k = 0; k < 3; ++k) out.max_top_ngram_char_fraction[k] = bounds[i++];
    out.max_spacing_anomaly_ratio = bounds[i++];
    out.max_case_anomaly_ratio = bounds[i++];
    out.max_word_fragment_ratio = bounds[i++];
    out.max_line_artifact_ratio = bounds[i++];
    out.max_special_char_density = bounds[i++];
    out.max_repeated_char_ratio = bounds[i++];
    out.max_numeric_context_errors = bounds[i++];
    out.min_avg_word_length = bounds[i++];
    out.max_avg_word_length = bounds[i++];
    out.min_word_length_std = bounds[i++];
    out.max_word_length_std = bounds[i++];
    out.max_very_short_word_ratio = bounds[i++];
    out.max_very_long_word_ratio = bounds[i++];
    return out;
}

}  // namespace corpuskit::quality
