#pragma once

// German function-word list used by the stopword count metric and the
// stopword-density language stub.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace corpuskit {

namespace detail {

// heterogeneous lookup so string_view probes don't allocate
struct SvHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};

}  // namespace detail

using StopwordSet = std::unordered_set<std::string, detail::SvHash, std::equal_to<>>;

inline const StopwordSet& german_stopwords() {
    static const StopwordSet* set = [] {
        auto* s = new StopwordSet{
            // definite articles
            "der", "die", "das", "den", "dem", "des",
            // indefinite articles
            "ein", "eine", "einen", "einem", "einer",
            // conjunctions
            "und", "oder", "aber",
            // common verbs
            "ist", "sind", "hat", "haben", "wird", "werden",
            // prepositions
            "von", "zu", "mit", "in", "auf", "für", "bei", "nach", "vor", "über",
            "unter", "durch", "gegen", "ohne", "um",
            // pronouns
            "ich", "du", "er", "sie", "es", "wir", "ihr", "sich", "sein", "seine",
            "ihrer", "ihren", "mich", "dich",
            // adverbs
            "nicht", "auch", "nur", "noch", "schon", "hier", "dort", "da", "dann",
            "jetzt", "heute", "sehr", "mehr", "weniger", "ganz", "gar", "etwa",
            // subordinating conjunctions
            "dass", "wenn", "als", "wie",
            // contractions
            "an", "am", "im", "ins", "zum", "zur", "vom", "beim",
            // question words
            "was", "wer", "wo", "wann", "warum", "welche", "welcher",
            // quantifiers
            "alle", "viele", "einige", "andere", "jede", "jeden", "jeder",
            // modal verbs
            "kann", "könnte", "muss", "soll", "will", "würde",
            // particles
            "ja", "nein", "doch", "so", "also", "nun", "mal",
        };
        return s;
    }();
    return *set;
}

namespace detail {

// Flat open-addressing probe table. Every current stopword fits in 7 bytes,
// so a word packs into one uint64 (length tag in the top byte) and a lookup
// is a couple of L1 loads instead of a node-based hash walk.
struct StopwordTable {
    std::vector<uint64_t> slots;  // 0 = empty
    std::vector<std::string> long_words;  // fallback for entries over 7 bytes
    size_t mask = 0;

    static uint64_t pack(std::string_view w) {
        uint64_t v = 0;
        std::memcpy(&v, w.data(), w.size());
        return v | (static_cast<uint64_t>(w.size()) << 56);
    }

    static uint64_t mix(uint64_t x) {
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDULL;
        x ^= x >> 33;
        return x;
    }

    StopwordTable() {
        const auto& words = german_stopwords();
        size_t cap = 16;
        while (cap < words.size() * 4) cap <<= 1;
        slots.assign(cap, 0);
        mask = cap - 1;
        for (const auto& w : words) {
            if (w.size() > 7) {
                long_words.push_back(w);
                continue;
            }
            uint64_t key = pack(w);
            size_t i = mix(key) & mask;
            while (slots[i] != 0) i = (i + 1) & mask;
            slots[i] = key;
        }
    }

    bool contains(std::string_view w) const {
        if (w.empty()) return false;
        if (w.size() > 7) {
            for (const auto& lw : long_words)
                if (lw == w) return true;
            return false;
        }
        uint64_t key = pack(w);
        size_t i = mix(key) & mask;
        while (slots[i] != 0) {
            if (slots[i] == key) return true;
            i = (i + 1) & mask;
        }
        return false;
    }
};

}  // namespace detail

inline bool is_german_stopword(std::string_view word) {
    static const detail::StopwordTable table;
    return table.contains(word);
}

// longest entry in bytes; lets hot loops skip the hash probe for long words
inline size_t max_german_stopword_length() {
    static const size_t n = [] {
        size_t m = 0;
        for (const auto& w : german_stopwords()) m = std::max(m, w.size());
        return m;
    }();
    return n;
}

}  // namespace corpuskit
