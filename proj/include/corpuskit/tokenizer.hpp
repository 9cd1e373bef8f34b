#pragma once

// Token counting. The whitespace tokenizer is the zero-dependency default;
// the BPE tokenizer is a byte-level encoder loading externally supplied
// vocabulary/merge files.

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpuskit/unicode.hpp"

namespace corpuskit::tokenizer {

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string id() const = 0;
    // Same fingerprint implies identical counts for identical text.
    virtual uint64_t fingerprint() const = 0;
    virtual uint64_t count(std::string_view text) const = 0;
};

using TokenizerHandle = std::shared_ptr<const Tokenizer>;

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::string id() const override { return "whitespace"; }
    uint64_t fingerprint() const override { return 0x77735F7631ULL; }  // "ws_v1"
    uint64_t count(std::string_view text) const override {
        // branchless space-to-word transition count; \t..\r are contiguous
        uint64_t n = 0;
        bool prev_space = true;
        for (char c : text) {
            uint8_t b = static_cast<uint8_t>(c);
            bool space = b == ' ' || static_cast<uint8_t>(b - '\t') < 5;
            n += static_cast<uint64_t>(!space & prev_space);
            prev_space = space;
        }
        return n;
    }
};

namespace detail {

inline uint64_t fnv1a(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (char c : data) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// GPT-2 style byte-to-printable mapping so merge files can be plain text.
inline const std::vector<char32_t>& byte_to_unicode() {
    static const std::vector<char32_t>* table = [] {
        auto* t = new std::vector<char32_t>(256);
        int n = 0;
        for (int b = 0; b < 256; ++b) {
            bool printable = (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) ||
                             (b >= 0xAE && b <= 0xFF);
            (*t)[b] = printable ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + n++);
        }
        return t;
    }();
    return *table;
}

}  // namespace detail

// Byte-level BPE encoder. Only merge ranks matter for token counts; the
// vocabulary file, when given, contributes to the fingerprint.
class BpeTokenizer final : public Tokenizer {
public:
    static std::shared_ptr<BpeTokenizer> from_files(const std::string& merges_path,
                                                    const std::string& vocab_path = {}) {
        std::ifstream in(merges_path);
        if (!in) throw std::runtime_error("cannot open merges file: " + merges_path);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string vocab_data;
        if (!vocab_path.empty()) {
            std::ifstream vin(vocab_path);
            if (!vin) throw std::runtime_error("cannot open vocab file: " + vocab_path);
            std::stringstream vs;
            vs << vin.rdbuf();
            vocab_data = vs.str();
        }
        return from_merges_text(ss.str(), vocab_data);
    }

    static std::shared_ptr<BpeTokenizer> from_merges_text(const std::string& merges,
                                                          const std::string& vocab_data = {}) {
        auto t = std::make_shared<BpeTokenizer>();
        t->fingerprint_ = detail::fnv1a(merges);
        if (!vocab_data.empty()) t->fingerprint_ = detail::fnv1a(vocab_data, t->fingerprint_);
        std::istringstream in(merges);
        std::string line;
        int rank = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            size_t sp = line.find(' ');
            if (sp == std::string::npos) continue;
            std::string left = line.substr(0, sp), right = line.substr(sp + 1);
            uint32_t a = t->symbol_id(left);
            uint32_t b = t->symbol_id(right);
            t->symbol_id(left + right);  // register the merge product
            t->ranks_.emplace(pair_key(a, b), rank++);
        }
        return t;
    }

    std::string id() const override { return "bpe"; }
    uint64_t fingerprint() const override { return fingerprint_; }

    uint64_t count(std::string_view text) const override {
        uint64_t total = 0;
        for (const auto& pre : pretokenize(text)) total += bpe_count(pre);
        return total;
    }

    // Exposed for cross-checking against reference encoders in tests.
    static std::vector<std::string> pretokenize(std::string_view text) {
        auto cps = unicode::decode_utf8(text).codepoints;
        std::vector<std::string> out;
        size_t i = 0, n = cps.size();
        auto is_ws = [](char32_t c) { return unicode::is_space(c); };
        auto emit = [&](size_t from, size_t to) {
            std::string s;
            for (size_t k = from; k < to; ++k) unicode::append_utf8(s, cps[k]);
            out.push_back(std::move(s));
        };
        while (i < n) {
            // contractions: 's 't 'm 'd 're 've 'll
            if (cps[i] == '\'' && i + 1 < n) {
                char32_t c1 = cps[i + 1];
                if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') {
                    emit(i, i + 2);
                    i += 2;
                    continue;
                }
                if (i + 2 < n) {
                    char32_t c2 = cps[i + 2];
                    if ((c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e') ||
                        (c1 == 'l' && c2 == 'l')) {
                        emit(i, i + 3);
                        i += 3;
                        continue;
                    }
                }
            }
            size_t start = i;
            size_t body = (cps[i] == ' ' && i + 1 < n && !is_ws(cps[i + 1])) ? i + 1 : i;
            if (body < n && unicode::is_letter(cps[body])) {
                size_t j = body;
                while (j < n && unicode::is_letter(cps[j])) ++j;
                emit(start, j);
                i = j;
                continue;
            }
            if (body < n && unicode::is_digit(cps[body])) {
                size_t j = body;
                while (j < n && unicode::is_digit(cps[j])) ++j;
                emit(start, j);
                i = j;
                continue;
            }
            if (body < n && !is_ws(cps[body])) {
                size_t j = body;
                while (j < n && !is_ws(cps[j]) && !unicode::is_letter(cps[j]) &&
                       !unicode::is_digit(cps[j]))
                    ++j;
                emit(start, j);
                i = j;
                continue;
            }
            // whitespace run: trailing run is one token, otherwise the last
            // space attaches to the following token
            size_t j = i;
            while (j < n && is_ws(cps[j])) ++j;
            if (j == n) {
                emit(i, j);
                i = j;
            } else if (j - i > 1) {
                emit(i, j - 1);
                i = j - 1;
            } else {
                // single space before non-space was consumed by body above;
                // reaching here means cps[i] is whitespace other than ' '
                emit(i, i + 1);
                ++i;
            }
        }
        return out;
    }

    uint32_t symbol_id(const std::string& s) {
        auto it = symbols_.find(s);
        if (it != symbols_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(symbol_names_.size());
        symbols_.emplace(s, id);
        symbol_names_.push_back(s);
        return id;
    }

private:
    static uint64_t pair_key(uint32_t a, uint32_t b) {
        return (static_cast<uint64_t>(a) << 32) | b;
    }

    uint64_t bpe_count(const std::string& pretoken) const {
        // bytes -> printable symbols
        std::vector<uint32_t> syms;
        syms.reserve(pretoken.size());
        for (unsigned char b : pretoken) {
            std::string s;
            unicode::append_utf8(s, detail::byte_to_unicode()[b]);
            auto it = symbols_.find(s);
            if (it == symbols_.end()) {
                syms.push_back(UINT32_MAX);  // unknown byte symbol, never merges
            } else {
                syms.push_back(it->second);
            }
        }
        while (syms.size() > 1) {
            int best_rank = INT32_MAX;
            size_t best_pos = 0;
            for (size_t k = 0; k + 1 < syms.size(); ++k) {
                if (syms[k] == UINT32_MAX || syms[k + 1] == UINT32_MAX) continue;
                auto it = ranks_.find(pair_key(syms[k], syms[k + 1]));
                if (it != ranks_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best_pos = k;
                }
            }
            if (best_rank == INT32_MAX) break;
            std::string merged = symbol_names_[syms[best_pos]] + symbol_names_[syms[best_pos + 1]];
            auto it = symbols_.find(merged);
            uint32_t id = it != symbols_.end() ? it->second : UINT32_MAX;
            if (id == UINT32_MAX) break;  // merged symbol never registered
            syms[best_pos] = id;
            syms.erase(syms.begin() + best_pos + 1);
        }
        return syms.size();
    }

    std::unordered_map<std::string, uint32_t> symbols_;
    std::vector<std::string> symbol_names_;
    std::unordered_map<uint64_t, int> ranks_;
    uint64_t fingerprint_ = 0;
};

}  // namespace corpuskit::tokenizer
