#pragma once

// Language identification gate. The classifier is pluggable: a byte-trigram
// model adapter for production use and a deterministic stopword-density stub
// for tests. Swapping classifiers never changes gate semantics.

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpuskit/stopwords.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit::langid {

struct LangPrediction {
    std::string language;  // ISO-639-1
    double probability = 0.0;
};

class LanguageClassifier {
public:
    virtual ~LanguageClassifier() = default;
    virtual std::string id() const = 0;
    virtual LangPrediction predict(std::string_view prepared_text) const = 0;
};

using ClassifierHandle = std::shared_ptr<const LanguageClassifier>;

// Truncates to 4096 Unicode scalar values and replaces newlines with spaces.
inline std::string prepare_for_langid(std::string_view text) {
    // find the byte cutoff first, then copy in bulk
    size_t scalars = 0, cut = 0;
    while (cut < text.size() && scalars < 4096) {
        uint8_t b = static_cast<uint8_t>(text[cut]);
        size_t len = b < 0x80 ? 1 : (b & 0xE0) == 0xC0 ? 2 : (b & 0xF0) == 0xE0 ? 3 : 4;
        cut += std::min(len, text.size() - cut);
        ++scalars;
    }
    std::string out(text.substr(0, cut));
    for (char& c : out)
        if (c == '\n' || c == '\r') c = ' ';
    return out;
}

inline bool gate_language(const LangPrediction& pred, double threshold = 0.65) {
    return pred.language == "de" && pred.probability >= threshold;
}

inline bool gate_length(uint64_t num_tokens, uint64_t min_tokens = 32) {
    return num_tokens >= min_tokens;
}

// Deterministic test stub: fraction of whitespace-separated words found in
// the German stopword list >= 0.05 reads as confidently German.
class StopwordDensityClassifier final : public LanguageClassifier {
public:
    explicit StopwordDensityClassifier(double density_threshold = 0.05)
        : threshold_(density_threshold) {}

    std::string id() const override { return "stopword-density-stub"; }

    LangPrediction predict(std::string_view text) const override {
        size_t words = 0, hits = 0;
        const size_t max_stop = max_german_stopword_length();
        char buf[64];
        size_t len = 0;
        bool overflow = false;
        size_t pos = 0;  // bytes consumed, for the early-exit word bound
        bool decided = false;
        auto flush = [&] {
            // punctuation-only tokens accumulate nothing and don't count
            if (len == 0 && !overflow) return;
            ++words;
            if (!overflow && len <= max_stop && is_german_stopword(std::string_view(buf, len))) {
                ++hits;
                // every remaining word needs at least one char plus a
                // separator, so the final word count is bounded; once the
                // density clears the threshold against that bound no
                // continuation can undo the verdict
                size_t upper = words + 1 + (text.size() - pos + 1) / 2;
                if (static_cast<double>(hits) >= threshold_ * static_cast<double>(upper))
                    decided = true;
            }
            len = 0;
            overflow = false;
        };
        auto take = [&](char32_t cp) {
            uint8_t f = unicode::char_flags(cp);
            if (f & unicode::kFlagSpace) {
                flush();
                return;
            }
            if (f & unicode::kFlagPunct) return;
            if (len + 4 > sizeof(buf)) {
                overflow = true;
                return;
            }
            char32_t lc = unicode::to_lower(cp);
            if (lc < 0x80) {
                buf[len++] = static_cast<char>(lc);
            } else {
                std::string tmp;
                unicode::append_utf8(tmp, lc);
                for (char c : tmp) buf[len++] = c;
            }
        };
        // ASCII bytes are their own scalars; only decode the non-ASCII spans.
        // UTF-8 sequences never span an ASCII byte, so cutting there is safe.
        size_t i = 0, n = text.size();
        while (i < n) {
            pos = i;
            uint8_t b = static_cast<uint8_t>(text[i]);
            if (b < 0x80) {
                // hot bytes bypass the generic take(): lowercase letters
                // append as-is (no flags, no case fold) and a space flushes
                if (b >= 'a' && b <= 'z') {
                    size_t j = i + 1;
                    while (j < n) {
                        uint8_t c = static_cast<uint8_t>(text[j]);
                        if (c < 'a' || c > 'z') break;
                        ++j;
                    }
                    size_t run = j - i;
                    if (len + run + 4 <= sizeof(buf)) {
                        std::memcpy(buf + len, text.data() + i, run);
                        len += run;
                    } else {
                        for (size_t k = i; k < j; ++k) {
                            if (len + 4 > sizeof(buf)) overflow = true;
                            else buf[len++] = text[k];
                        }
                    }
                    i = j;
                    continue;
                }
                if (b == ' ') {
                    flush();
                    ++i;
                    if (decided) return {"de", 0.9};
                    continue;
                }
                take(b);
                ++i;
                if (decided) return {"de", 0.9};
                continue;
            }
            size_t j = i + 1;
            while (j < n && static_cast<uint8_t>(text[j]) >= 0x80) ++j;
            for (char32_t cp : unicode::decode_utf8(text.substr(i, j - i)).codepoints) take(cp);
            i = j;
            if (decided) return {"de", 0.9};
        }
        pos = n;
        flush();
        double density = words == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(words);
        if (density >= threshold_) return {"de", 0.9};
        return {"other", 0.9};
    }

private:
    double threshold_;
};

// Byte-trigram naive-Bayes classifier loading a model file. Model format:
// one line per (lang, trigram, count) as "lang<TAB>hex-trigram<TAB>count".
class TrigramClassifier final : public LanguageClassifier {
public:
    static std::shared_ptr<TrigramClassifier> load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open language model: " + path);
        auto c = std::make_shared<TrigramClassifier>();
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            size_t t1 = line.find('\t');
            size_t t2 = line.find('\t', t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos) continue;
            std::string lang = line.substr(0, t1);
            std::string hex = line.substr(t1 + 1, t2 - t1 - 1);
            uint64_t count = std::stoull(line.substr(t2 + 1));
            if (hex.size() != 6) continue;
            uint32_t tri = static_cast<uint32_t>(std::stoul(hex, nullptr, 16));
            auto& m = c->models_[lang];
            m.counts[tri] += count;
            m.total += count;
        }
        if (c->models_.empty()) throw std::runtime_error("empty language model: " + path);
        return c;
    }

    std::string id() const override { return "byte-trigram"; }

    LangPrediction predict(std::string_view text) const override {
        if (text.size() < 3 || models_.empty()) return {"", 0.0};
        std::vector<std::pair<std::string, double>> scores;
        for (const auto& [lang, model] : models_) {
            double ll = 0.0;
            size_t n = 0;
            for (size_t i = 0; i + 3 <= text.size(); ++i) {
                uint32_t tri = (static_cast<uint8_t>(text[i]) << 16) |
                               (static_cast<uint8_t>(text[i + 1]) << 8) |
                               static_cast<uint8_t>(text[i + 2]);
                auto it = model.counts.find(tri);
                double count = it != model.counts.end() ? static_cast<double>(it->second) : 0.0;
                ll += std::log((count + 1.0) / (static_cast<double>(model.total) + 16777216.0));
                ++n;
            }
            scores.emplace_back(lang, ll / static_cast<double>(n));
        }
        // softmax over per-trigram average log-likelihoods
        double best = scores[0].second;
        for (const auto& [lang, s] : scores) best = std::max(best, s);
        double denom = 0.0;
        for (auto& [lang, s] : scores) denom += std::exp(s - best);
        LangPrediction top;
        for (const auto& [lang, s] : scores) {
            double p = std::exp(s - best) / denom;
            if (p > top.probability) top = {lang, p};
        }
        return top;
    }

private:
    struct Model {
        std::unordered_map<uint32_t, uint64_t> counts;
        uint64_t total = 0;
    };
    std::unordered_map<std::string, Model> models_;
};

}  // namespace corpuskit::langid
