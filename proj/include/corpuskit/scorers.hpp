#pragma once

// Pluggable per-document scorers for the perplexity and ocr_score fields.
// Ships a null scorer, an OCR stub (1 - special_char_density, higher =
// cleaner), and a word-bigram perplexity scorer trainable from a text file.
// Real external models plug in behind the same interface.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "corpuskit/document.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit::scorers {

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return true; }
    // absent = no score; internal failures should throw, the pipeline
    // converts them to absent plus a warning count
    virtual std::optional<double> score(const Document& doc) const = 0;
};

using ScorerHandle = std::shared_ptr<const Scorer>;

class NullScorer final : public Scorer {
public:
    std::string id() const override { return "null"; }
    std::optional<double> score(const Document&) const override { return std::nullopt; }
};

// OCR quality stub: 1 - special_char_density (same definition as the quality
// metric: symbol/control scalars over total scalars). 1.0 = clean.
class OcrStubScorer final : public Scorer {
public:
    std::string id() const override { return "ocr-stub"; }
    std::optional<double> score(const Document& doc) const override {
        auto cps = unicode::decode_utf8(doc.text).codepoints;
        if (cps.empty()) return 1.0;
        uint64_t special = 0;
        for (char32_t c : cps) {
            if (unicode::is_space(c)) continue;
            auto cls = unicode::char_class(c);
            if (cls == unicode::CharClass::S || cls == unicode::CharClass::Other) ++special;
        }
        return 1.0 - static_cast<double>(special) / static_cast<double>(cps.size());
    }
};

// Word-bigram perplexity with add-one smoothing, trained from a plain-text
// fixture (one sentence per line, lowercased whitespace words). Perplexity =
// exp(-mean log P(w_i | w_{i-1})) with a <s> start symbol per document.
class BigramPerplexityScorer final : public Scorer {
public:
    static std::shared_ptr<BigramPerplexityScorer> train_from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open perplexity training file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return train_from_text(ss.str());
    }

    static std::shared_ptr<BigramPerplexityScorer> train_from_text(std::string_view text) {
        auto s = std::make_shared<BigramPerplexityScorer>();
        std::string line;
        std::istringstream in{std::string(text)};
        while (std::getline(in, line)) {
            auto words = tokenize(line);
            if (words.empty()) continue;
            std::string prev = "<s>";
            for (const auto& w : words) {
                s->unigrams_[prev] += 1;
                s->bigrams_[prev + " " + w] += 1;
                s->vocab_.insert({w, 0});
                prev = w;
            }
        }
        s->vocab_.insert({"<s>", 0});
        if (s->bigrams_.empty())
            throw std::runtime_error("perplexity training text contained no words");
        return s;
    }

    std::string id() const override { return "bigram-perplexity"; }

    std::optional<double> score(const Document& doc) const override {
        auto words = tokenize(doc.text);
        if (words.empty()) return std::nullopt;
        double log_sum = 0.0;
        std::string prev = "<s>";
        double v = static_cast<double>(vocab_.size());
        for (const auto& w : words) {
            auto bi = bigrams_.find(prev + " " + w);
            auto uni = unigrams_.find(prev);
            double num = (bi != bigrams_.end() ? static_cast<double>(bi->second) : 0.0) + 1.0;
            double den = (uni != unigrams_.end() ? static_cast<double>(uni->second) : 0.0) + v;
            log_sum += std::log(num / den);
            prev = w;
        }
        return std::exp(-log_sum / static_cast<double>(words.size()));
    }

    static std::vector<std::string> tokenize(std::string_view text) {
        std::vector<std::string> words;
        std::string cur;
        auto cps = unicode::decode_utf8(text).codepoints;
        for (char32_t c : cps) {
            if (unicode::is_space(c)) {
                if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
            } else {
                unicode::append_utf8(cur, unicode::to_lower(c));
            }
        }
        if (!cur.empty()) words.push_back(std::move(cur));
        return words;
    }

private:
    std::unordered_map<std::string, uint64_t> unigrams_;  // context counts
    std::unordered_map<std::string, uint64_t> bigrams_;
    std::unordered_map<std::string, uint64_t> vocab_;
};

// Named lookup used by config plumbing; fixture-trained scorers need paths.
inline ScorerHandle make_scorer(const std::string& name, const std::string& model_path = {}) {
    if (name.empty() || name == "null") return std::make_shared<NullScorer>();
    if (name == "ocr-stub") return std::make_shared<OcrStubScorer>();
    if (name == "bigram-perplexity") return BigramPerplexityScorer::train_from_file(model_path);
    throw std::runtime_error("unknown scorer: " + name);
}

}  // namespace corpuskit::scorers
