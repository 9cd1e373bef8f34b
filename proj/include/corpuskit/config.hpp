#pragma once

// Pipeline configuration: JSON file with defaults matching the published
// parameter values. Every knob lives here so reruns are reproducible from
// the config alone.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "corpuskit/dedup.hpp"
#include "corpuskit/quality.hpp"

namespace corpuskit {

struct Config {
    // language / length gate
    std::string language = "de";
    double language_threshold = 0.65;
    uint64_t min_tokens = 32;
    std::string langid_model_path;       // empty = stopword-density stub
    bool metadata_language_prefilter = true;

    // tokenizer
    std::string tokenizer_type = "whitespace";  // "whitespace" | "bpe"
    std::string tokenizer_merges_path;
    std::string tokenizer_vocab_path;

    // quality
    quality::QualityThresholds quality_thresholds;  // defaults = published table

    // dedup
    dedup::DedupConfig dedup;
    std::string dedup_ngram_unit = "word";  // recorded choice; only "word" shipped
    uint64_t dedup_capacity = 1'000'000;    // expected paragraph count

    // pii: category name -> replacement override
    std::unordered_map<std::string, std::string> pii_replacements;

    // licensing: raw spelling -> SPDX key
    std::unordered_map<std::string, std::string> license_aliases;

    // scorers
    std::string perplexity_scorer = "null";
    std::string perplexity_model_path;
    std::string ocr_scorer = "null";

    unsigned workers = 1;
};

namespace detail {

inline void read_thresholds(const nlohmann::json& j, quality::QualityThresholds& t) {
    auto get = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    get("max_alphabetic_word_ratio", t.max_alphabetic_word_ratio);
    get("max_bullet_line_ratio", t.max_bullet_line_ratio);
    get("max_ellipsis_line_ratio", t.max_ellipsis_line_ratio);
    get("max_ellipsis_ratio", t.max_ellipsis_ratio);
    get("max_hash_ratio", t.max_hash_ratio);
    get("min_stopword_count", t.min_stopword_count);
    get("max_dup_line_fraction", t.max_dup_line_fraction);
    get("max_dup_line_char_fraction", t.max_dup_line_char_fraction);
    get("max_dup_para_fraction", t.max_dup_para_fraction);
    get("max_dup_para_char_fraction", t.max_dup_para_char_fraction);
    if (j.contains("max_dup_ngram_char_fraction"))
        for (size_t i = 0; i < 6; ++i)
            t.max_dup_ngram_char_fraction[i] = j.at("max_dup_ngram_char_fraction").at(i);
    if (j.contains("max_top_ngram_char_fraction"))
        for (size_t i = 0; i < 3; ++i)
            t.max_top_ngram_char_fraction[i] = j.at("max_top_ngram_char_fraction").at(i);
    get("max_spacing_anomaly_ratio", t.max_spacing_anomaly_ratio);
    get("max_case_anomaly_ratio", t.max_case_anomaly_ratio);
    get("max_word_fragment_ratio", t.max_word_fragment_ratio);
    get("max_line_artifact_ratio", t.max_line_artifact_ratio);
    get("max_special_char_density", t.max_special_char_density);
    get("max_repeated_char_ratio", t.max_repeated_char_ratio);
    get("max_numeric_context_errors", t.max_numeric_context_errors);
    get("min_avg_word_length", t.min_avg_word_length);
    get("max_avg_word_length", t.max_avg_word_length);
    get("min_word_length_std", t.min_word_length_std);
    get("max_word_length_std", t.max_word_length_std);
    get("max_very_short_word_ratio", t.max_very_short_word_ratio);
    get("max_very_long_word_ratio", t.max_very_long_word_ratio);
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j) {
    Config c;
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("language", c.language);
    get("language_threshold", c.language_threshold);
    get("min_tokens", c.min_tokens);
    get("langid_model_path", c.langid_model_path);
    get("metadata_language_prefilter", c.metadata_language_prefilter);
    if (j.contains("tokenizer")) {
        const auto& t = j.at("tokenizer");
        if (t.contains("type")) c.tokenizer_type = t.at("type").get<std::string>();
        if (t.contains("merges_path")) c.tokenizer_merges_path = t.at("merges_path").get<std::string>();
        if (t.contains("vocab_path")) c.tokenizer_vocab_path = t.at("vocab_path").get<std::string>();
    }
    // flat spellings kept for CLI convenience
    get("tokenizer_merges_path", c.tokenizer_merges_path);
    get("tokenizer_vocab_path", c.tokenizer_vocab_path);
    if (j.contains("quality_thresholds"))
        detail::read_thresholds(j.at("quality_thresholds"), c.quality_thresholds);
    if (j.contains("dedup")) {
        const auto& d = j.at("dedup");
        auto dget = [&](const char* key, auto& out) {
            if (d.contains(key)) out = d.at(key).get<std::decay_t<decltype(out)>>();
        };
        dget("shingle_size", c.dedup.shingle_size);
        dget("collision_threshold", c.dedup.collision_threshold);
        dget("target_fp_rate", c.dedup.target_fp_rate);
        dget("num_hashes", c.dedup.num_hashes);
        dget("lsh_bands", c.dedup.lsh_bands);
        dget("lsh_rows", c.dedup.lsh_rows);
        dget("capacity", c.dedup_capacity);
        dget("ngram_unit", c.dedup_ngram_unit);
        c.dedup.validate();
    }
    if (j.contains("pii_replacements"))
        c.pii_replacements =
            j.at("pii_replacements").get<std::unordered_map<std::string, std::string>>();
    if (j.contains("license_aliases"))
        c.license_aliases =
            j.at("license_aliases").get<std::unordered_map<std::string, std::string>>();
    get("perplexity_scorer", c.perplexity_scorer);
    get("perplexity_model_path", c.perplexity_model_path);
    get("ocr_scorer", c.ocr_scorer);
    get("workers", c.workers);
    if (c.dedup_ngram_unit != "word")
        throw std::runtime_error("dedup.ngram_unit: only \"word\" is implemented");
    if (!(c.language_threshold >= 0.0 && c.language_threshold <= 1.0))
        throw std::runtime_error("language_threshold must be in [0,1]");
    if (c.workers == 0) throw std::runtime_error("workers must be >= 1");
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace corpuskit
