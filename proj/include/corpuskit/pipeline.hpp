#pragma once

// Stage orchestration: formatting -> language/length -> quality -> dedup ->
// PII -> license, with per-(source,stage) ledger accounting. Per-document
// stages run on a bounded worker pool; dedup insertion is serialized in
// (source, id) order, so output is identical for any worker count.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "corpuskit/config.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/document.hpp"
#include "corpuskit/formatting.hpp"
#include "corpuskit/jsonl.hpp"
#include "corpuskit/langid.hpp"
#include "corpuskit/licenses.hpp"
#include "corpuskit/pii.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/scorers.hpp"
#include "corpuskit/tokenizer.hpp"

namespace corpuskit::pipeline {

inline tokenizer::TokenizerHandle make_tokenizer(const Config& cfg) {
    if (cfg.tokenizer_type == "whitespace")
        return std::make_shared<tokenizer::WhitespaceTokenizer>();
    if (cfg.tokenizer_type == "bpe") {
        if (cfg.tokenizer_merges_path.empty())
            throw std::runtime_error("bpe tokenizer requires tokenizer.merges_path");
        return tokenizer::BpeTokenizer::from_files(cfg.tokenizer_merges_path,
                                                   cfg.tokenizer_vocab_path);
    }
    throw std::runtime_error("unknown tokenizer type: " + cfg.tokenizer_type);
}

inline langid::ClassifierHandle make_classifier(const Config& cfg) {
    if (cfg.langid_model_path.empty())
        return std::make_shared<langid::StopwordDensityClassifier>();
    return langid::TrigramClassifier::load(cfg.langid_model_path);
}

inline pii::ReplacementTable make_replacements(const Config& cfg) {
    auto table = pii::ReplacementTable::defaults();
    for (const auto& [name, value] : cfg.pii_replacements) {
        bool known = false;
        for (pii::Category c : pii::kAllCategories) {
            if (name == pii::category_name(c)) {
                table.values[static_cast<size_t>(c)] = value;
                known = true;
            }
        }
        if (!known) throw std::runtime_error("unknown pii category in config: " + name);
    }
    return table;
}

struct PipelineResult {
    std::vector<Document> output;  // (source, id) order
    StageLedger ledger;
    std::map<std::string, uint64_t> drops;  // reason -> count
    std::array<uint64_t, 6> pii_counts{};
    uint64_t scorer_failures = 0;
};

namespace detail {

// Static-partition parallel for; deterministic because each index writes
// only its own slot.
template <typename Fn>
void parallel_for(size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        size_t lo = static_cast<size_t>(w) * chunk;
        size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Runs the full chain over already-parsed documents. The dedup filter is
// caller-owned so runs can share or persist it.
inline PipelineResult run_pipeline(std::vector<Document> input, const Config& cfg,
                                   dedup::DedupFilter& filter,
                                   scorers::ScorerHandle perplexity_scorer = nullptr,
                                   scorers::ScorerHandle ocr_scorer = nullptr) {
    auto tok = make_tokenizer(cfg);
    auto classifier = make_classifier(cfg);
    auto replacements = make_replacements(cfg);
    if (!perplexity_scorer)
        perplexity_scorer = scorers::make_scorer(cfg.perplexity_scorer, cfg.perplexity_model_path);
    if (!ocr_scorer) ocr_scorer = scorers::make_scorer(cfg.ocr_scorer);

    PipelineResult r;
    std::sort(input.begin(), input.end(), [](const Document& a, const Document& b) {
        if (a.source != b.source) return a.source < b.source;
        return a.id < b.id;
    });

    const size_t n = input.size();
    enum class DropReason : uint8_t {
        None, MetadataLang, Language, Length, Quality, Dedup, DedupLength, License
    };
    std::vector<DropReason> dropped(n, DropReason::None);
    std::vector<uint64_t> tokens_initial(n), tokens_filtered(n);

    // stages 1-3: formatting, language/length, quality (parallel, pure)
    detail::parallel_for(n, cfg.workers, [&](size_t i) {
        Document& doc = input[i];
        tokens_initial[i] = tok->count(doc.text);
        doc.text = formatting::fix_whitespace(formatting::fix_encoding(std::move(doc.text)));
        if (cfg.metadata_language_prefilter && doc.lang_tag && *doc.lang_tag != cfg.language) {
            dropped[i] = DropReason::MetadataLang;
            return;
        }
        auto pred = classifier->predict(langid::prepare_for_langid(doc.text));
        if (!(pred.language == cfg.language && pred.probability >= cfg.language_threshold)) {
            dropped[i] = DropReason::Language;
            return;
        }
        uint64_t count = tok->count(doc.text);
        doc.num_tokens = count;
        if (!langid::gate_length(count, cfg.min_tokens)) {
            dropped[i] = DropReason::Length;
            return;
        }
        auto metrics = quality::compute_metrics(doc.text);
        auto verdict = quality::evaluate(metrics, cfg.quality_thresholds);
        if (!verdict.keep) {
            dropped[i] = DropReason::Quality;
            return;
        }
        tokens_filtered[i] = count;
    });

    // stage 4: dedup (serialized, stream order)
    std::vector<std::optional<Document>> surviving(n);
    for (size_t i = 0; i < n; ++i) {
        if (dropped[i] != DropReason::None) continue;
        auto out = dedup::dedup_document(input[i], filter);
        if (!out) {
            dropped[i] = DropReason::Dedup;
            continue;
        }
        surviving[i] = std::move(*out);
    }

    // stages 4b-6: token recount + re-gate, PII, license, scorers (parallel)
    std::vector<uint64_t> tokens_dedup(n), tokens_final(n);
    std::vector<std::array<uint64_t, 6>> pii_local(n);
    std::vector<uint8_t> scorer_fail(n, 0);
    detail::parallel_for(n, cfg.workers, [&](size_t i) {
        if (!surviving[i]) return;
        Document& doc = *surviving[i];
        // dedup only ever removes chunks, so an unchanged length means an
        // unchanged text and the pre-dedup count still holds
        uint64_t count = doc.num_tokens && doc.text.size() == input[i].text.size()
                             ? *doc.num_tokens
                             : tok->count(doc.text);
        doc.num_tokens = count;
        tokens_dedup[i] = count;
        if (!langid::gate_length(count, cfg.min_tokens)) {
            dropped[i] = DropReason::DedupLength;
            surviving[i].reset();
            return;
        }
        auto redacted = pii::redact(doc.text, replacements);
        if (redacted.total() > 0) {
            doc.text = std::move(redacted.text);
            doc.num_tokens = tok->count(doc.text);
        }
        pii_local[i] = redacted.counts;
        std::vector<std::optional<licenses::LicenseId>> lics;
        for (const auto& raw : doc.licenses)
            lics.push_back(licenses::canonicalize(
                raw, cfg.license_aliases.empty() ? nullptr : &cfg.license_aliases));
        auto gate = licenses::gate_license(lics);
        if (!gate.keep) {
            dropped[i] = DropReason::License;
            surviving[i].reset();
            return;
        }
        doc.licenses.clear();
        for (const auto& lic : lics) doc.licenses.push_back(lic->spdx_key);
        std::sort(doc.licenses.begin(), doc.licenses.end());
        doc.licenses.erase(std::unique(doc.licenses.begin(), doc.licenses.end()),
                           doc.licenses.end());
        tokens_final[i] = *doc.num_tokens;
    });
    // scorers may declare themselves non-concurrency-safe; run serially then
    for (size_t i = 0; i < n; ++i) {
        if (!surviving[i]) continue;
        Document& doc = *surviving[i];
        try {
            if (auto p = perplexity_scorer->score(doc)) doc.perplexity = *p;
        } catch (...) {
            ++r.scorer_failures;
        }
        try {
            if (auto o = ocr_scorer->score(doc)) doc.ocr_score = *o;
        } catch (...) {
            ++r.scorer_failures;
        }
    }

    // ledger + drop reasons
    auto reason_name = [](DropReason d) {
        switch (d) {
            case DropReason::MetadataLang: return "metadata_language";
            case DropReason::Language: return "language";
            case DropReason::Length: return "length";
            case DropReason::Quality: return "quality";
            case DropReason::Dedup: return "dedup";
            case DropReason::DedupLength: return "dedup_length";
            case DropReason::License: return "license";
            default: return "none";
        }
    };
    for (size_t i = 0; i < n; ++i) {
        const std::string& src = input[i].source;
        bool past_filter = dropped[i] == DropReason::None || dropped[i] == DropReason::Dedup ||
                           dropped[i] == DropReason::DedupLength ||
                           dropped[i] == DropReason::License;
        bool past_dedup = past_filter && dropped[i] != DropReason::Dedup &&
                          dropped[i] != DropReason::DedupLength;
        bool final_keep = dropped[i] == DropReason::None;

        auto& initial = r.ledger.cell(src, Stage::Initial);
        initial.docs_in += 1;
        initial.docs_out += 1;
        initial.tokens_in += tokens_initial[i];
        initial.tokens_out += tokens_initial[i];

        auto& filtered = r.ledger.cell(src, Stage::Filtered);
        filtered.docs_in += 1;
        filtered.tokens_in += tokens_initial[i];
        if (past_filter) {
            filtered.docs_out += 1;
            filtered.tokens_out += tokens_filtered[i];
        }

        auto& dd = r.ledger.cell(src, Stage::Deduplicated);
        if (past_filter) {
            dd.docs_in += 1;
            dd.tokens_in += tokens_filtered[i];
            if (past_dedup) {
                dd.docs_out += 1;
                dd.tokens_out += tokens_dedup[i];
            }
        }

        auto& fin = r.ledger.cell(src, Stage::Final);
        if (past_dedup) {
            fin.docs_in += 1;
            fin.tokens_in += tokens_dedup[i];
            if (final_keep) {
                fin.docs_out += 1;
                fin.tokens_out += tokens_final[i];
            }
        }

        if (dropped[i] != DropReason::None) ++r.drops[reason_name(dropped[i])];
        for (size_t c = 0; c < 6; ++c) r.pii_counts[c] += pii_local[i][c];
    }
    for (size_t i = 0; i < n; ++i)
        if (surviving[i]) r.output.push_back(std::move(*surviving[i]));
    return r;
}

// --- file-level driver --------------------------------------------------------

inline std::string sanitize_component(std::string_view s) {
    std::string out;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "unnamed" : out;
}

struct RunFilesResult {
    PipelineResult pipeline;
    uint64_t rejected_records = 0;
    std::vector<std::string> output_files;
};

// Reads newline-delimited records from the inputs, runs the chain, and
// writes one output file per (subset, source) under out_dir.
inline RunFilesResult run_files(const std::vector<std::string>& inputs,
                                const std::string& out_dir, const Config& cfg,
                                dedup::DedupFilter& filter) {
    std::vector<Document> docs;
    uint64_t rejected = 0;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open input: " + path);
        auto read = jsonl::read_stream(in);
        rejected += read.rejected;
        for (auto& d : read.docs) docs.push_back(std::move(d));
    }
    RunFilesResult result;
    result.rejected_records = rejected;
    result.pipeline = run_pipeline(std::move(docs), cfg, filter);
    result.pipeline.ledger.rejected_records = rejected;

    std::filesystem::create_directories(out_dir);
    std::map<std::string, std::vector<const Document*>> by_file;
    for (const auto& d : result.pipeline.output) {
        std::string name = std::string(domain_name(d.subset)) + "_" +
                           sanitize_component(d.source) + ".jsonl";
        by_file[name].push_back(&d);
    }
    for (const auto& [name, group] : by_file) {
        std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output: " + path);
        for (const Document* d : group) out << jsonl::serialize_record(*d) << '\n';
        result.output_files.push_back(path);
    }
    return result;
}

inline nlohmann::json ledger_to_json(const StageLedger& ledger) {
    nlohmann::json j;
    j["rejected_records"] = ledger.rejected_records;
    nlohmann::json sources = nlohmann::json::object();
    for (const auto& [src, cells] : ledger.per_source) {
        nlohmann::json row = nlohmann::json::object();
        for (Stage s : kAllStages) {
            const auto& c = cells[static_cast<size_t>(s)];
            row[stage_name(s)] = {{"docs_in", c.docs_in},
                                  {"docs_out", c.docs_out},
                                  {"tokens_in", c.tokens_in},
                                  {"tokens_out", c.tokens_out}};
        }
        sources[src] = row;
    }
    j["sources"] = sources;
    return j;
}

}  // namespace corpuskit::pipeline
