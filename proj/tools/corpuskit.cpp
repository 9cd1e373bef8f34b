// Command-line front end for the corpus pipeline. Subcommands mirror the
// pipeline stages so each one can be run and inspected in isolation; `run`
// executes the full chain.
//
// Exit codes: 0 success, 1 fatal config/IO error, 2 completed but some input
// lines were malformed and rejected.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corpuskit/config.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/formatting.hpp"
#include "corpuskit/jsonl.hpp"
#include "corpuskit/langid.hpp"
#include "corpuskit/licenses.hpp"
#include "corpuskit/pii.hpp"
#include "corpuskit/pipeline.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/stats.hpp"

using namespace corpuskit;

namespace {

struct GlobalOpts {
    std::string config_path;
    unsigned workers = 0;  // 0 = take from config
    std::string ledger_path;
    std::string filter_path;
};

Config effective_config(const GlobalOpts& g) {
    Config cfg = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.workers > 0) cfg.workers = g.workers;
    return cfg;
}

jsonl::ReadResult read_inputs(const std::vector<std::string>& inputs, bool output_schema) {
    jsonl::ReadResult all;
    if (inputs.empty()) {
        all = jsonl::read_stream(std::cin, output_schema);
        return all;
    }
    for (const auto& path : inputs) {
        if (path == "-") {
            auto r = jsonl::read_stream(std::cin, output_schema);
            all.rejected += r.rejected;
            for (auto& d : r.docs) all.docs.push_back(std::move(d));
            continue;
        }
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open input: " + path);
        auto r = jsonl::read_stream(in, output_schema);
        all.rejected += r.rejected;
        for (auto& d : r.docs) all.docs.push_back(std::move(d));
    }
    return all;
}

void write_docs(const std::string& out_path, const std::vector<Document>& docs) {
    if (out_path.empty() || out_path == "-") {
        jsonl::write_stream(std::cout, docs);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output: " + out_path);
    jsonl::write_stream(out, docs);
}

void write_json(const std::string& out_path, const nlohmann::json& j) {
    if (out_path.empty() || out_path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output: " + out_path);
    out << j.dump(2) << "\n";
}

dedup::DedupFilter open_or_create_filter(const GlobalOpts& g, const Config& cfg,
                                         uint64_t capacity) {
    if (!g.filter_path.empty() && std::ifstream(g.filter_path).good())
        return dedup::DedupFilter::load_file(g.filter_path);
    return dedup::DedupFilter(cfg.dedup, capacity);
}

void maybe_save_filter(const GlobalOpts& g, const dedup::DedupFilter& filter) {
    if (!g.filter_path.empty()) filter.save_file(g.filter_path);
}

void maybe_write_ledger(const GlobalOpts& g, const StageLedger& ledger) {
    if (g.ledger_path.empty()) return;
    write_json(g.ledger_path, pipeline::ledger_to_json(ledger));
}

// Reverse of pipeline::ledger_to_json, used by `stats` to pick up the ledger
// a previous `run` wrote.
StageLedger ledger_from_json(const nlohmann::json& j) {
    StageLedger ledger;
    ledger.rejected_records = j.value("rejected_records", 0ull);
    if (!j.contains("sources")) return ledger;
    for (const auto& [src, row] : j.at("sources").items()) {
        for (Stage s : kAllStages) {
            const auto& cell = row.at(stage_name(s));
            ledger.cell(src, s) = {cell.at("docs_in").get<uint64_t>(),
                                   cell.at("docs_out").get<uint64_t>(),
                                   cell.at("tokens_in").get<uint64_t>(),
                                   cell.at("tokens_out").get<uint64_t>()};
        }
    }
    return ledger;
}

nlohmann::json thresholds_to_json(const quality::QualityThresholds& t) {
    nlohmann::json j;
    j["max_alphabetic_word_ratio"] = t.max_alphabetic_word_ratio;
    j["max_bullet_line_ratio"] = t.max_bullet_line_ratio;
    j["max_ellipsis_line_ratio"] = t.max_ellipsis_line_ratio;
    j["max_ellipsis_ratio"] = t.max_ellipsis_ratio;
    j["max_hash_ratio"] = t.max_hash_ratio;
    j["min_stopword_count"] = t.min_stopword_count;
    j["max_dup_line_fraction"] = t.max_dup_line_fraction;
    j["max_dup_line_char_fraction"] = t.max_dup_line_char_fraction;
    j["max_dup_para_fraction"] = t.max_dup_para_fraction;
    j["max_dup_para_char_fraction"] = t.max_dup_para_char_fraction;
    j["max_dup_ngram_char_fraction"] = t.max_dup_ngram_char_fraction;
    j["max_top_ngram_char_fraction"] = t.max_top_ngram_char_fraction;
    j["max_spacing_anomaly_ratio"] = t.max_spacing_anomaly_ratio;
    j["max_case_anomaly_ratio"] = t.max_case_anomaly_ratio;
    j["max_word_fragment_ratio"] = t.max_word_fragment_ratio;
    j["max_line_artifact_ratio"] = t.max_line_artifact_ratio;
    j["max_special_char_density"] = t.max_special_char_density;
    j["max_repeated_char_ratio"] = t.max_repeated_char_ratio;
    j["max_numeric_context_errors"] = t.max_numeric_context_errors;
    j["min_avg_word_length"] = t.min_avg_word_length;
    j["max_avg_word_length"] = t.max_avg_word_length;
    j["min_word_length_std"] = t.min_word_length_std;
    j["max_word_length_std"] = t.max_word_length_std;
    j["max_very_short_word_ratio"] = t.max_very_short_word_ratio;
    j["max_very_long_word_ratio"] = t.max_very_long_word_ratio;
    return j;
}

nlohmann::json metrics_to_json(const quality::QualityMetrics& m) {
    nlohmann::json j;
    j["alphabetic_word_ratio"] = m.alphabetic_word_ratio;
    j["bullet_line_ratio"] = m.bullet_line_ratio;
    j["ellipsis_line_ratio"] = m.ellipsis_line_ratio;
    j["ellipsis_ratio"] = m.ellipsis_ratio;
    j["hash_ratio"] = m.hash_ratio;
    j["stopword_count"] = m.stopword_count;
    j["dup_line_fraction"] = m.dup_line_fraction;
    j["dup_line_char_fraction"] = m.dup_line_char_fraction;
    j["dup_para_fraction"] = m.dup_para_fraction;
    j["dup_para_char_fraction"] = m.dup_para_char_fraction;
    j["dup_ngram_char_fraction"] = m.dup_ngram_char_fraction;
    j["top_ngram_char_fraction"] = m.top_ngram_char_fraction;
    j["spacing_anomaly_ratio"] = m.spacing_anomaly_ratio;
    j["case_anomaly_ratio"] = m.case_anomaly_ratio;
    j["word_fragment_ratio"] = m.word_fragment_ratio;
    j["line_artifact_ratio"] = m.line_artifact_ratio;
    j["special_char_density"] = m.special_char_density;
    j["repeated_char_ratio"] = m.repeated_char_ratio;
    j["numeric_context_errors"] = m.numeric_context_errors;
    j["avg_word_length"] = m.avg_word_length;
    j["word_length_std"] = m.word_length_std;
    j["very_short_word_ratio"] = m.very_short_word_ratio;
    j["very_long_word_ratio"] = m.very_long_word_ratio;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpuskit: corpus construction pipeline"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "pipeline config JSON");
    app.add_option("--workers", g.workers, "worker thread count (overrides config)");
    app.add_option("--ledger", g.ledger_path, "write (run) or read (stats) the stage ledger");
    app.add_option("--dedup-filter", g.filter_path, "dedup filter file to load/save");

    std::vector<std::string> inputs;
    std::string output;
    std::string out_dir = "out";
    uint64_t capacity = 0;
    double percentile = 5.0;
    bool strip_markup = false;
    bool emit_metrics = false;

    auto add_io = [&](CLI::App* cmd, bool with_output = true) {
        cmd->add_option("inputs", inputs, "input JSONL files (default: stdin)");
        if (with_output) cmd->add_option("-o,--output", output, "output path (default: stdout)");
    };

    auto* c_format = app.add_subcommand("format", "fix encoding and whitespace");
    add_io(c_format);
    c_format->add_flag("--strip-markup", strip_markup, "also strip wiki markup");

    auto* c_gate = app.add_subcommand("gate", "language and length gate");
    add_io(c_gate);
    auto* c_quality = app.add_subcommand("quality", "quality filter");
    add_io(c_quality);
    c_quality->add_flag("--metrics", emit_metrics, "emit metrics instead of filtering");
    auto* c_dedup = app.add_subcommand("dedup", "paragraph near-duplicate removal");
    add_io(c_dedup);
    c_dedup->add_option("--capacity", capacity, "expected paragraph count for a new filter");
    auto* c_redact = app.add_subcommand("redact", "PII redaction");
    add_io(c_redact);
    auto* c_license = app.add_subcommand("license", "license gate and canonicalization");
    add_io(c_license);
    auto* c_run = app.add_subcommand("run", "full pipeline");
    c_run->add_option("inputs", inputs, "input JSONL files");
    c_run->add_option("--out-dir", out_dir, "output directory, one file per (subset, source)");
    auto* c_stats = app.add_subcommand("stats", "corpus report from output-schema JSONL");
    add_io(c_stats);
    auto* c_calibrate = app.add_subcommand("calibrate", "percentile thresholds from a sample");
    add_io(c_calibrate);
    c_calibrate->add_option("--percentile", percentile, "tail percentile (default 5)");
    auto* c_fbuild = app.add_subcommand("filter-build", "build a dedup filter from inputs");
    c_fbuild->add_option("inputs", inputs, "input JSONL files");
    c_fbuild->add_option("--capacity", capacity, "expected paragraph count");
    auto* c_fquery = app.add_subcommand("filter-query", "query a dedup filter");
    add_io(c_fquery);

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = effective_config(g);
        uint64_t rejects = 0;

        if (c_format->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            pipeline::detail::parallel_for(in.docs.size(), cfg.workers, [&](size_t i) {
                std::string t = formatting::fix_encoding(in.docs[i].text);
                if (strip_markup) t = formatting::strip_markup(t);
                in.docs[i].text = formatting::fix_whitespace(t);
            });
            write_docs(output, in.docs);
        } else if (c_gate->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            auto tok = pipeline::make_tokenizer(cfg);
            auto cls = pipeline::make_classifier(cfg);
            std::vector<Document> kept;
            for (auto& d : in.docs) {
                if (cfg.metadata_language_prefilter && d.lang_tag && *d.lang_tag != cfg.language)
                    continue;
                auto pred = cls->predict(langid::prepare_for_langid(d.text));
                if (!(pred.language == cfg.language &&
                      pred.probability >= cfg.language_threshold))
                    continue;
                uint64_t n = tok->count(d.text);
                if (!langid::gate_length(n, cfg.min_tokens)) continue;
                d.num_tokens = n;
                kept.push_back(std::move(d));
            }
            write_docs(output, kept);
        } else if (c_quality->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            if (emit_metrics) {
                std::ostream* out = &std::cout;
                std::ofstream file;
                if (!output.empty() && output != "-") {
                    file.open(output, std::ios::binary);
                    if (!file) throw std::runtime_error("cannot write output: " + output);
                    out = &file;
                }
                for (const auto& d : in.docs) {
                    auto j = metrics_to_json(quality::compute_metrics(d.text));
                    j["id"] = d.id;
                    j["source"] = d.source;
                    *out << j.dump() << "\n";
                }
            } else {
                std::vector<Document> kept;
                for (auto& d : in.docs) {
                    auto m = quality::compute_metrics(d.text);
                    if (quality::evaluate(m, cfg.quality_thresholds).keep)
                        kept.push_back(std::move(d));
                }
                write_docs(output, kept);
            }
        } else if (c_dedup->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            auto filter = open_or_create_filter(g, cfg,
                                                capacity ? capacity : cfg.dedup_capacity);
            std::vector<Document> kept;
            for (const auto& d : in.docs)
                if (auto out = dedup::dedup_document(d, filter)) kept.push_back(std::move(*out));
            maybe_save_filter(g, filter);
            if (filter.over_capacity())
                std::cerr << "warning: dedup filter is over capacity; FP rate degrades\n";
            write_docs(output, kept);
        } else if (c_redact->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            auto table = pipeline::make_replacements(cfg);
            uint64_t redactions = 0;
            for (auto& d : in.docs) {
                auto r = pii::redact(d.text, table);
                redactions += r.total();
                d.text = std::move(r.text);
            }
            write_docs(output, in.docs);
            std::cerr << "redactions: " << redactions << "\n";
        } else if (c_license->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            std::vector<Document> kept;
            for (auto& d : in.docs) {
                std::vector<std::optional<licenses::LicenseId>> lics;
                for (const auto& raw : d.licenses)
                    lics.push_back(licenses::canonicalize(
                        raw, cfg.license_aliases.empty() ? nullptr : &cfg.license_aliases));
                if (!licenses::gate_license(lics).keep) continue;
                d.licenses.clear();
                for (const auto& lic : lics) d.licenses.push_back(lic->spdx_key);
                std::sort(d.licenses.begin(), d.licenses.end());
                d.licenses.erase(std::unique(d.licenses.begin(), d.licenses.end()),
                                 d.licenses.end());
                kept.push_back(std::move(d));
            }
            write_docs(output, kept);
        } else if (c_run->parsed()) {
            if (inputs.empty()) throw std::runtime_error("run requires input files");
            auto filter = open_or_create_filter(g, cfg, cfg.dedup_capacity);
            auto result = pipeline::run_files(inputs, out_dir, cfg, filter);
            maybe_save_filter(g, filter);
            maybe_write_ledger(g, result.pipeline.ledger);
            rejects = result.rejected_records;
            nlohmann::json summary;
            summary["output_files"] = result.output_files;
            summary["documents_out"] = result.pipeline.output.size();
            summary["rejected_records"] = result.rejected_records;
            summary["drops"] = result.pipeline.drops;
            nlohmann::json pii_counts = nlohmann::json::object();
            for (pii::Category c : pii::kAllCategories)
                pii_counts[pii::category_name(c)] =
                    result.pipeline.pii_counts[static_cast<size_t>(c)];
            summary["pii_redactions"] = pii_counts;
            std::cerr << summary.dump(2) << "\n";
        } else if (c_stats->parsed()) {
            auto in = read_inputs(inputs, true);
            rejects = in.rejected;
            StageLedger ledger;
            if (!g.ledger_path.empty()) {
                std::ifstream lin(g.ledger_path);
                if (!lin) throw std::runtime_error("cannot open ledger: " + g.ledger_path);
                nlohmann::json lj;
                lin >> lj;
                ledger = ledger_from_json(lj);
            }
            write_json(output, stats::emit_stats(in.docs, ledger));
        } else if (c_calibrate->parsed()) {
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            std::vector<quality::QualityMetrics> sample;
            sample.reserve(in.docs.size());
            for (const auto& d : in.docs) sample.push_back(quality::compute_metrics(d.text));
            auto t = quality::calibrate_thresholds(sample, percentile);
            write_json(output, thresholds_to_json(t));
        } else if (c_fbuild->parsed()) {
            if (g.filter_path.empty())
                throw std::runtime_error("filter-build requires --dedup-filter");
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            dedup::DedupFilter filter(cfg.dedup, capacity ? capacity : cfg.dedup_capacity);
            for (const auto& d : in.docs)
                for (const auto& chunk : dedup::split_paragraphs(d.text))
                    filter.is_duplicate_and_insert(
                        dedup::minhash_signature(chunk, filter.config()));
            filter.save_file(g.filter_path);
            std::cerr << "inserted " << filter.insert_count() << " paragraphs\n";
        } else if (c_fquery->parsed()) {
            if (g.filter_path.empty())
                throw std::runtime_error("filter-query requires --dedup-filter");
            auto filter = dedup::DedupFilter::load_file(g.filter_path);
            auto in = read_inputs(inputs, false);
            rejects = in.rejected;
            std::ostream* out = &std::cout;
            std::ofstream file;
            if (!output.empty() && output != "-") {
                file.open(output, std::ios::binary);
                if (!file) throw std::runtime_error("cannot write output: " + output);
                out = &file;
            }
            for (const auto& d : in.docs) {
                auto chunks = dedup::split_paragraphs(d.text);
                uint64_t dups = 0;
                for (const auto& chunk : chunks)
                    if (filter.contains(dedup::minhash_signature(chunk, filter.config())))
                        ++dups;
                nlohmann::json j;
                j["id"] = d.id;
                j["source"] = d.source;
                j["paragraphs"] = chunks.size();
                j["duplicate_paragraphs"] = dups;
                *out << j.dump() << "\n";
            }
        }

        if (rejects > 0) {
            std::cerr << "rejected malformed records: " << rejects << "\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
