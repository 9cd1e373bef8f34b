#pragma once

// Document data model, domain taxonomy, stage ledger, and the context-length
// partitioning used for reporting. All types are immutable value objects once
// built and safe to share across workers.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpuskit/licenses.hpp"

namespace corpuskit {

enum class ThematicDomain : uint8_t { Web, Political, Legal, News, Economics, Cultural, Scientific };

inline constexpr std::array<ThematicDomain, 7> kAllDomains = {
    ThematicDomain::Web,      ThematicDomain::Political, ThematicDomain::Legal,
    ThematicDomain::News,     ThematicDomain::Economics, ThematicDomain::Cultural,
    ThematicDomain::Scientific};

inline const char* domain_name(ThematicDomain d) {
    switch (d) {
        case ThematicDomain::Web: return "web";
        case ThematicDomain::Political: return "political";
        case ThematicDomain::Legal: return "legal";
        case ThematicDomain::News: return "news";
        case ThematicDomain::Economics: return "economics";
        case ThematicDomain::Cultural: return "cultural";
        case ThematicDomain::Scientific: return "scientific";
    }
    return "web";
}

inline std::optional<ThematicDomain> domain_from_name(std::string_view name) {
    for (ThematicDomain d : kAllDomains)
        if (name == domain_name(d)) return d;
    return std::nullopt;
}

struct Document {
    std::string id;      // unique within source
    std::string source;  // source-dataset key
    ThematicDomain subset = ThematicDomain::Web;
    std::string text;
    std::vector<std::string> licenses;  // canonical SPDX keys once gated
    std::optional<uint64_t> num_tokens;
    std::optional<double> perplexity;
    std::optional<double> ocr_score;
    std::optional<std::string> lang_tag;  // input metadata, not serialized
};

// Which pipeline gates a document claims to have passed; drives validation.
struct PassedStages {
    bool formatted = false;
    bool length_gate = false;
    bool license_gate = false;
};

inline std::vector<std::string> validate_document(const Document& doc,
                                                  const PassedStages& passed = {}) {
    std::vector<std::string> violations;
    if (passed.formatted) {
        for (size_t i = 0; i < doc.text.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(doc.text[i]);
            if (c < 0x20 && c != '\n') {
                violations.push_back("text contains raw control character");
                break;
            }
        }
    }
    if (passed.length_gate) {
        if (!doc.num_tokens)
            violations.push_back("num_tokens missing after length gate");
        else if (*doc.num_tokens < 32)
            violations.push_back("num_tokens below 32 after length gate");
    }
    if (passed.license_gate) {
        if (doc.licenses.empty())
            violations.push_back("license list empty after license gate");
        for (const auto& key : doc.licenses)
            if (!licenses::find(key))
                violations.push_back("license not in allow-list: " + key);
    }
    if (doc.ocr_score && (*doc.ocr_score < 0.0 || *doc.ocr_score > 1.0))
        violations.push_back("ocr_score outside [0,1]");
    if (doc.perplexity && *doc.perplexity < 0.0)
        violations.push_back("perplexity negative");
    return violations;
}

// --- Context-length partitioning (disjoint buckets on num_tokens) ----------

enum class ContextPartition : uint8_t { UpTo2048, UpTo8192, UpTo32768, Over32768 };

inline constexpr std::array<ContextPartition, 4> kAllPartitions = {
    ContextPartition::UpTo2048, ContextPartition::UpTo8192, ContextPartition::UpTo32768,
    ContextPartition::Over32768};

inline const char* partition_name(ContextPartition p) {
    switch (p) {
        case ContextPartition::UpTo2048: return "<=2048";
        case ContextPartition::UpTo8192: return "<=8192";
        case ContextPartition::UpTo32768: return "<=32768";
        case ContextPartition::Over32768: return ">32768";
    }
    return "<=2048";
}

inline ContextPartition partition_for(uint64_t num_tokens) {
    if (num_tokens <= 2048) return ContextPartition::UpTo2048;
    if (num_tokens <= 8192) return ContextPartition::UpTo8192;
    if (num_tokens <= 32768) return ContextPartition::UpTo32768;
    return ContextPartition::Over32768;
}

struct PartitionCell {
    uint64_t docs = 0;
    uint64_t tokens = 0;
};

struct PartitionReport {
    // cells[domain][partition]
    std::array<std::array<PartitionCell, 4>, 7> cells{};
    std::vector<std::string> unclassifiable;  // (source,id) of docs without num_tokens

    PartitionCell& cell(ThematicDomain d, ContextPartition p) {
        return cells[static_cast<size_t>(d)][static_cast<size_t>(p)];
    }
    const PartitionCell& cell(ThematicDomain d, ContextPartition p) const {
        return cells[static_cast<size_t>(d)][static_cast<size_t>(p)];
    }
};

template <typename DocRange>
PartitionReport partition_by_context_length(const DocRange& docs) {
    PartitionReport report;
    for (const Document& doc : docs) {
        if (!doc.num_tokens) {
            report.unclassifiable.push_back(doc.source + "/" + doc.id);
            continue;
        }
        auto& c = report.cell(doc.subset, partition_for(*doc.num_tokens));
        c.docs += 1;
        c.tokens += *doc.num_tokens;
    }
    return report;
}

// --- Per-source, per-stage accounting (retention report shape) --------------

enum class Stage : uint8_t { Initial, Filtered, Deduplicated, Final };

inline constexpr std::array<Stage, 4> kAllStages = {Stage::Initial, Stage::Filtered,
                                                    Stage::Deduplicated, Stage::Final};

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Initial: return "initial";
        case Stage::Filtered: return "filtered";
        case Stage::Deduplicated: return "deduplicated";
        case Stage::Final: return "final";
    }
    return "initial";
}

struct LedgerCell {
    uint64_t docs_in = 0;
    uint64_t docs_out = 0;
    uint64_t tokens_in = 0;
    uint64_t tokens_out = 0;
};

struct StageLedger {
    std::map<std::string, std::array<LedgerCell, 4>> per_source;
    uint64_t rejected_records = 0;  // malformed inputs, counted never dropped silently

    LedgerCell& cell(const std::string& source, Stage stage) {
        return per_source[source][static_cast<size_t>(stage)];
    }

    // Remaining-of-initial percentage for docs at a given stage.
    double docs_retention(const std::string& source, Stage stage) const {
        auto it = per_source.find(source);
        if (it == per_source.end()) return 0.0;
        uint64_t initial = it->second[0].docs_in;
        if (initial == 0) return 0.0;
        return 100.0 * static_cast<double>(it->second[static_cast<size_t>(stage)].docs_out) /
               static_cast<double>(initial);
    }

    double tokens_retention(const std::string& source, Stage stage) const {
        auto it = per_source.find(source);
        if (it == per_source.end()) return 0.0;
        uint64_t initial = it->second[0].tokens_in;
        if (initial == 0) return 0.0;
        return 100.0 * static_cast<double>(it->second[static_cast<size_t>(stage)].tokens_out) /
               static_cast<double>(initial);
    }
};

}  // namespace corpuskit
