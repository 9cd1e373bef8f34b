#pragma once

// Machine-readable corpus report: per-source retention, domain shares,
// context-length partition table, license category cross-tab, and the
// cumulative token-by-length curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpuskit/document.hpp"
#include "corpuskit/licenses.hpp"

namespace corpuskit::stats {

struct CategoryCell {
    uint64_t docs = 0;
    uint64_t tokens = 0;
};

// Token/doc counts per license category, per (category x domain), and per
// individual license. A multi-license document counts once, under its most
// restrictive member.
struct ObligationReport {
    std::array<CategoryCell, 3> by_category{};  // PD, Attribution, Copyleft
    std::array<std::array<CategoryCell, 7>, 3> by_category_domain{};
    std::map<std::string, CategoryCell> by_license;  // every listed license counted
    uint64_t unknown_license_docs = 0;
};

template <typename DocRange>
ObligationReport obligation_report(const DocRange& docs) {
    ObligationReport r;
    for (const Document& doc : docs) {
        uint64_t toks = doc.num_tokens.value_or(0);
        licenses::Category worst = licenses::Category::PublicDomainEquivalent;
        bool known = !doc.licenses.empty();
        for (const auto& key : doc.licenses) {
            const auto* lic = licenses::find(key);
            if (!lic) {
                known = false;
                break;
            }
            if (static_cast<int>(lic->category) > static_cast<int>(worst)) worst = lic->category;
            auto& cell = r.by_license[key];
            cell.docs += 1;
            cell.tokens += toks;
        }
        if (!known) {
            ++r.unknown_license_docs;
            continue;
        }
        size_t c = static_cast<size_t>(worst);
        r.by_category[c].docs += 1;
        r.by_category[c].tokens += toks;
        auto& cell = r.by_category_domain[c][static_cast<size_t>(doc.subset)];
        cell.docs += 1;
        cell.tokens += toks;
    }
    return r;
}

// Points on the cumulative-proportion-of-tokens-by-document-length curve:
// docs sorted by num_tokens ascending, each point (length, cumulative token
// fraction up to and including that length).
template <typename DocRange>
std::vector<std::pair<uint64_t, double>> token_length_curve(const DocRange& docs) {
    std::vector<uint64_t> lengths;
    uint64_t total = 0;
    for (const Document& doc : docs) {
        if (!doc.num_tokens) continue;
        lengths.push_back(*doc.num_tokens);
        total += *doc.num_tokens;
    }
    std::sort(lengths.begin(), lengths.end());
    std::vector<std::pair<uint64_t, double>> curve;
    if (total == 0) return curve;
    uint64_t cum = 0;
    for (size_t i = 0; i < lengths.size(); ++i) {
        cum += lengths[i];
        if (i + 1 < lengths.size() && lengths[i + 1] == lengths[i]) continue;
        curve.emplace_back(lengths[i], static_cast<double>(cum) / static_cast<double>(total));
    }
    return curve;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

template <typename DocRange>
nlohmann::json emit_stats(const DocRange& docs, const StageLedger& ledger) {
    nlohmann::json j;

    // per-source retention, percent remaining of initial at each stage
    nlohmann::json retention = nlohmann::json::object();
    for (const auto& [src, cells] : ledger.per_source) {
        nlohmann::json row = nlohmann::json::object();
        for (Stage s : kAllStages) {
            row[stage_name(s)] = {
                {"docs", cells[static_cast<size_t>(s)].docs_out},
                {"tokens", cells[static_cast<size_t>(s)].tokens_out},
                {"docs_pct", round2(ledger.docs_retention(src, s))},
                {"tokens_pct", round2(ledger.tokens_retention(src, s))},
            };
        }
        retention[src] = row;
    }
    j["retention"] = retention;
    j["rejected_records"] = ledger.rejected_records;

    // domain shares
    std::array<CategoryCell, 7> domains{};
    uint64_t total_docs = 0, total_tokens = 0;
    for (const Document& d : docs) {
        auto& cell = domains[static_cast<size_t>(d.subset)];
        cell.docs += 1;
        cell.tokens += d.num_tokens.value_or(0);
        total_docs += 1;
        total_tokens += d.num_tokens.value_or(0);
    }
    nlohmann::json dom = nlohmann::json::object();
    for (ThematicDomain d : kAllDomains) {
        const auto& cell = domains[static_cast<size_t>(d)];
        dom[domain_name(d)] = {
            {"docs", cell.docs},
            {"tokens", cell.tokens},
            {"token_share",
             total_tokens ? static_cast<double>(cell.tokens) / static_cast<double>(total_tokens)
                          : 0.0},
        };
    }
    j["domains"] = dom;

    // context-length partitions
    auto partitions = partition_by_context_length(docs);
    nlohmann::json parts = nlohmann::json::object();
    for (ThematicDomain d : kAllDomains) {
        nlohmann::json row = nlohmann::json::object();
        for (ContextPartition p : kAllPartitions) {
            const auto& cell = partitions.cell(d, p);
            row[partition_name(p)] = {{"docs", cell.docs}, {"tokens", cell.tokens}};
        }
        parts[domain_name(d)] = row;
    }
    j["partitions"] = parts;
    j["unclassifiable"] = partitions.unclassifiable;

    // license cross-tab
    auto obligations = obligation_report(docs);
    nlohmann::json lic = nlohmann::json::object();
    const char* cats[3] = {"public_domain_equivalent", "attribution", "copyleft"};
    for (size_t c = 0; c < 3; ++c) {
        nlohmann::json row;
        row["docs"] = obligations.by_category[c].docs;
        row["tokens"] = obligations.by_category[c].tokens;
        nlohmann::json per_domain = nlohmann::json::object();
        for (ThematicDomain d : kAllDomains) {
            const auto& cell = obligations.by_category_domain[c][static_cast<size_t>(d)];
            per_domain[domain_name(d)] = {{"docs", cell.docs}, {"tokens", cell.tokens}};
        }
        row["by_domain"] = per_domain;
        lic[cats[c]] = row;
    }
    nlohmann::json per_license = nlohmann::json::object();
    for (const auto& [key, cell] : obligations.by_license)
        per_license[key] = {{"docs", cell.docs}, {"tokens", cell.tokens}};
    lic["by_license"] = per_license;
    lic["unknown_license_docs"] = obligations.unknown_license_docs;
    j["licenses"] = lic;

    // cumulative token-by-length curve
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [len, frac] : token_length_curve(docs))
        curve.push_back({{"length", len}, {"cumulative_token_fraction", frac}});
    j["token_length_curve"] = curve;

    j["totals"] = {{"docs", total_docs}, {"tokens", total_tokens}};
    return j;
}

}  // namespace corpuskit::stats
