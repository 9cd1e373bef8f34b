#pragma once

// Newline-delimited record I/O. Output records carry exactly the corpus
// schema fields (id, source, subset, text, license, num_tokens, perplexity,
// ocr_score); the license field is a list of canonical SPDX URLs. Input
// records may additionally carry lang_tag and a string-or-list license of
// raw spellings. Malformed lines are counted, never silently dropped.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpuskit/document.hpp"
#include "corpuskit/licenses.hpp"

namespace corpuskit::jsonl {

struct ParseOutcome {
    std::optional<Document> doc;
    std::string error;  // non-empty when doc is absent
};

// Raw input record: license spellings are kept verbatim for the license
// stage; canonical SPDX URLs from our own output are accepted back as-is.
inline ParseOutcome parse_record(const std::string& line) {
    ParseOutcome out;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        out.error = "not a JSON object";
        return out;
    }
    Document d;
    try {
        if (!j.contains("id") || !j.at("id").is_string()) {
            out.error = "missing id";
            return out;
        }
        d.id = j.at("id").get<std::string>();
        if (!j.contains("source") || !j.at("source").is_string()) {
            out.error = "missing source";
            return out;
        }
        d.source = j.at("source").get<std::string>();
        if (!j.contains("text") || !j.at("text").is_string()) {
            out.error = "missing text";
            return out;
        }
        d.text = j.at("text").get<std::string>();
        if (j.contains("subset") && j.at("subset").is_string()) {
            auto dom = domain_from_name(j.at("subset").get<std::string>());
            if (!dom) {
                out.error = "unknown subset: " + j.at("subset").get<std::string>();
                return out;
            }
            d.subset = *dom;
        }
        if (j.contains("license")) {
            const auto& lic = j.at("license");
            if (lic.is_string()) {
                d.licenses.push_back(lic.get<std::string>());
            } else if (lic.is_array()) {
                for (const auto& item : lic) {
                    if (!item.is_string()) {
                        out.error = "license list entry is not a string";
                        return out;
                    }
                    d.licenses.push_back(item.get<std::string>());
                }
            } else if (!lic.is_null()) {
                out.error = "license field is neither string nor list";
                return out;
            }
        }
        if (j.contains("num_tokens") && j.at("num_tokens").is_number_unsigned())
            d.num_tokens = j.at("num_tokens").get<uint64_t>();
        if (j.contains("perplexity") && j.at("perplexity").is_number())
            d.perplexity = j.at("perplexity").get<double>();
        if (j.contains("ocr_score") && j.at("ocr_score").is_number())
            d.ocr_score = j.at("ocr_score").get<double>();
        if (j.contains("lang_tag") && j.at("lang_tag").is_string())
            d.lang_tag = j.at("lang_tag").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        out.error = e.what();
        return out;
    }
    out.doc = std::move(d);
    return out;
}

// Serializes a finished document. Licenses are emitted as canonical SPDX
// URLs when the key is in the allow-list, verbatim otherwise (pre-gate dumps).
inline nlohmann::json to_json(const Document& d) {
    nlohmann::json j;
    j["id"] = d.id;
    j["source"] = d.source;
    j["subset"] = domain_name(d.subset);
    j["text"] = d.text;
    nlohmann::json lic = nlohmann::json::array();
    for (const auto& key : d.licenses) {
        const licenses::LicenseId* known = licenses::find(key);
        lic.push_back(known ? known->canonical_url : key);
    }
    j["license"] = lic;
    if (d.num_tokens) j["num_tokens"] = *d.num_tokens;
    else j["num_tokens"] = nullptr;
    if (d.perplexity) j["perplexity"] = *d.perplexity;
    else j["perplexity"] = nullptr;
    if (d.ocr_score) j["ocr_score"] = *d.ocr_score;
    else j["ocr_score"] = nullptr;
    return j;
}

inline std::string serialize_record(const Document& d) { return to_json(d).dump(); }

// Reverse of serialize_record: canonical URLs map back to SPDX keys.
inline ParseOutcome parse_output_record(const std::string& line) {
    ParseOutcome out = parse_record(line);
    if (!out.doc) return out;
    for (auto& key : out.doc->licenses) {
        if (auto spdx = licenses::key_for_url(key)) key = *spdx;
    }
    return out;
}

struct ReadResult {
    std::vector<Document> docs;
    uint64_t rejected = 0;
    std::vector<std::string> errors;  // first few parse errors, for reporting
};

inline ReadResult read_stream(std::istream& in, bool from_output_schema = false) {
    ReadResult r;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto outcome = from_output_schema ? parse_output_record(line) : parse_record(line);
        if (outcome.doc) {
            r.docs.push_back(std::move(*outcome.doc));
        } else {
            ++r.rejected;
            if (r.errors.size() < 20) r.errors.push_back(outcome.error);
        }
    }
    return r;
}

inline void write_stream(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << serialize_record(d) << '\n';
}

}  // namespace corpuskit::jsonl
