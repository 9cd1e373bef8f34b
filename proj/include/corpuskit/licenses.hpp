#pragma once

// SPDX canonicalization and the corpus allow-list: 4 public-domain-equivalent,
// 12 attribution, 3 copyleft licenses. Anything else is Disallowed.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corpuskit::licenses {

enum class Category : uint8_t { PublicDomainEquivalent, Attribution, Copyleft, Disallowed };

struct Obligations {
    bool attribution = false;
    bool copyright_notice = false;
    bool share_alike = false;
    bool source_provision = false;

    bool operator==(const Obligations&) const = default;
};

struct LicenseId {
    std::string spdx_key;
    std::string canonical_url;
    Category category = Category::Disallowed;
    Obligations obligations;

    bool operator==(const LicenseId& o) const { return spdx_key == o.spdx_key; }
};

inline const std::vector<LicenseId>& allow_list() {
    static const std::vector<LicenseId>* table = [] {
        auto* v = new std::vector<LicenseId>();
        auto add = [&](std::string key, Category cat, bool attr, bool notice, bool sa, bool src) {
            v->push_back({key, "https://spdx.org/licenses/" + key + ".html", cat,
                          {attr, notice, sa, src}});
        };
        add("CC0-1.0", Category::PublicDomainEquivalent, false, false, false, false);
        add("Unlicense", Category::PublicDomainEquivalent, false, false, false, false);
        add("MIT-0", Category::PublicDomainEquivalent, false, false, false, false);
        add("0BSD", Category::PublicDomainEquivalent, false, false, false, false);
        add("MIT", Category::Attribution, true, true, false, false);
        add("BSD-2-Clause", Category::Attribution, true, true, false, false);
        add("BSD-2-Clause-FreeBSD", Category::Attribution, true, true, false, false);
        add("BSD-3-Clause", Category::Attribution, true, true, false, false);
        add("BSD-Source-Code", Category::Attribution, true, true, false, false);
        add("Apache-1.1", Category::Attribution, true, true, false, false);
        add("Apache-2.0", Category::Attribution, true, true, false, false);
        add("BSD-4-Clause-UC", Category::Attribution, true, true, false, false);
        add("BSD-4-Clause", Category::Attribution, true, true, false, false);
        add("CC-BY-2.0", Category::Attribution, true, true, false, false);
        add("CC-BY-3.0", Category::Attribution, true, true, false, false);
        add("CC-BY-4.0", Category::Attribution, true, true, false, false);
        add("CC-BY-SA-4.0", Category::Copyleft, true, true, true, false);
        add("EUPL-1.2", Category::Copyleft, true, true, true, true);
        add("Artistic-2.0", Category::Copyleft, true, true, true, true);
        return v;
    }();
    return *table;
}

namespace detail {

// Normalization used for alias matching: lowercase, separators to '-',
// trailing slashes and punctuation runs collapsed.
inline std::string normalize_key(std::string_view raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '.') s.push_back(static_cast<char>(std::tolower(u)));
        else if (!s.empty() && s.back() != '-') s.push_back('-');
    }
    while (!s.empty() && s.back() == '-') s.pop_back();
    while (!s.empty() && s.front() == '-') s.erase(s.begin());
    return s;
}

inline const std::unordered_map<std::string, std::string>& alias_table() {
    static const auto* table = [] {
        auto* m = new std::unordered_map<std::string, std::string>();
        auto alias = [&](std::string_view raw, std::string key) {
            (*m)[normalize_key(raw)] = std::move(key);
        };
        for (const auto& lic : allow_list()) {
            alias(lic.spdx_key, lic.spdx_key);
            alias(lic.canonical_url, lic.spdx_key);
            alias("https://spdx.org/licenses/" + lic.spdx_key, lic.spdx_key);
        }
        alias("Public Domain", "CC0-1.0");
        alias("Public Domain Mark", "CC0-1.0");
        alias("CC0", "CC0-1.0");
        alias("https://creativecommons.org/publicdomain/zero/1.0/", "CC0-1.0");
        alias("https://creativecommons.org/publicdomain/mark/1.0/", "CC0-1.0");
        alias("CC BY 2.0", "CC-BY-2.0");
        alias("CC BY 3.0", "CC-BY-3.0");
        alias("CC BY 4.0", "CC-BY-4.0");
        alias("CC-BY", "CC-BY-4.0");
        alias("https://creativecommons.org/licenses/by/2.0/", "CC-BY-2.0");
        alias("https://creativecommons.org/licenses/by/3.0/", "CC-BY-3.0");
        alias("https://creativecommons.org/licenses/by/4.0/", "CC-BY-4.0");
        alias("CC BY-SA 4.0", "CC-BY-SA-4.0");
        alias("CC-BY-SA", "CC-BY-SA-4.0");
        alias("https://creativecommons.org/licenses/by-sa/4.0/", "CC-BY-SA-4.0");
        alias("EUPL", "EUPL-1.2");
        alias("EUPL 1.2", "EUPL-1.2");
        alias("https://eupl.eu/1.2/en/", "EUPL-1.2");
        alias("Apache License 2.0", "Apache-2.0");
        alias("Apache 2.0", "Apache-2.0");
        alias("MIT License", "MIT");
        alias("The Unlicense", "Unlicense");
        alias("Artistic License 2.0", "Artistic-2.0");
        return m;
    }();
    return *table;
}

}  // namespace detail

inline const LicenseId* find(std::string_view spdx_key) {
    for (const auto& lic : allow_list())
        if (lic.spdx_key == spdx_key) return &lic;
    return nullptr;
}

// Maps a canonical SPDX URL (or bare key) back to its SPDX key.
inline std::optional<std::string> key_for_url(std::string_view url) {
    for (const auto& lic : allow_list())
        if (lic.canonical_url == url || lic.spdx_key == url) return lic.spdx_key;
    return std::nullopt;
}

// Case-insensitive, alias-aware mapping. Unknown identifiers yield nullopt,
// never a guess.
inline std::optional<LicenseId> canonicalize(std::string_view raw,
                                             const std::unordered_map<std::string, std::string>*
                                                 extra_aliases = nullptr) {
    std::string key = detail::normalize_key(raw);
    if (key.empty()) return std::nullopt;
    if (extra_aliases) {
        if (auto it = extra_aliases->find(key); it != extra_aliases->end())
            if (const auto* lic = find(it->second)) return *lic;
    }
    if (auto it = detail::alias_table().find(key); it != detail::alias_table().end())
        return *find(it->second);
    return std::nullopt;
}

struct GateResult {
    bool keep = false;
    // Most restrictive category across the list; meaningful only when kept.
    Category category = Category::Disallowed;
};

// Keep iff non-empty and every entry is a known allow-listed license.
inline GateResult gate_license(const std::vector<std::optional<LicenseId>>& lics) {
    GateResult r;
    if (lics.empty()) return r;
    Category worst = Category::PublicDomainEquivalent;
    for (const auto& lic : lics) {
        if (!lic || lic->category == Category::Disallowed) return r;
        worst = std::max(worst, lic->category,
                         [](Category a, Category b) { return static_cast<int>(a) < static_cast<int>(b); });
    }
    r.keep = true;
    r.category = worst;
    return r;
}

inline const char* category_name(Category c) {
    switch (c) {
        case Category::PublicDomainEquivalent: return "public_domain_equivalent";
        case Category::Attribution: return "attribution";
        case Category::Copyleft: return "copyleft";
        default: return "disallowed";
    }
}

}  // namespace corpuskit::licenses
