#include "doctest.h"

#include <string>
#include <vector>

#include "corpuskit/formatting.hpp"
#include "corpuskit/unicode.hpp"
#include "fixtures.hpp"

using namespace corpuskit;

namespace {

// simple xorshift for reproducible random strings
struct Rng {
    uint64_t s;
    uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
};

std::string random_mutated(Rng& rng, size_t len) {
    static const char* pieces[] = {
        "f&auml;hrt", "ﬁnden", "für", "fÃ¼r", "&amp;", "&#228;", "&#x00E4;", "„Zitat“",
        "a  \t b", "Zei-\nle", "WORT-\nTeil", "x\n\n\n\ny", "\x1b[31m", "\x07", "ＡＢ",
        "abc ", "über\n", "...", "— ", "123 ",
    };
    std::string out;
    while (out.size() < len) {
        uint64_t r = rng.next();
        out += pieces[r % (sizeof(pieces) / sizeof(pieces[0]))];
        if (r % 7 == 0) out.push_back(static_cast<char>(r % 0x60 + 0x20));
        if (r % 13 == 0) out.push_back(static_cast<char>(r % 256));  // raw byte noise
    }
    return out;
}

size_t paragraph_count(const std::string& s) {
    size_t count = 0;
    bool in_para = false;
    size_t line_start = 0;
    auto line_blank = [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i)
            if (s[i] != ' ' && s[i] != '\t') return false;
        return true;
    };
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            bool blank = line_blank(line_start, i);
            if (!blank && !in_para) {
                ++count;
                in_para = true;
            }
            if (blank) in_para = false;
            line_start = i + 1;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("fix_encoding: entity decoding and NFC") {
    CHECK(formatting::fix_encoding("f&auml;hrt") == "fährt");
    CHECK(formatting::fix_encoding("abc") == "abc");
    CHECK(formatting::fix_encoding("a &amp; b") == "a & b");
    CHECK(formatting::fix_encoding("&#228;") == "ä");
    CHECK(formatting::fix_encoding("&#x00E4;") == "ä");
    // double-escaped entity still resolves (internal fixpoint)
    CHECK(formatting::fix_encoding("&amp;auml;") == "ä");
    // unknown entity left alone
    CHECK(formatting::fix_encoding("&nosuchentity;") == "&nosuchentity;");
}

TEST_CASE("fix_encoding: ligatures and width mapping") {
    CHECK(formatting::fix_encoding("ﬁnden") == "finden");
    CHECK(formatting::fix_encoding("Auﬂage") == "Auflage");
    CHECK(formatting::fix_encoding("ＡＢＣ") == "ABC");
}

TEST_CASE("fix_encoding: mojibake repair") {
    // "für" mis-decoded as latin-1: C3 BC read as two chars
    CHECK(formatting::fix_encoding("f\xC3\x83\xC2\xBCr") == "für");
    CHECK(formatting::fix_encoding("fÃ¼r die Stadt") == "für die Stadt");
}

TEST_CASE("fix_encoding: controls removed, newline kept, bad bytes replaced") {
    formatting::EncodingReport rep;
    std::string out = formatting::fix_encoding(std::string("a\x07" "b\nc\x1b" "[31md"), &rep);
    CHECK(out == "ab\ncd");
    CHECK(rep.controls_removed >= 2);

    formatting::EncodingReport rep2;
    std::string bad = "ok\xFF\xFEok";
    std::string fixed = formatting::fix_encoding(bad, &rep2);
    CHECK(rep2.byte_replacements == 2);
    CHECK(fixed.find("ok") == 0);
    // output must be valid UTF-8
    auto decoded = unicode::decode_utf8(fixed);
    CHECK(decoded.replacements == 0);
}

TEST_CASE("fix_encoding: quote normalization") {
    CHECK(formatting::fix_encoding("„Hallo“ ‚Welt‘") == "\"Hallo\" 'Welt'");
    CHECK(formatting::fix_encoding("«guillemets»") == "\"guillemets\"");
}

TEST_CASE("fix_encoding: NFC composition") {
    // a + combining diaeresis composes
    CHECK(formatting::fix_encoding("a\xCC\x88") == "ä");
}

TEST_CASE("fix_whitespace: named transformations") {
    CHECK(formatting::fix_whitespace("a  \t b") == "a b");
    CHECK(formatting::fix_whitespace("Zei-\nle") == "Zeile");
    CHECK(formatting::fix_whitespace("a\n\n\n\nb") == "a\n\nb");
    CHECK(formatting::fix_whitespace("  geführt \n") == "geführt");
    // uppercase continuation keeps the hyphen (likely a real compound)
    CHECK(formatting::fix_whitespace("deutsch-\nFranzösisch") == "deutsch-Französisch");
}

TEST_CASE("fix_whitespace: 40-case fixture of hyphenation and newline caps") {
    const auto& cases = fixtures::whitespace_cases();
    REQUIRE(cases.size() == 40);
    for (const auto& [in, want] : cases) {
        CAPTURE(in);
        CHECK(formatting::fix_whitespace(in) == want);
    }
}

TEST_CASE("fix_whitespace preserves paragraph count") {
    Rng rng{42};
    for (int i = 0; i < 200; ++i) {
        std::string s = formatting::fix_encoding(random_mutated(rng, 120));
        std::string fixed = formatting::fix_whitespace(s);
        CHECK(paragraph_count(s) == paragraph_count(fixed));
    }
}

TEST_CASE("formatting idempotence on random mutated strings") {
    Rng rng{7};
    for (int i = 0; i < 2000; ++i) {
        std::string raw = random_mutated(rng, 64);
        std::string once = formatting::fix_encoding(raw);
        CHECK(formatting::fix_encoding(once) == once);
        std::string ws = formatting::fix_whitespace(once);
        CHECK(formatting::fix_whitespace(ws) == ws);
    }
}

TEST_CASE("strip_markup: wiki syntax removed, markdown intact") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"[[Berlin|die Hauptstadt]]", "die Hauptstadt"},
        {"[[Berlin]]", "Berlin"},
        {"{{Infobox|x=1}}", ""},
        {"a [[b]] c", "a b c"},
        {"{{outer{{inner}}}}", ""},
        {"[[a|[[b]]]]", "b"},
        {"# Titel", "# Titel"},
        {"*fett* und `code`", "*fett* und `code`"},
        {"- Liste", "- Liste"},
        {"", ""},
    };
    for (const auto& [in, want] : cases) {
        CAPTURE(in);
        size_t warnings = 0;
        CHECK(formatting::strip_markup(in, &warnings) == want);
        // balanced inputs produce no warnings
        CHECK(warnings == 0);
    }
    size_t warnings = 0;
    std::string out = formatting::strip_markup("a [[kaputt\nb", &warnings);
    CHECK(warnings == 1);
    CHECK(out == "a \nb");
    CHECK(out.find("[[") == std::string::npos);
}
