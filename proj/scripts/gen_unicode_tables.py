#!/usr/bin/env python3
"""Regenerates include/corpuskit/unicode_data.hpp from Python's unicodedata
and html.entities. Run manually when bumping the Unicode version."""

import html.entities
import sys
import unicodedata

MAX_CP = 0x110000

CLASS_MAP = {
    "Lu": "Lu", "Ll": "Ll", "Lt": "Lo_", "Lm": "Lo_", "Lo": "Lo_",
    "Mn": "Mark", "Mc": "Mark", "Me": "Mark",
    "Nd": "Nd", "Nl": "No_", "No": "No_",
    "Pc": "P", "Pd": "P", "Ps": "P", "Pe": "P", "Pi": "P", "Pf": "P", "Po": "P",
    "Zs": "Zs", "Zl": "Other", "Zp": "Other",
    "Sm": "S", "Sc": "S", "Sk": "S", "So": "S",
    "Cc": "Other", "Cf": "Other", "Cs": "Other", "Co": "Other", "Cn": "Other",
}


def category_ranges():
    ranges = []
    prev = None
    for cp in range(MAX_CP):
        cls = CLASS_MAP[unicodedata.category(chr(cp))]
        if cls != prev:
            ranges.append((cp, cls))
            prev = cls
    return ranges


def canonical_decomp(cp):
    # Fully expanded canonical decomposition, excluding Hangul (algorithmic).
    if 0xAC00 <= cp <= 0xD7A3:
        return None
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    out = []
    for part in d.split():
        sub = int(part, 16)
        rec = canonical_decomp(sub)
        out.extend(rec if rec else [sub])
    return out


def esc_string(s):
    return "".join("\\x%02x" % b for b in s.encode("utf-8"))


def main(path):
    out = []
    w = out.append
    w("// Generated by scripts/gen_unicode_tables.py -- do not edit.")
    w("// Unicode %s, HTML5 entity table from CPython." % unicodedata.unidata_version)
    w("#pragma once")
    w("#include <cstdint>")
    w("#include <cstddef>")
    w("")
    w("namespace corpuskit::unicode_data {")
    w("")
    w("enum class CharClass : uint8_t { Lu, Ll, Lo_, Mark, Nd, No_, P, Zs, S, Other };")
    w("")

    ranges = category_ranges()
    w("struct ClassRange { uint32_t start; CharClass cls; };")
    w("inline constexpr ClassRange kClassRanges[] = {")
    for start, cls in ranges:
        w("    {0x%X, CharClass::%s}," % (start, cls))
    w("};")
    w("inline constexpr size_t kClassRangeCount = %d;" % len(ranges))
    w("")

    # Canonical decompositions (fully expanded, max length 4 observed).
    decomps = {}
    maxlen = 0
    for cp in range(MAX_CP):
        d = canonical_decomp(cp)
        if d:
            decomps[cp] = d
            maxlen = max(maxlen, len(d))
    w("struct Decomp { uint32_t cp; uint8_t len; uint32_t to[%d]; };" % maxlen)
    w("inline constexpr Decomp kCanonicalDecomp[] = {")
    for cp in sorted(decomps):
        d = decomps[cp]
        padded = d + [0] * (maxlen - len(d))
        w("    {0x%X, %d, {%s}}," % (cp, len(d), ", ".join("0x%X" % x for x in padded)))
    w("};")
    w("inline constexpr size_t kCanonicalDecompCount = %d;" % len(decomps))
    w("")

    # Combining classes.
    ccc = [(cp, unicodedata.combining(chr(cp))) for cp in range(MAX_CP)
           if unicodedata.combining(chr(cp)) != 0]
    w("struct Ccc { uint32_t cp; uint8_t ccc; };")
    w("inline constexpr Ccc kCombiningClass[] = {")
    for cp, c in ccc:
        w("    {0x%X, %d}," % (cp, c))
    w("};")
    w("inline constexpr size_t kCombiningClassCount = %d;" % len(ccc))
    w("")

    # Primary composites: pair decompositions that NFC actually re-composes.
    pairs = []
    for cp, d in sorted(decomps.items()):
        raw = unicodedata.decomposition(chr(cp))
        parts = [int(p, 16) for p in raw.split()]
        if len(parts) != 2:
            continue
        a, b = parts
        if unicodedata.combining(chr(a)) != 0:
            continue
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            pairs.append((a, b, cp))
    pairs.sort()
    w("struct CompPair { uint32_t first; uint32_t second; uint32_t composed; };")
    w("inline constexpr CompPair kCompPairs[] = {")
    for a, b, c in pairs:
        w("    {0x%X, 0x%X, 0x%X}," % (a, b, c))
    w("};")
    w("inline constexpr size_t kCompPairCount = %d;" % len(pairs))
    w("")

    # Fullwidth/halfwidth forms -> compatibility equivalents.
    width = []
    for cp in range(MAX_CP):
        d = unicodedata.decomposition(chr(cp))
        if d.startswith("<wide>") or d.startswith("<narrow>"):
            tgt = "".join(chr(int(p, 16)) for p in d.split()[1:])
            width.append((cp, tgt))
    w("struct Mapping { uint32_t cp; const char* to; };")
    w("inline constexpr Mapping kWidthMap[] = {")
    for cp, tgt in width:
        w('    {0x%X, "%s"},' % (cp, esc_string(tgt)))
    w("};")
    w("inline constexpr size_t kWidthMapCount = %d;" % len(width))
    w("")

    # Latin ligatures (Alphabetic Presentation Forms).
    ligs = []
    for cp in range(0xFB00, 0xFB07):
        d = unicodedata.decomposition(chr(cp))
        tgt = "".join(chr(int(p, 16)) for p in d.split()[1:])
        ligs.append((cp, tgt))
    w("inline constexpr Mapping kLigatureMap[] = {")
    for cp, tgt in ligs:
        w('    {0x%X, "%s"},' % (cp, esc_string(tgt)))
    w("};")
    w("inline constexpr size_t kLigatureMapCount = %d;" % len(ligs))
    w("")

    # HTML5 named entities (semicolon-terminated forms only).
    ents = sorted((name[:-1], val) for name, val in html.entities.html5.items()
                  if name.endswith(";"))
    w("struct Entity { const char* name; const char* value; };")
    w("inline constexpr Entity kHtmlEntities[] = {")
    for name, val in ents:
        w('    {"%s", "%s"},' % (name, esc_string(val)))
    w("};")
    w("inline constexpr size_t kHtmlEntityCount = %d;" % len(ents))
    w("")
    w("}  // namespace corpuskit::unicode_data")
    w("")

    with open(path, "w") as f:
        f.write("\n".join(out))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/corpuskit/unicode_data.hpp")
