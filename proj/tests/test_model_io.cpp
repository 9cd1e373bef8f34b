#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corpuskit/config.hpp"
#include "corpuskit/document.hpp"
#include "corpuskit/jsonl.hpp"

using namespace corpuskit;

TEST_CASE("validate_document examples") {
    Document ok;
    ok.id = "a";
    ok.source = "s";
    ok.text = "Ein Text.";
    ok.num_tokens = 40;
    ok.licenses = {"CC0-1.0"};
    PassedStages all{true, true, true};
    CHECK(validate_document(ok, all).empty());

    Document short_doc = ok;
    short_doc.num_tokens = 31;
    auto v1 = validate_document(short_doc, all);
    REQUIRE(v1.size() == 1);
    CHECK(v1[0] == "num_tokens below 32 after length gate");

    Document bad_license = ok;
    bad_license.licenses = {"CC-BY-NC-4.0"};
    auto v2 = validate_document(bad_license, all);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0] == "license not in allow-list: CC-BY-NC-4.0");

    Document control = ok;
    control.text = "a\x07" "b";
    CHECK(validate_document(control, all).size() == 1);
    CHECK(validate_document(control, {}).empty());  // pre-formatting, no claim

    Document bad_ocr = ok;
    bad_ocr.ocr_score = 1.5;
    CHECK(validate_document(bad_ocr, {}).size() == 1);
    Document bad_ppl = ok;
    bad_ppl.perplexity = -1.0;
    CHECK(validate_document(bad_ppl, {}).size() == 1);
}

TEST_CASE("partition boundaries") {
    CHECK(partition_for(1) == ContextPartition::UpTo2048);
    CHECK(partition_for(2048) == ContextPartition::UpTo2048);
    CHECK(partition_for(2049) == ContextPartition::UpTo8192);
    CHECK(partition_for(8192) == ContextPartition::UpTo8192);
    CHECK(partition_for(8193) == ContextPartition::UpTo32768);
    CHECK(partition_for(32768) == ContextPartition::UpTo32768);
    CHECK(partition_for(32769) == ContextPartition::Over32768);

    std::vector<Document> docs(4);
    docs[0].num_tokens = 100;
    docs[0].subset = ThematicDomain::Legal;
    docs[1].num_tokens = 9000;
    docs[1].subset = ThematicDomain::Legal;
    docs[2].num_tokens = 40000;
    docs[2].subset = ThematicDomain::Web;
    docs[3].source = "s";
    docs[3].id = "x";  // no num_tokens
    auto report = partition_by_context_length(docs);
    CHECK(report.cell(ThematicDomain::Legal, ContextPartition::UpTo2048).docs == 1);
    CHECK(report.cell(ThematicDomain::Legal, ContextPartition::UpTo2048).tokens == 100);
    CHECK(report.cell(ThematicDomain::Legal, ContextPartition::UpTo32768).docs == 1);
    CHECK(report.cell(ThematicDomain::Web, ContextPartition::Over32768).docs == 1);
    REQUIRE(report.unclassifiable.size() == 1);
    CHECK(report.unclassifiable[0] == "s/x");
}

TEST_CASE("ledger retention math") {
    StageLedger ledger;
    ledger.cell("quelle", Stage::Initial) = {100, 100, 5000, 5000};
    ledger.cell("quelle", Stage::Filtered) = {100, 60, 5000, 3000};
    ledger.cell("quelle", Stage::Deduplicated) = {60, 55, 3000, 2600};
    ledger.cell("quelle", Stage::Final) = {55, 50, 2600, 2500};
    CHECK(ledger.docs_retention("quelle", Stage::Initial) == 100.0);
    CHECK(ledger.docs_retention("quelle", Stage::Filtered) == 60.0);
    CHECK(ledger.docs_retention("quelle", Stage::Final) == 50.0);
    CHECK(ledger.tokens_retention("quelle", Stage::Final) == 50.0);
    CHECK(ledger.docs_retention("fehlt", Stage::Final) == 0.0);
}

TEST_CASE("jsonl round trip preserves every field including nulls") {
    Document d;
    d.id = "doc-1";
    d.source = "quelle";
    d.subset = ThematicDomain::Cultural;
    d.text = "Zeile eins.\nZeile „zwei“ mit ü.";
    d.licenses = {"CC-BY-4.0", "MIT"};
    d.num_tokens = 7;
    d.perplexity = 123.5;
    d.ocr_score = 0.97;

    std::string line = jsonl::serialize_record(d);
    auto back = jsonl::parse_output_record(line);
    REQUIRE(back.doc);
    CHECK(back.doc->id == d.id);
    CHECK(back.doc->source == d.source);
    CHECK(back.doc->subset == d.subset);
    CHECK(back.doc->text == d.text);
    CHECK(back.doc->licenses == d.licenses);  // URLs mapped back to keys
    CHECK(back.doc->num_tokens == d.num_tokens);
    CHECK(back.doc->perplexity == d.perplexity);
    CHECK(back.doc->ocr_score == d.ocr_score);
    // the line itself carries canonical URLs
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("license")[0] == "https://spdx.org/licenses/CC-BY-4.0.html");

    // optional fields serialize as explicit nulls
    Document bare;
    bare.id = "doc-2";
    bare.source = "quelle";
    bare.text = "t";
    auto jb = jsonl::to_json(bare);
    CHECK(jb.at("num_tokens").is_null());
    CHECK(jb.at("perplexity").is_null());
    CHECK(jb.at("ocr_score").is_null());
    auto back2 = jsonl::parse_output_record(jb.dump());
    REQUIRE(back2.doc);
    CHECK(!back2.doc->num_tokens);
    CHECK(!back2.doc->perplexity);
    CHECK(!back2.doc->ocr_score);
}

TEST_CASE("input records: lang_tag and string-or-list license") {
    auto one = jsonl::parse_record(
        R"({"id":"a","source":"s","text":"t","license":"CC BY 4.0","lang_tag":"de"})");
    REQUIRE(one.doc);
    CHECK(one.doc->licenses == std::vector<std::string>{"CC BY 4.0"});
    REQUIRE(one.doc->lang_tag);
    CHECK(*one.doc->lang_tag == "de");

    auto many = jsonl::parse_record(
        R"({"id":"a","source":"s","text":"t","license":["CC0-1.0","MIT"]})");
    REQUIRE(many.doc);
    CHECK(many.doc->licenses.size() == 2);

    auto none = jsonl::parse_record(R"({"id":"a","source":"s","text":"t"})");
    REQUIRE(none.doc);
    CHECK(none.doc->licenses.empty());
}

TEST_CASE("read_stream counts malformed lines without dropping them silently") {
    std::istringstream in(
        "{\"id\":\"a\",\"source\":\"s\",\"text\":\"eins\"}\n"
        "not json at all\n"
        "{\"id\":\"b\",\"source\":\"s\",\"text\":\"zwei\"}\n"
        "{\"source\":\"s\",\"text\":\"ohne id\"}\n"
        "\n"
        "{\"id\":\"c\",\"source\":\"s\",\"text\":\"drei\",\"subset\":\"kaputt\"}\n");
    auto r = jsonl::read_stream(in);
    CHECK(r.docs.size() == 2);
    CHECK(r.rejected == 3);
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0] == "not a JSON object");
    CHECK(r.errors[1] == "missing id");
    CHECK(r.errors[2] == "unknown subset: kaputt");
}

TEST_CASE("config defaults match published parameters") {
    Config c = config_from_json(nlohmann::json::object());
    CHECK(c.language == "de");
    CHECK(c.language_threshold == 0.65);
    CHECK(c.min_tokens == 32);
    CHECK(c.metadata_language_prefilter);
    CHECK(c.tokenizer_type == "whitespace");
    CHECK(c.quality_thresholds.min_stopword_count == 6.0);
    CHECK(c.dedup.shingle_size == 20);
    CHECK(c.dedup.collision_threshold == 0.8);
    CHECK(c.dedup.target_fp_rate == 1e-4);
    CHECK(c.dedup_ngram_unit == "word");
    CHECK(c.workers == 1);
}

TEST_CASE("config overrides and validation errors") {
    nlohmann::json j;
    j["language_threshold"] = 0.8;
    j["min_tokens"] = 64;
    j["quality_thresholds"]["min_stopword_count"] = 3.0;
    j["quality_thresholds"]["max_dup_ngram_char_fraction"] = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    j["dedup"]["capacity"] = 12345;
    j["workers"] = 4;
    Config c = config_from_json(j);
    CHECK(c.language_threshold == 0.8);
    CHECK(c.min_tokens == 64);
    CHECK(c.quality_thresholds.min_stopword_count == 3.0);
    CHECK(c.quality_thresholds.max_dup_ngram_char_fraction[5] == 0.5);
    CHECK(c.dedup_capacity == 12345);
    CHECK(c.workers == 4);

    CHECK_THROWS(config_from_json(nlohmann::json{{"language_threshold", 1.5}}));
    CHECK_THROWS(config_from_json(nlohmann::json{{"workers", 0}}));
    nlohmann::json bad_dedup;
    bad_dedup["dedup"]["lsh_bands"] = 7;
    CHECK_THROWS(config_from_json(bad_dedup));
    nlohmann::json bad_unit;
    bad_unit["dedup"]["ngram_unit"] = "char";
    CHECK_THROWS(config_from_json(bad_unit));
    CHECK_THROWS(load_config("no_such_config.json"));
}
