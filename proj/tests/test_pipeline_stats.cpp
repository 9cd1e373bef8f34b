#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corpuskit/pipeline.hpp"
#include "corpuskit/scorers.hpp"
#include "corpuskit/stats.hpp"
#include "fixtures.hpp"

using namespace corpuskit;
using fixtures::golden_fixture;
using fixtures::kD04Unique;
using fixtures::kD05Unique;
using fixtures::kSharedA;
using fixtures::kSharedB;

namespace {

Config fixture_config() {
    Config cfg;  // defaults: whitespace tokenizer, stopword-density classifier
    return cfg;
}

std::string serialize_all(const std::vector<Document>& docs) {
    std::ostringstream out;
    jsonl::write_stream(out, docs);
    return out.str();
}

}  // namespace

TEST_CASE("golden fixture: 12 in, 5 out, every gate exercised") {
    Config cfg = fixture_config();
    dedup::DedupFilter filter(cfg.dedup, 1000);
    auto r = pipeline::run_pipeline(golden_fixture(), cfg, filter);

    REQUIRE(r.output.size() == 5);
    CHECK(r.output[0].id == "d01");
    CHECK(r.output[1].id == "d02");
    CHECK(r.output[2].id == "d03");
    CHECK(r.output[3].id == "d04");
    CHECK(r.output[4].id == "d05");

    // d04 and d05 lost their shared paragraph; the rest are intact
    CHECK(r.output[3].text == kD04Unique);
    std::string d05_redacted = kD05Unique;
    d05_redacted.replace(d05_redacted.find("max@firma.de"), 12, "name@beispiel.de");
    CHECK(r.output[4].text == d05_redacted);
    CHECK(r.output[0].text.find(kSharedA) != std::string::npos);
    CHECK(r.output[1].text.find(kSharedB) != std::string::npos);

    // licenses came out canonicalized
    CHECK(r.output[0].licenses == std::vector<std::string>{"CC0-1.0"});
    CHECK(r.output[1].licenses == std::vector<std::string>{"CC-BY-4.0"});
    CHECK(r.output[2].licenses == std::vector<std::string>{"CC-BY-SA-4.0"});
    CHECK(r.output[3].licenses == std::vector<std::string>{"MIT"});
    CHECK(r.output[4].licenses == std::vector<std::string>{"Apache-2.0"});

    // token counts reflect the trimmed, redacted texts
    CHECK(r.output[0].num_tokens == 42);
    CHECK(r.output[1].num_tokens == 41);
    CHECK(r.output[2].num_tokens == 39);
    CHECK(r.output[3].num_tokens == 37);
    CHECK(r.output[4].num_tokens == 39);

    // drop accounting
    CHECK(r.drops == std::map<std::string, uint64_t>{
                         {"language", 2}, {"length", 1}, {"quality", 2}, {"license", 2}});
    CHECK(r.pii_counts[static_cast<size_t>(pii::Category::Email)] == 1);
    uint64_t pii_total = 0;
    for (uint64_t c : r.pii_counts) pii_total += c;
    CHECK(pii_total == 1);
    CHECK(r.scorer_failures == 0);

    // ledger: 12 -> 7 -> 7 -> 5 docs
    const auto& cells = r.ledger.per_source.at("fixture");
    CHECK(cells[static_cast<size_t>(Stage::Initial)].docs_in == 12);
    CHECK(cells[static_cast<size_t>(Stage::Initial)].docs_out == 12);
    CHECK(cells[static_cast<size_t>(Stage::Filtered)].docs_in == 12);
    CHECK(cells[static_cast<size_t>(Stage::Filtered)].docs_out == 7);
    CHECK(cells[static_cast<size_t>(Stage::Deduplicated)].docs_in == 7);
    CHECK(cells[static_cast<size_t>(Stage::Deduplicated)].docs_out == 7);
    CHECK(cells[static_cast<size_t>(Stage::Final)].docs_in == 7);
    CHECK(cells[static_cast<size_t>(Stage::Final)].docs_out == 5);
    CHECK(cells[static_cast<size_t>(Stage::Final)].tokens_out == 42 + 41 + 39 + 37 + 39);

    // every output document passes its own validation
    PassedStages all{true, true, true};
    for (const auto& d : r.output) CHECK(validate_document(d, all).empty());
}

TEST_CASE("pipeline determinism: identical outputs and filter bytes across runs and workers") {
    auto run = [](unsigned workers) {
        Config cfg = fixture_config();
        cfg.workers = workers;
        dedup::DedupFilter filter(cfg.dedup, 1000);
        auto r = pipeline::run_pipeline(golden_fixture(), cfg, filter);
        std::ostringstream fb;
        filter.save(fb);
        return std::make_pair(serialize_all(r.output), fb.str());
    };
    auto [out1, filter1] = run(1);
    auto [out2, filter2] = run(1);
    auto [out4, filter4] = run(4);
    CHECK(out1 == out2);
    CHECK(filter1 == filter2);
    CHECK(out1 == out4);
    CHECK(filter1 == filter4);
}

TEST_CASE("pipeline is idempotent on its own output with a fresh filter") {
    Config cfg = fixture_config();
    dedup::DedupFilter filter(cfg.dedup, 1000);
    auto first = pipeline::run_pipeline(golden_fixture(), cfg, filter);

    dedup::DedupFilter fresh(cfg.dedup, 1000);
    auto second = pipeline::run_pipeline(first.output, cfg, fresh);
    CHECK(serialize_all(second.output) == serialize_all(first.output));
    CHECK(second.drops.empty());
    uint64_t pii_total = 0;
    for (uint64_t c : second.pii_counts) pii_total += c;
    CHECK(pii_total == 0);  // replacements are not re-counted
}

TEST_CASE("empty input") {
    Config cfg = fixture_config();
    dedup::DedupFilter filter(cfg.dedup, 100);
    auto r = pipeline::run_pipeline({}, cfg, filter);
    CHECK(r.output.empty());
    CHECK(r.drops.empty());
    CHECK(r.ledger.per_source.empty());
}

TEST_CASE("metadata language prefilter") {
    Document d;
    d.id = "a";
    d.source = "s";
    d.text = "der hund und die katze sind in dem garten bei dem haus "
             "und sie schlafen dort den ganzen tag sehr ruhig "
             "weil das wetter warm ist und die sonne auf das gras scheint";
    d.licenses = {"CC0-1.0"};
    d.lang_tag = "fr";

    Config cfg = fixture_config();
    dedup::DedupFilter f1(cfg.dedup, 100);
    auto r1 = pipeline::run_pipeline({d}, cfg, f1);
    CHECK(r1.output.empty());
    CHECK(r1.drops == std::map<std::string, uint64_t>{{"metadata_language", 1}});

    // with the prefilter off the classifier decides, and this text is German;
    // it proceeds past the language stage (and may drop later, e.g. quality)
    cfg.metadata_language_prefilter = false;
    dedup::DedupFilter f2(cfg.dedup, 100);
    auto r2 = pipeline::run_pipeline({d}, cfg, f2);
    CHECK(r2.drops.count("metadata_language") == 0);
    CHECK(r2.drops.count("language") == 0);
    CHECK(r2.drops.count("length") == 0);
}

TEST_CASE("run_files: per-(subset,source) outputs and malformed-line accounting") {
    namespace fs = std::filesystem;
    fs::path dir = "pipeline_run_test_dir";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string input_path = (dir / "input.jsonl").string();
    {
        std::ofstream out(input_path, std::ios::binary);
        for (const auto& d : golden_fixture()) {
            nlohmann::json j;
            j["id"] = d.id;
            j["source"] = d.source;
            j["subset"] = domain_name(d.subset);
            j["text"] = d.text;
            j["license"] = d.licenses;
            out << j.dump() << '\n';
        }
        out << "this line is not json\n";
    }
    Config cfg = fixture_config();
    dedup::DedupFilter filter(cfg.dedup, 1000);
    auto r = pipeline::run_files({input_path}, (dir / "out").string(), cfg, filter);
    CHECK(r.rejected_records == 1);
    CHECK(r.pipeline.ledger.rejected_records == 1);
    REQUIRE(r.output_files.size() == 2);  // cultural_fixture + web_fixture
    CHECK(fs::exists(dir / "out" / "cultural_fixture.jsonl"));
    CHECK(fs::exists(dir / "out" / "web_fixture.jsonl"));

    // files parse back into exactly the pipeline output
    size_t total = 0;
    for (const auto& path : r.output_files) {
        std::ifstream in(path);
        auto read = jsonl::read_stream(in, /*from_output_schema=*/true);
        CHECK(read.rejected == 0);
        total += read.docs.size();
    }
    CHECK(total == 5);
    fs::remove_all(dir);
}

TEST_CASE("stats report from the golden run") {
    Config cfg = fixture_config();
    dedup::DedupFilter filter(cfg.dedup, 1000);
    auto r = pipeline::run_pipeline(golden_fixture(), cfg, filter);
    auto j = stats::emit_stats(r.output, r.ledger);

    const auto& ret = j.at("retention").at("fixture");
    CHECK(ret.at("initial").at("docs") == 12);
    CHECK(ret.at("filtered").at("docs") == 7);
    CHECK(ret.at("final").at("docs") == 5);
    CHECK(ret.at("filtered").at("docs_pct") == doctest::Approx(58.33));
    CHECK(ret.at("final").at("docs_pct") == doctest::Approx(41.67));

    uint64_t total_tokens = 42 + 41 + 39 + 37 + 39;
    CHECK(j.at("totals").at("docs") == 5);
    CHECK(j.at("totals").at("tokens") == total_tokens);
    CHECK(j.at("domains").at("cultural").at("docs") == 1);
    CHECK(j.at("domains").at("web").at("docs") == 4);
    double web_share = j.at("domains").at("web").at("token_share").get<double>();
    CHECK(web_share == doctest::Approx((42.0 + 41 + 37 + 39) / total_tokens));

    // all five are short documents -> first partition only
    CHECK(j.at("partitions").at("web").at("<=2048").at("docs") == 4);
    CHECK(j.at("partitions").at("cultural").at("<=2048").at("docs") == 1);
    CHECK(j.at("unclassifiable").empty());

    // license cross-tab: CC0 is PD, CC-BY/MIT/Apache attribution, CC-BY-SA copyleft
    CHECK(j.at("licenses").at("public_domain_equivalent").at("docs") == 1);
    CHECK(j.at("licenses").at("attribution").at("docs") == 3);
    CHECK(j.at("licenses").at("copyleft").at("docs") == 1);
    CHECK(j.at("licenses").at("by_license").at("MIT").at("docs") == 1);
    CHECK(j.at("licenses").at("unknown_license_docs") == 0);

    // curve ends at 1.0 and is sorted by length
    const auto& curve = j.at("token_length_curve");
    REQUIRE(!curve.empty());
    CHECK(curve.back().at("cumulative_token_fraction").get<double>() == doctest::Approx(1.0));
    for (size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].at("length").get<uint64_t>() > curve[i - 1].at("length").get<uint64_t>());
}

TEST_CASE("stats: single-domain corpus has 100% token share; 50% retention row") {
    std::vector<Document> docs(2);
    docs[0].subset = ThematicDomain::Legal;
    docs[0].num_tokens = 60;
    docs[0].licenses = {"MIT"};
    docs[1].subset = ThematicDomain::Legal;
    docs[1].num_tokens = 40;
    docs[1].licenses = {"MIT"};
    StageLedger ledger;
    ledger.cell("s", Stage::Initial) = {4, 4, 200, 200};
    ledger.cell("s", Stage::Filtered) = {4, 2, 200, 100};
    ledger.cell("s", Stage::Deduplicated) = {2, 2, 100, 100};
    ledger.cell("s", Stage::Final) = {2, 2, 100, 100};
    auto j = stats::emit_stats(docs, ledger);
    CHECK(j.at("domains").at("legal").at("token_share") == doctest::Approx(1.0));
    CHECK(j.at("retention").at("s").at("filtered").at("docs_pct") == doctest::Approx(50.0));
    CHECK(j.at("retention").at("s").at("final").at("tokens_pct") == doctest::Approx(50.0));
    // curve: 40 tokens of 100 at length 40, then all of it at length 60
    const auto& curve = j.at("token_length_curve");
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].at("length") == 40);
    CHECK(curve[0].at("cumulative_token_fraction").get<double>() == doctest::Approx(0.4));
}

TEST_CASE("obligation report: most restrictive member wins, unknowns counted") {
    std::vector<Document> docs(3);
    docs[0].licenses = {"CC0-1.0", "CC-BY-SA-4.0"};
    docs[0].num_tokens = 10;
    docs[1].licenses = {"CC0-1.0"};
    docs[1].num_tokens = 20;
    docs[2].licenses = {"Mystery-1.0"};
    docs[2].num_tokens = 30;
    auto r = stats::obligation_report(docs);
    CHECK(r.by_category[static_cast<size_t>(licenses::Category::Copyleft)].docs == 1);
    CHECK(r.by_category[static_cast<size_t>(licenses::Category::PublicDomainEquivalent)].docs == 1);
    CHECK(r.unknown_license_docs == 1);
    CHECK(r.by_license.at("CC0-1.0").docs == 2);
}

TEST_CASE("scorers") {
    scorers::NullScorer null;
    Document d;
    d.text = "irgendein Text";
    CHECK(!null.score(d));

    scorers::OcrStubScorer ocr;
    Document clean;
    clean.text = "Nur Buchstaben und Worte hier.";
    CHECK(*ocr.score(clean) == doctest::Approx(1.0));
    Document noisy;
    noisy.text = "ab +";  // one symbol among four scalars
    CHECK(*ocr.score(noisy) == doctest::Approx(0.75));

    // bigram perplexity against a hand-rolled computation
    auto ppl = scorers::BigramPerplexityScorer::train_from_text("ein hund läuft\nein hund schläft\n");
    Document sent;
    sent.text = "ein hund läuft";
    // vocab: ein, hund, läuft, schläft, <s> -> V = 5
    // contexts: <s> seen 2x, ein 2x, hund 2x
    // P(ein|<s>) = (2+1)/(2+5); P(hund|ein) = (2+1)/(2+5); P(läuft|hund) = (1+1)/(2+5)
    double logsum = std::log(3.0 / 7.0) + std::log(3.0 / 7.0) + std::log(2.0 / 7.0);
    double expect = std::exp(-logsum / 3.0);
    CHECK(*ppl->score(sent) == doctest::Approx(expect).epsilon(1e-12));
    // unseen word: P(katze|hund) = (0+1)/(2+5)
    Document unseen;
    unseen.text = "ein hund katze";
    double logsum2 = std::log(3.0 / 7.0) + std::log(3.0 / 7.0) + std::log(1.0 / 7.0);
    CHECK(*ppl->score(unseen) == doctest::Approx(std::exp(-logsum2 / 3.0)).epsilon(1e-12));
    Document empty;
    CHECK(!ppl->score(empty));

    CHECK_THROWS(scorers::make_scorer("no-such-scorer"));
    CHECK(scorers::make_scorer("")->id() == "null");
}

TEST_CASE("pipeline attaches scorer outputs") {
    Config cfg = fixture_config();
    cfg.ocr_scorer = "ocr-stub";
    dedup::DedupFilter filter(cfg.dedup, 1000);
    auto ppl = scorers::BigramPerplexityScorer::train_from_text(
        "die chronik beschreibt den marktplatz\nder bericht erläutert die wege\n");
    auto r = pipeline::run_pipeline(golden_fixture(), cfg, filter, ppl);
    REQUIRE(r.output.size() == 5);
    for (const auto& d : r.output) {
        REQUIRE(d.ocr_score);
        CHECK(*d.ocr_score == doctest::Approx(1.0));
        REQUIRE(d.perplexity);
        CHECK(*d.perplexity > 0.0);
    }
}
