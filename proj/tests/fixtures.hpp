#pragma once

// Shared test fixtures: the engineered 12-document corpus and the whitespace
// normalization cases. Used by both the unit tests and the acceptance binary.

#include <string>
#include <utility>
#include <vector>

#include "corpuskit/document.hpp"

namespace fixtures {

// Shared lines that appear in two documents each; the second copy must fall
// to paragraph dedup.
inline const std::string kSharedA =
    "Später entstanden mehrere Werkstätten, kleine Läden und eine Schule direkt neben der "
    "Kirche.";
inline const std::string kSharedB =
    "Im Winter ruhte der Handel fast vollständig, weil die Straßen oft tief verschneit waren.";

inline const std::string kD04Unique =
    "Ein weiterer Abschnitt behandelt die Schmiede, deren Werkstatt unmittelbar am Bach stand.\n"
    "Dort wurden Pflüge repariert, Hufeisen geformt und eiserne Beschläge für Wagen gefertigt.\n"
    "Die Arbeit begann früh am Morgen und endete erst, wenn die Glocken läuteten.";
inline const std::string kD05Unique =
    "Der letzte Teil sammelt Briefe, die ein Wanderer während seiner Reise verfasst hatte.\n"
    "Wer heute Fragen zu dieser Sammlung hat, schreibt einfach an max@firma.de und erhält "
    "Auskunft.\n"
    "Seine Notizen schildern Herbergen, staubige Wege und manche Begegnung mit freundlichen "
    "Fremden.";

// Twelve documents: two fail language, one of those is also under the length
// gate, one more fails length alone, two fail quality, two lose a paragraph
// to dedup, one carries PII, two fail license, three survive untouched.
inline std::vector<corpuskit::Document> golden_fixture() {
    using corpuskit::Document;
    using corpuskit::ThematicDomain;
    auto make = [](const char* id, std::string text, std::vector<std::string> lic,
                   ThematicDomain dom = ThematicDomain::Web) {
        Document d;
        d.id = id;
        d.source = "fixture";
        d.subset = dom;
        d.text = std::move(text);
        d.licenses = std::move(lic);
        return d;
    };
    std::vector<Document> docs;
    docs.push_back(make(
        "d01",
        "Die Chronik beschreibt zunächst, wie der alte Marktplatz im Jahr achtzehnhundert neu "
        "gestaltet wurde.\n"
        "Viele Bewohner haben damals bei dem Umbau geholfen, und die Gemeinde wuchs danach "
        "stetig weiter.\n" +
            kSharedA,
        {"CC0-1.0"}));
    docs.push_back(make(
        "d02",
        "Der zweite Bericht erläutert ausführlich, welche Wege die Händler im Herbst gewöhnlich "
        "benutzten.\n"
        "Auf dem Fluss transportierten flache Boote schwere Fässer, Säcke und Kisten in die "
        "Nachbarstädte.\n" +
            kSharedB,
        {"CC BY 4.0"}));
    docs.push_back(make(
        "d03",
        "Das dritte Kapitel widmet sich der Musik, die bei Festen auf dem Dorfplatz erklang.\n"
        "Mehrere Kapellen spielten abwechselnd, während die Gäste tanzten, sangen und gemeinsam "
        "feierten.\n"
        "Gegen Mitternacht endete das Fest gewöhnlich mit einem langen Umzug durch die Gassen.",
        {"CC-BY-SA-4.0"}, ThematicDomain::Cultural));
    docs.push_back(make("d04", kD04Unique + "\n" + kSharedA, {"MIT"}));
    docs.push_back(make("d05", kD05Unique + "\n" + kSharedB, {"Apache-2.0"}));
    docs.push_back(make(
        "d06",
        "The committee reviewed the annual report carefully and published a detailed summary "
        "for all members yesterday.\n"
        "Several chapters describe the financial results, the planned projects, and the "
        "expected growth during the coming years.\n"
        "Readers can request printed copies from the office or download the files from the "
        "archive.",
        {"CC0-1.0"}));
    docs.push_back(make("d07", "Short english note.", {"CC0-1.0"}));
    docs.push_back(
        make("d08", "Der kleine Hund läuft heute sehr schnell durch den Garten.", {"CC0-1.0"}));
    docs.push_back(make(
        "d09",
        "Der Glockenturm überragte sämtliche Dächer, Gärten, Scheunen, Ställe, Brücken, Mauern, "
        "Tore, Plätze, Brunnen, Gassen, Höfe, Felder, Wiesen, Weiden, Wälder, Hügel, Täler, "
        "Bäche, Teiche, Mühlen, Keller, Kammern, Stuben, Böden, Speicher, Schuppen, Zäune, "
        "Hecken, Beete, Pfade, Stege, Treppen, Geländer, Fenster, Läden, Balken, Giebel und die "
        "Türme.",
        {"CC0-1.0"}));
    docs.push_back(make(
        "d10",
        "Die alten Bücher lagen auf dem großen Tisch und die Kinder lasen darin während der "
        "Lehrer ihnen half denn sie wollten die Geschichten verstehen und später selbst "
        "erzählen wobei die Eltern ihnen gerne zuhörten und manchmal auch die Nachbarn "
        "vorbeikamen",
        {"CC0-1.0"}));
    docs.push_back(make(
        "d11",
        "Das alte Archiv im Ort bewahrt zahlreiche Karten, Akten und Bilder aus alter Zeit "
        "auf.\n"
        "Forscher nutzen diese Bestände oft, um Daten der Region besonders genau einzuordnen.\n"
        "Ein neuer Katalog hilft den Gästen nun bei der schnellen Suche erheblich.",
        {"CC-BY-NC-4.0"}));
    docs.push_back(make(
        "d12",
        "Das Wetter wurde über viele Jahre hinweg jeden Tag in schmale Hefte notiert.\n"
        "Sehr kalte Winter, trockene Sommer und starke Gewitter erhielten dabei eigene "
        "Spalten.\n"
        "Aus diesen Daten lassen sich heute recht genaue Reihen und Kurven ableiten.",
        {"CC0-1.0", "CC-BY-NC-4.0"}));
    return docs;
}

// 40 input/expected pairs for whitespace normalization: space collapse,
// newline caps, trimming, and the hyphenation join rules.
inline const std::vector<std::pair<std::string, std::string>>& whitespace_cases() {
    static const std::vector<std::pair<std::string, std::string>> cases = {
        {"a b", "a b"},
        {"a  b", "a b"},
        {"a\tb", "a b"},
        {"a \t b", "a b"},
        {"a\t\tb", "a b"},
        {" a", "a"},
        {"a ", "a"},
        {"\ta\t", "a"},
        {"a\nb", "a\nb"},
        {"a\n\nb", "a\n\nb"},
        {"a\n\n\nb", "a\n\nb"},
        {"a\n\n\n\n\nb", "a\n\nb"},
        {"\n\na\n\n", "a"},
        {"a \nb", "a\nb"},
        {"a\n b", "a\nb"},
        {"Zei-\nle", "Zeile"},
        {"Hal-\ntung", "Haltung"},
        {"Wör-\nter", "Wörter"},
        {"Mas-\nsen", "Massen"},
        {"tren-\n nen", "trennen"},
        {"Gro-\nßes", "Großes"},
        {"deutsch-\nFranzösisch", "deutsch-Französisch"},
        {"Nord-\nSüd", "Nord-Süd"},
        {"A-\nB", "A-B"},
        {"x-\n9", "x-\n9"},
        {"ab-\n", "ab-"},
        {"-\nab", "-\nab"},
        {"a-b", "a-b"},
        {"a- b", "a- b"},
        {"Wort-\n\nNeu", "Wort-\n\nNeu"},
        {"zwei-\nund-\ndreißig", "zweiunddreißig"},
        {"", ""},
        {"\n", ""},
        {"\n\n\n", ""},
        {"   ", ""},
        {"a", "a"},
        {"a  b  c", "a b c"},
        {"x\ny\nz", "x\ny\nz"},
        {"ein-\nzeln und mehr", "einzeln und mehr"},
        {"Ha-\nus am See", "Haus am See"},
    };
    return cases;
}

}  // namespace fixtures
