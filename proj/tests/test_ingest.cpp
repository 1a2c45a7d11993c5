#include <doctest.h>

#include "phishguard/error.hpp"
#include "phishguard/ingest.hpp"
#include "support.hpp"

using namespace phishguard;

namespace {

CsvSchema text_label_schema()
{
    return parse_schema(nlohmann::json::parse(R"({"text_column":"text","label_column":"label",
        "label_map":{"ham":0,"spam":1,"0":0,"1":1}})"));
}

std::vector<RawEmail> n_records(std::size_t legit, std::size_t phish, const std::string& source)
{
    std::vector<RawEmail> out;
    for (std::size_t i = 0; i < legit; ++i) out.push_back({"l", ClassLabel::Legitimate, source});
    for (std::size_t i = 0; i < phish; ++i) out.push_back({"p", ClassLabel::Phishing, source});
    return out;
}

}  // namespace

TEST_CASE("load_csv maps labels in file order")
{
    const auto r = parse_csv("text,label\nhello world,0\nwin free pills,1\n", text_label_schema(), "t");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0] == RawEmail{"hello world", ClassLabel::Legitimate, "t"});
    CHECK(r.records[1] == RawEmail{"win free pills", ClassLabel::Phishing, "t"});
    CHECK(r.diagnostics.dropped() == 0);
}

TEST_CASE("empty text rows are dropped and counted")
{
    const auto r = parse_csv("text,label\n,0\n", text_label_schema(), "t", {.allow_empty = true});
    CHECK(r.records.empty());
    CHECK(r.diagnostics.empty_text == 1);
    CHECK(r.diagnostics.dropped() == 1);
    // without allow_empty zero valid rows is an error
    CHECK_THROWS_AS(parse_csv("text,label\n,0\n", text_label_schema(), "t"), DataError);
}

TEST_CASE("unmappable labels and short rows are counted")
{
    const auto r = parse_csv("text,label\na,0\nb,maybe\nc\n\"d\",spam\n", text_label_schema(), "t");
    CHECK(r.records.size() == 2);
    CHECK(r.diagnostics.unmapped_label == 1);
    CHECK(r.diagnostics.malformed == 1);
    CHECK(r.diagnostics.rows_read == 4);
}

TEST_CASE("label values are trimmed and matched case-insensitively as a fallback")
{
    const auto r = parse_csv("text,label\na, HAM \nb,Spam\n", text_label_schema(), "t");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].label == ClassLabel::Legitimate);
    CHECK(r.records[1].label == ClassLabel::Phishing);
}

TEST_CASE("missing declared column and missing file are errors")
{
    CHECK_THROWS_AS(parse_csv("body,label\nx,0\n", text_label_schema(), "t"), DataError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", text_label_schema(), "t"), DataError);
}

TEST_CASE("RFC-4180 quoting, CRLF and BOM")
{
    const std::string csv = "\xEF\xBB\xBFtext,label\r\n\"a, \"\"quoted\"\"\r\nbody\",1\r\nplain,0\r\n";
    const auto rows = parse_csv_rows(csv);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"text", "label"});
    CHECK(rows[1][0] == "a, \"quoted\"\r\nbody");
    const auto r = parse_csv(csv, text_label_schema(), "t");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].label == ClassLabel::Phishing);
}

TEST_CASE("invalid UTF-8 is replaced, valid text untouched")
{
    CHECK(sanitize_utf8("caf\xC3\xA9") == "caf\xC3\xA9");
    CHECK(sanitize_utf8("a\xFF" "b") == "a\xEF\xBF\xBD" "b");
    CHECK(sanitize_utf8("\xE2\x82") == "\xEF\xBF\xBD");          // truncated sequence -> one replacement
    CHECK(sanitize_utf8("\xC0\xAF") == "\xEF\xBF\xBD\xEF\xBF\xBD");  // overlong: each byte invalid
    CHECK(sanitize_utf8("\xED\xA0\x80") == "\xEF\xBF\xBD\xEF\xBF\xBD\xEF\xBF\xBD");  // surrogate
}

TEST_CASE("load_csv is deterministic")
{
    const auto schema = load_schema(pgtest::fixtures() / "separable.schema.json");
    const auto a = load_csv(pgtest::fixtures() / "separable.csv", schema, "s");
    const auto b = load_csv(pgtest::fixtures() / "separable.csv", schema, "s");
    CHECK(a.records == b.records);
    CHECK(a.records.size() == 200);
}

TEST_CASE("merge of empty inputs")
{
    std::vector<Corpus> corpora{{"a", {}, 0}, {"b", {}, 0}};
    const auto m = merge(corpora);
    CHECK(m.records.empty());
    CHECK(m.stats.total() == 0);
    CHECK(m.stats.legitimate == 0);
    CHECK(m.stats.phishing == 0);
    CHECK(m.stats.sources.size() == 2);
}

TEST_CASE("merge with the published per-dataset counts")
{
    std::vector<Corpus> corpora{{"ds1", n_records(7312, 11322, "ds1"), 0},
                                {"ds2", n_records(747, 4825, "ds2"), 0},
                                {"ds3", n_records(13976, 15791, "ds3"), 0}};
    const auto m = merge(corpora);
    CHECK(m.records.size() == 53973);
    CHECK(m.stats.total() == 53973);
    CHECK(m.stats.legitimate == 22035);
    CHECK(m.stats.phishing == 31938);
    std::size_t sum = 0;
    for (const auto& s : m.stats.sources) sum += s.total();
    CHECK(sum == m.stats.total());
}

TEST_CASE("merge preserves order and source tags; duplicates are rejected")
{
    std::vector<Corpus> corpora{{"x", {{"one", ClassLabel::Legitimate, "x"}}, 0},
                                {"y", {{"two", ClassLabel::Phishing, "y"}}, 0}};
    const auto m = merge(corpora);
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].source == "x");
    CHECK(m.records[1].source == "y");
    CHECK(m.records[1].text == "two");

    std::vector<Corpus> dup{{"x", {}, 0}, {"x", {}, 0}};
    CHECK_THROWS_AS(merge(dup), ArgumentError);
}

TEST_CASE("merge is additive for random inputs")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Corpus> corpora;
        std::size_t legit = 0, phish = 0;
        const auto k = 1 + rng() % 4;
        for (std::size_t i = 0; i < k; ++i) {
            const auto l = rng() % 30, p = rng() % 30;
            legit += l;
            phish += p;
            corpora.push_back({"s" + std::to_string(i), n_records(l, p, "s" + std::to_string(i)), 0});
        }
        const auto m = merge(corpora);
        CHECK(m.records.size() == legit + phish);
        CHECK(m.stats.legitimate == legit);
        CHECK(m.stats.phishing == phish);
    }
}

TEST_CASE("duplicate diagnostic counts without removing")
{
    const std::vector<RawEmail> recs{{"a", ClassLabel::Legitimate, "s"},
                                     {"a", ClassLabel::Phishing, "s"},
                                     {"b", ClassLabel::Legitimate, "s"},
                                     {"a", ClassLabel::Legitimate, "t"}};
    CHECK(count_duplicate_texts(recs) == 2);
}

TEST_CASE("CSV export round trip")
{
    pgtest::TempDir tmp;
    const std::vector<RawEmail> recs{{"plain", ClassLabel::Legitimate, "a"},
                                     {"with, comma", ClassLabel::Phishing, "a"},
                                     {"quote \" and\nnewline", ClassLabel::Phishing, "b"},
                                     {"caf\xC3\xA9", ClassLabel::Legitimate, "b"}};
    write_csv(recs, tmp / "out.csv");
    const auto back = load_csv(tmp / "out.csv", export_schema(), "ignored");
    CHECK(back.records == recs);
}

TEST_CASE("dataset spec splits on the last colon")
{
    const auto d = parse_dataset_spec("C:/data/x.csv:schemas/s.json");
    CHECK(d.csv == "C:/data/x.csv");
    CHECK(d.schema == "schemas/s.json");
    CHECK_THROWS_AS(parse_dataset_spec("nocolon"), ArgumentError);
    CHECK_THROWS_AS(parse_dataset_spec("x.csv:"), ArgumentError);
}

TEST_CASE("bundled example schemas parse")
{
    for (const auto* name : {"phishing_email_text_type.json", "sms_v1_v2.json", "text_label_01.json"}) {
        CAPTURE(name);
        const auto s = load_schema(pgtest::data_dir() / "schemas" / name);
        CHECK(!s.label_map.empty());
        CHECK(!s.name.empty());
    }
}

TEST_CASE("schema label values must be 0 or 1")
{
    CHECK_THROWS_AS(parse_schema(nlohmann::json::parse(R"({"text_column":"t","label_column":"l",
        "label_map":{"x":2}})")),
                    DataError);
    CHECK_THROWS_AS(parse_schema(nlohmann::json::parse(R"({"text_column":"t","label_map":{"x":1}})")), DataError);
}
