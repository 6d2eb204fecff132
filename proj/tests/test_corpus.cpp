#include <doctest.h>

#include <fstream>
#include <set>

#include "test_helpers.hpp"
#include "tfn/corpus.hpp"
#include "tfn/errors.hpp"

using namespace tfn;
using testutil::record;

namespace {

const std::string kThreeLines =
    R"({"id":"p1","title":"Graphs","abstract":"On graphs.","authors":["Ann B"],"year":2000,"fields":["Mathematics"]})"
    "\n"
    R"({"id":"p2","title":"Nets","abstract":null,"authors":["Cay D","Ann B"],"year":2001,"fields":["Mathematics","Computer Science"]})"
    "\n"
    R"({"id":"p3","title":"Chips","authors":["Eve F"],"year":2002,"fields":["Computer Science"]})"
    "\n";

} // namespace

TEST_CASE("load_corpus keeps valid lines without filters") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(dir / "c.jsonl", kThreeLines);
    LoadReport report;
    Corpus corpus = load_corpus(path, 1900, 2100, {}, {}, &report);
    CHECK(corpus.records().size() == 3);
    CHECK(report.total_lines == 3);
    CHECK(report.skipped() == 0);
    // deterministic order: sorted by paper id
    CHECK(corpus.records()[0].paper_id == "p1");
    CHECK(corpus.records()[2].paper_id == "p3");
    CHECK(corpus.records()[1].abstract == std::nullopt);
}

TEST_CASE("field include/exclude filter") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(dir / "c.jsonl", kThreeLines);
    Corpus corpus = load_corpus(path, 1900, 2100, {"Mathematics"}, {"Computer Science"});
    REQUIRE(corpus.records().size() == 1);
    CHECK(corpus.records()[0].paper_id == "p1");
}

TEST_CASE("year range filter counts as skipped") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(
        dir / "c.jsonl",
        R"({"id":"old","title":"x","authors":["A"],"year":1900})" "\n" + kThreeLines);
    LoadReport report;
    Corpus corpus = load_corpus(path, 1960, 2100, {}, {}, &report);
    CHECK(corpus.records().size() == 3);
    CHECK(report.filtered == 1);
    CHECK(report.skipped() == 1);
}

TEST_CASE("malformed lines are skipped, majority-malformed aborts") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(dir / "c.jsonl",
                                     "not json\n{\"id\":3}\n" + kThreeLines);
    LoadReport report;
    Corpus corpus = load_corpus(path, 1900, 2100, {}, {}, &report);
    CHECK(corpus.records().size() == 3);
    CHECK(report.malformed == 2);

    auto bad = testutil::write_file(dir / "bad.jsonl", "x\ny\nz\nw\n" + kThreeLines);
    CHECK_THROWS_AS(load_corpus(bad, 1900, 2100), FormatError);
    auto half = testutil::write_file(dir / "half.jsonl", "x\ny\nz\n" + kThreeLines);
    CHECK_NOTHROW(load_corpus(half, 1900, 2100)); // exactly half is tolerated
    CHECK_THROWS_AS(load_corpus(dir / "missing.jsonl", 1900, 2100), IoError);
}

TEST_CASE("duplicate ids and author normalization") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(
        dir / "c.jsonl",
        R"({"id":"p1","title":"a","authors":["  Ann   B ","Ann B"],"year":2000})" "\n"
        R"({"id":"p1","title":"dup","authors":["X"],"year":2000})" "\n");
    LoadReport report;
    Corpus corpus = load_corpus(path, 1900, 2100, {}, {}, &report);
    REQUIRE(corpus.records().size() == 1);
    CHECK(report.malformed == 1); // the duplicate id
    CHECK(corpus.records()[0].authors == std::vector<std::string>{"Ann B"});
}

TEST_CASE("select honors the window") {
    Corpus corpus = Corpus::from_records({
        record("p98", {"a"}, 1998),
        record("p99", {"a"}, 1999),
        record("p00", {"a"}, 2000),
        record("p01", {"a"}, 2001),
    });
    AuthorId a = *corpus.author_id("a");

    auto ids = [&](const std::vector<std::size_t>& idx) {
        std::set<std::string> out;
        for (auto i : idx) out.insert(corpus.records()[i].paper_id);
        return out;
    };

    CHECK(ids(corpus.select(a, 2000, 2)) == std::set<std::string>{"p98", "p99", "p00"});
    CHECK(ids(corpus.select(a, 2000, 0)) == std::set<std::string>{"p00"});
    CHECK(corpus.select(999, 2000, 2).empty()); // unknown author
}

TEST_CASE("select windows are nested and cover the year partition") {
    std::mt19937 rng(7);
    std::vector<PublicationRecord> records;
    for (int i = 0; i < 40; ++i) {
        std::vector<std::string> authors{"a" + std::to_string(rng() % 6)};
        if (rng() % 2) authors.push_back("a" + std::to_string(rng() % 6));
        records.push_back(record("p" + std::to_string(i), authors,
                                 2000 + static_cast<int>(rng() % 4)));
    }
    Corpus corpus = Corpus::from_records(std::move(records));

    for (int year = 2000; year <= 2003; ++year) {
        std::set<std::size_t> by_union;
        for (AuthorId a = 0; a < corpus.authors().size(); ++a) {
            for (int w = 0; w < 3; ++w) {
                auto smaller = corpus.select(a, year, w);
                auto larger = corpus.select(a, year, w + 1);
                CHECK(std::includes(larger.begin(), larger.end(), smaller.begin(),
                                    smaller.end()));
            }
            for (auto idx : corpus.select(a, year, 0)) by_union.insert(idx);
        }
        std::set<std::size_t> expected;
        for (std::size_t i = 0; i < corpus.records().size(); ++i)
            if (corpus.records()[i].year == year) expected.insert(i);
        CHECK(by_union == expected);
    }
}

TEST_CASE("random garbage lines are counted, never fatal below the threshold") {
    std::mt19937 rng(17);
    auto dir = testutil::temp_dir("corpus_fuzz");
    std::string content;
    std::size_t garbage = 0;
    for (int i = 0; i < 60; ++i) {
        if (i % 2 == 0) {
            content += R"({"id":"ok)" + std::to_string(i) +
                       R"(","title":"x","authors":["A"],"year":2000})" "\n";
        } else {
            ++garbage;
            std::string junk;
            std::size_t len = rng() % 40;
            for (std::size_t k = 0; k < len; ++k)
                junk.push_back(static_cast<char>(32 + rng() % 95));
            if (junk.find_first_not_of(" \t") == std::string::npos) junk = "{";
            content += junk + "\n";
        }
    }
    auto path = testutil::write_file(dir / "fuzz.jsonl", content);
    LoadReport report;
    Corpus corpus = load_corpus(path, 1900, 2100, {}, {}, &report);
    CHECK(corpus.records().size() == 30);
    CHECK(report.malformed == garbage);
}

TEST_CASE("reloading the same file is deterministic") {
    auto dir = testutil::temp_dir("corpus");
    auto path = testutil::write_file(dir / "c.jsonl", kThreeLines);
    Corpus first = load_corpus(path, 1900, 2100);
    Corpus second = load_corpus(path, 1900, 2100);
    REQUIRE(first.records().size() == second.records().size());
    for (std::size_t i = 0; i < first.records().size(); ++i) {
        CHECK(first.records()[i].paper_id == second.records()[i].paper_id);
        CHECK(first.records()[i].authors == second.records()[i].authors);
    }
    CHECK(first.authors() == second.authors());
}
