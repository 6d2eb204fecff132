#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "tfn/errors.hpp"
#include "tfn/textprep.hpp"

using namespace tfn;
using testutil::record;

TEST_CASE("tokenize lowercases and splits on non-letters") {
    CHECK(tokenize("Graph Theory 101!") == std::vector<std::string>{"graph", "theory"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("Neural-network models") ==
          std::vector<std::string>{"neural", "network", "models"});
    CHECK(tokenize("a I x") .empty()); // single letters dropped
}

TEST_CASE("is_english counts stop-word fraction") {
    StopwordSet stop{"the", "and", "of"};
    std::vector<std::string> tokens{"the", "quick", "fox", "and", "the", "dog"};
    CHECK(is_english(tokens, stop, 0.10));
    CHECK(is_english(tokens, stop, 0.5)); // exactly 3/6
    CHECK_FALSE(is_english({"quick", "fox"}, stop, 0.10));
    CHECK(is_english({"quick", "fox"}, stop, 0.0)); // zero threshold, non-empty
    CHECK_FALSE(is_english({}, stop, 0.0));         // empty is never English
}

TEST_CASE("is_english is monotone under added stop words") {
    StopwordSet stop{"the", "and", "of", "in", "to"};
    std::mt19937 rng(11);
    std::vector<std::string> pool{"the", "and", "of", "graph", "kernel", "flow", "xyz"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> tokens;
        std::size_t len = 1 + rng() % 12;
        for (std::size_t i = 0; i < len; ++i) tokens.push_back(pool[rng() % pool.size()]);
        if (!is_english(tokens, stop, 0.3)) continue;
        tokens.push_back("the");
        CHECK(is_english(tokens, stop, 0.3));
    }
}

TEST_CASE("stop-word file parsing") {
    auto dir = testutil::temp_dir("textprep");
    auto path = testutil::write_file(dir / "stop.txt", "# comment\nthe\nand\n\n  of\n");
    StopwordSet stop = load_stopwords(path);
    CHECK(stop == StopwordSet{"the", "and", "of"});
    CHECK_THROWS_AS(load_stopwords(dir / "missing.txt"), IoError);
}

namespace {

Corpus two_doc_corpus() {
    // After stop-word removal: d1 = graph graph theory, d2 = graph algebra.
    return Corpus::from_records({
        record("d1", {"a"}, 2000, "graph graph", "the theory"),
        record("d2", {"b"}, 2000, "graph", "the algebra"),
    });
}

} // namespace

TEST_CASE("build_matrix reproduces the hand-computed tf-idf example") {
    StopwordSet stop{"the"};
    Corpus corpus = two_doc_corpus();
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);

    REQUIRE(matrix.rows == std::vector<std::string>{"d1", "d2"});
    REQUIRE(matrix.vocabulary.terms == std::vector<std::string>{"algebra", "graph", "theory"});

    // Oracle: the stated formula computed by hand.
    const double n_docs = 2.0;
    auto idf = [&](double df) { return std::log((1.0 + n_docs) / (1.0 + df)) + 1.0; };
    CHECK(idf(1.0) == doctest::Approx(std::log(3.0 / 2.0) + 1.0).epsilon(1e-12));
    CHECK(idf(2.0) == doctest::Approx(1.0).epsilon(1e-12));

    double g1 = 2.0 * idf(2.0); // tf 2
    double t1 = 1.0 * idf(1.0);
    double norm1 = std::sqrt(g1 * g1 + t1 * t1);
    CHECK(matrix.values.coeff(0, 1) == doctest::Approx(g1 / norm1).epsilon(1e-12));
    CHECK(matrix.values.coeff(0, 2) == doctest::Approx(t1 / norm1).epsilon(1e-12));

    double g2 = idf(2.0), a2 = idf(1.0);
    double norm2 = std::sqrt(g2 * g2 + a2 * a2);
    CHECK(matrix.values.coeff(1, 0) == doctest::Approx(a2 / norm2).epsilon(1e-12));
    CHECK(matrix.values.coeff(1, 1) == doctest::Approx(g2 / norm2).epsilon(1e-12));
}

TEST_CASE("build_matrix row invariants") {
    StopwordSet stop{"the", "of", "and", "is", "we"};
    std::vector<PublicationRecord> records;
    for (int i = 0; i < 12; ++i)
        records.push_back(record("p" + std::to_string(i), {"x"}, 2000,
                                 "the flow of graphs and kernels",
                                 "we study the kernel flow problem number " +
                                     std::string(static_cast<std::size_t>(i % 4), 'z')));
    Corpus corpus = Corpus::from_records(std::move(records));
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 2);

    for (int row = 0; row < matrix.values.outerSize(); ++row) {
        double norm_sq = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix.values, row);
             it; ++it) {
            CHECK(it.value() > 0.0);
            CHECK(std::isfinite(it.value()));
            norm_sq += it.value() * it.value();
        }
        if (norm_sq > 0.0) CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("require_abstract drops abstract-less documents from the rows") {
    StopwordSet stop{"the"};
    Corpus corpus = Corpus::from_records({
        record("d1", {"a"}, 2000, "graph theory", "the graph"),
        record("d2", {"b"}, 2000, "graph algebra"), // no abstract
        record("d3", {"c"}, 2000, "graph flows", "the flows"),
    });
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);
    CHECK(matrix.rows == std::vector<std::string>{"d1", "d3"});
    DocTermMatrix all = build_matrix(corpus, stop, 0.0, false, 1);
    CHECK(all.rows.size() == 3);
}

TEST_CASE("single document single term normalizes to 1") {
    StopwordSet stop{"the"};
    Corpus corpus =
        Corpus::from_records({record("d1", {"a"}, 2000, "graph graph graph", "the graph")});
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);
    REQUIRE(matrix.vocabulary.terms == std::vector<std::string>{"graph"});
    CHECK(matrix.values.coeff(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-English and empty documents") {
    StopwordSet stop{"the", "and"};
    Corpus corpus = Corpus::from_records({
        record("en", {"a"}, 2000, "the graph and the kernel", "the graph and the kernel model"),
        record("ru", {"b"}, 2000, "graf teoriya uzlov", "metod resheniya zadachi grafov"),
    });
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, false, 1);
    CHECK(matrix.rows == std::vector<std::string>{"en"});

    Corpus none = Corpus::from_records(
        {record("ru", {"b"}, 2000, "graf teoriya uzlov", "metod resheniya")});
    CHECK_THROWS_AS(build_matrix(none, stop, 0.10, false, 1), FormatError);
}

TEST_CASE("documents emptied by stop-word removal stay as zero rows") {
    StopwordSet stop{"the", "and", "of"};
    Corpus corpus = Corpus::from_records({
        record("full", {"a"}, 2000, "the graph kernel", "the graph kernel of flows"),
        record("empty", {"b"}, 2000, "the and of", "the and of the and of"),
    });
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);
    REQUIRE(matrix.rows == std::vector<std::string>{"empty", "full"});
    Eigen::Index empty_row = 0;
    CHECK(matrix.values.row(empty_row).nonZeros() == 0);
}

TEST_CASE("removing a document never raises document frequencies") {
    StopwordSet stop{"the"};
    std::vector<PublicationRecord> records;
    std::mt19937 rng(3);
    std::vector<std::string> vocab{"graph", "kernel", "flow", "algebra", "tensor"};
    for (int i = 0; i < 8; ++i) {
        std::string text = "the";
        for (int k = 0; k < 5; ++k) text += " " + vocab[rng() % vocab.size()];
        records.push_back(record("p" + std::to_string(i), {"x"}, 2000, text, "the " + text));
    }
    Corpus full = Corpus::from_records(records);
    DocTermMatrix base = build_matrix(full, stop, 0.10, true, 1);

    records.pop_back();
    Corpus smaller = Corpus::from_records(records);
    DocTermMatrix reduced = build_matrix(smaller, stop, 0.10, true, 1);

    for (std::size_t t = 0; t < reduced.vocabulary.terms.size(); ++t) {
        auto it = base.vocabulary.index.find(reduced.vocabulary.terms[t]);
        REQUIRE(it != base.vocabulary.index.end());
        CHECK(reduced.vocabulary.document_frequency[t] <=
              base.vocabulary.document_frequency[static_cast<std::size_t>(it->second)]);
    }
}

TEST_CASE("vectorize matches training rows and ignores OOV") {
    StopwordSet stop{"the"};
    Corpus corpus = two_doc_corpus();
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);

    // identical record -> identical row
    auto vec = vectorize(matrix.vocabulary, corpus.records()[0], stop);
    for (int t = 0; t < matrix.vocabulary.size(); ++t)
        CHECK(vec.coeff(t) == doctest::Approx(matrix.values.coeff(0, t)).epsilon(1e-12));

    // out-of-vocabulary record -> zero vector
    auto oov = vectorize(matrix.vocabulary, record("x", {"z"}, 2000, "quantum chromodynamics"),
                         stop);
    CHECK(oov.nonZeros() == 0);

    // title-only record: title tokens only
    auto title_only = vectorize(matrix.vocabulary, record("y", {"z"}, 2000, "graph"), stop);
    CHECK(title_only.nonZeros() == 1);
    CHECK(title_only.coeff(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matrix TSV export") {
    StopwordSet stop{"the"};
    Corpus corpus = two_doc_corpus();
    DocTermMatrix matrix = build_matrix(corpus, stop, 0.10, true, 1);
    auto dir = testutil::temp_dir("textprep");
    write_matrix_tsv(matrix, dir / "m.tsv");
    std::ifstream in(dir / "m.tsv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == static_cast<std::size_t>(matrix.values.nonZeros()));
}
