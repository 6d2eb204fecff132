#include <doctest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "tfn/errors.hpp"
#include "tfn/network.hpp"

using namespace tfn;
using testutil::MiniCorpus;
using testutil::record;

namespace {

using EdgeKey = std::tuple<int, int, AuthorId, AuthorId>;

std::map<EdgeKey, double> collect_edges(const TopicFlowNetwork& net) {
    std::map<EdgeKey, double> out;
    for (const auto& [key, edges] : net.relations())
        for (const auto& e : edges) out[{key.first, key.second, e.source, e.target}] = e.weight;
    return out;
}

} // namespace

TEST_CASE("mini-corpus network matches the hand-derived ground truth") {
    MiniCorpus mini;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(mini.corpus, mini.thetas, years, 0, 8);

    auto edges = collect_edges(net);
    std::map<EdgeKey, double> expected{
        {{2000, 0, mini.a, mini.b}, 0.8}, {{2000, 1, mini.b, mini.a}, 0.2},
        {{2000, 0, mini.b, mini.c}, 0.1}, {{2000, 1, mini.b, mini.c}, 0.9},
        {{2000, 0, mini.a, mini.a}, 1.4}, {{2000, 1, mini.a, mini.a}, 0.6},
        {{2000, 0, mini.b, mini.b}, 0.9}, {{2000, 1, mini.b, mini.b}, 1.1},
        {{2000, 0, mini.c, mini.c}, 0.1}, {{2000, 1, mini.c, mini.c}, 0.9},
    };
    REQUIRE(edges.size() == expected.size());
    for (const auto& [key, weight] : expected) {
        REQUIRE(edges.count(key));
        CHECK(edges[key] == doctest::Approx(weight).epsilon(1e-12));
    }

    const ExpertiseTable& expertise = net.expertise();
    CHECK(expertise.value(mini.a, 2000, 0) == doctest::Approx(1.4));
    CHECK(expertise.value(mini.a, 2000, 1) == doctest::Approx(0.6));
    CHECK(expertise.value(mini.b, 2000, 0) == doctest::Approx(0.9));
    CHECK(expertise.value(mini.b, 2000, 1) == doctest::Approx(1.1));
    CHECK(expertise.value(mini.c, 2000, 0) == doctest::Approx(0.1));
    CHECK(expertise.value(mini.c, 2000, 1) == doctest::Approx(0.9));

    CHECK(main_topic(expertise, mini.a, 2000) == 0);
    CHECK(main_topic(expertise, mini.b, 2000) == 1);
    CHECK(main_topic(expertise, mini.c, 2000) == 1);

    std::vector<AuthorId> all{mini.a, mini.b, mini.c};
    CHECK(main_topic_of_set(expertise, all, 2000) == 1);
    std::vector<AuthorId> only_a{mini.a};
    CHECK(main_topic_of_set(expertise, only_a, 2000) == 0);
}

TEST_CASE("single-author corpus gives only self-loops") {
    Corpus corpus = Corpus::from_records({record("p1", {"solo"}, 2000)});
    Eigen::MatrixXd thetas(1, 2);
    thetas << 0.3, 0.7;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(corpus, thetas, years, 0, 8);
    auto edges = collect_edges(net);
    REQUIRE(edges.size() == 2);
    for (const auto& [key, weight] : edges) CHECK(std::get<2>(key) == std::get<3>(key));
}

TEST_CASE("exact expertise ties produce both directions") {
    Corpus corpus = Corpus::from_records({record("p1", {"a", "b"}, 2000)});
    Eigen::MatrixXd thetas(1, 2);
    thetas << 0.5, 0.5;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(corpus, thetas, years, 0, 8);
    AuthorId a = *corpus.author_id("a"), b = *corpus.author_id("b");
    auto edges = collect_edges(net);
    for (int t = 0; t < 2; ++t) {
        REQUIRE(edges.count({2000, t, a, b}));
        REQUIRE(edges.count({2000, t, b, a}));
        CHECK(edges[{2000, t, a, b}] == edges[{2000, t, b, a}]);
    }
}

TEST_CASE("main topic is absent without positive expertise") {
    Corpus corpus = Corpus::from_records({record("p1", {"a"}, 2000)});
    Eigen::MatrixXd thetas = Eigen::MatrixXd::Zero(1, 2); // empty document
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(corpus, thetas, years, 0, 8);
    CHECK(collect_edges(net).empty());
    CHECK(!main_topic(net.expertise(), *corpus.author_id("a"), 2000));
    std::vector<AuthorId> set{*corpus.author_id("a")};
    CHECK(!main_topic_of_set(net.expertise(), set, 2000));
}

TEST_CASE("main topic tie breaks to the lowest index") {
    Corpus corpus = Corpus::from_records({record("p1", {"a"}, 2000)});
    Eigen::MatrixXd thetas(1, 2);
    thetas << 0.5, 0.5;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(corpus, thetas, years, 0, 8);
    CHECK(main_topic(net.expertise(), *corpus.author_id("a"), 2000) == 0);
}

TEST_CASE("window widens the selection inside sigma") {
    Corpus corpus = Corpus::from_records({
        record("p1", {"a", "b"}, 1999),
        record("p2", {"a"}, 2000),
    });
    Eigen::MatrixXd thetas(2, 1);
    thetas << 1.0, 1.0;
    std::vector<int> years{2000};

    TopicFlowNetwork no_window = build_tfn(corpus, thetas, years, 0, 8);
    CHECK(no_window.edges(2000, 0).size() == 1); // only a's self-loop

    TopicFlowNetwork windowed = build_tfn(corpus, thetas, years, 1, 8);
    AuthorId a = *corpus.author_id("a"), b = *corpus.author_id("b");
    auto edges = collect_edges(windowed);
    CHECK(edges.count({2000, 0, a, b})); // a has 2 papers, b has 1
    CHECK(edges[{2000, 0, a, b}] == doctest::Approx(1.0));
    CHECK(edges[{2000, 0, a, a}] == doctest::Approx(2.0));
}

TEST_CASE("top_l restricts per unordered pair and keeps self-loops") {
    Corpus corpus = Corpus::from_records({record("p1", {"a", "b"}, 2000)});
    Eigen::MatrixXd thetas(1, 4);
    thetas << 0.1, 0.4, 0.3, 0.2;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(corpus, thetas, years, 0, 2);
    AuthorId a = *corpus.author_id("a"), b = *corpus.author_id("b");

    std::map<int, int> non_loop_topics;
    int self_loops = 0;
    for (const auto& [key, weight] : collect_edges(net)) {
        if (std::get<2>(key) == std::get<3>(key)) ++self_loops;
        else ++non_loop_topics[std::get<1>(key)];
    }
    CHECK(non_loop_topics.size() == 2); // strongest two topics: 1 and 2
    CHECK(non_loop_topics.count(1));
    CHECK(non_loop_topics.count(2));
    CHECK(self_loops == 8); // both authors keep all four topics
    (void)a;
    (void)b;
}

TEST_CASE("restrict filters relations and validates keys") {
    MiniCorpus mini;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(mini.corpus, mini.thetas, years, 0, 8);

    TfnView t0 = net.restrict(2000, 0);
    std::map<EdgeKey, double> seen;
    t0.for_each_relation([&](int year, int topic, std::span<const TfnEdge> edges) {
        for (const auto& e : edges) seen[{year, topic, e.source, e.target}] = e.weight;
    });
    REQUIRE(seen.size() == 5); // a->b, b->c plus three self-loops
    CHECK(seen[{2000, 0, mini.a, mini.b}] == doctest::Approx(0.8));
    CHECK(seen[{2000, 0, mini.b, mini.c}] == doctest::Approx(0.1));

    CHECK(net.restrict().edge_count() == 10);
    CHECK(net.restrict(2000).edge_count() == 10);
    CHECK_THROWS_AS(net.restrict(1999), ParamError);
    CHECK_THROWS_AS(net.restrict(std::nullopt, 7), ParamError);
    CHECK(t0.node_count() == 3);
}

TEST_CASE("empty years and bad parameters are rejected") {
    MiniCorpus mini;
    std::vector<int> none;
    CHECK_THROWS_AS(build_tfn(mini.corpus, mini.thetas, none, 0, 8), ParamError);
    std::vector<int> years{2000};
    CHECK_THROWS_AS(build_tfn(mini.corpus, mini.thetas, years, 0, 0), ParamError);
}

TEST_CASE("a year without publications yields empty relations") {
    MiniCorpus mini;
    std::vector<int> years{2000, 2005};
    TopicFlowNetwork net = build_tfn(mini.corpus, mini.thetas, years, 0, 8);
    CHECK(net.restrict(2005).edge_count() == 0);
    CHECK(net.restrict(2005).node_count() == 3);
}

namespace {

struct RandomInstance {
    Corpus corpus;
    Eigen::MatrixXd thetas;
    std::vector<oracle::Paper> papers;
    std::vector<int> years;
    int n_topics;
};

RandomInstance random_instance(std::mt19937_64& rng) {
    RandomInstance inst;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n_authors = 2 + static_cast<int>(rng() % 5); // <= 6
    const int n_papers = 1 + static_cast<int>(rng() % 10); // <= 10
    inst.n_topics = 1 + static_cast<int>(rng() % 4);       // <= 4

    std::vector<PublicationRecord> records;
    inst.thetas.resize(n_papers, inst.n_topics);
    for (int p = 0; p < n_papers; ++p) {
        std::vector<std::string> authors;
        std::vector<std::uint32_t> ids;
        int k = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < k; ++i) {
            auto a = static_cast<std::uint32_t>(rng() % n_authors);
            std::string name(1, static_cast<char>('a' + a));
            if (std::find(authors.begin(), authors.end(), name) == authors.end()) {
                authors.push_back(name);
                ids.push_back(a);
            }
        }
        int year = 2000 + static_cast<int>(rng() % 3);
        records.push_back(record(std::string("p") + (p < 10 ? "0" : "") + std::to_string(p),
                                 authors, year));

        oracle::Paper paper;
        paper.year = year;
        paper.authors = ids;
        for (int t = 0; t < inst.n_topics; ++t) {
            double v = rng() % 4 == 0 ? 0.0 : unit(rng); // some exact zeros
            inst.thetas(p, t) = v;
            paper.theta.push_back(v);
        }
        inst.papers.push_back(std::move(paper));
    }
    inst.corpus = Corpus::from_records(std::move(records));

    // corpus sorts by paper id; with zero-padded ids the order is stable, so
    // row p of thetas still matches paper p
    inst.years = {2000, 2001, 2002};
    return inst;
}

// Map single-letter oracle author ids onto corpus author ids.
AuthorId to_corpus_id(const Corpus& corpus, std::uint32_t oracle_id) {
    return *corpus.author_id(std::string(1, static_cast<char>('a' + oracle_id)));
}

} // namespace

TEST_CASE("random corpora match the brute-force enumeration oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        RandomInstance inst = random_instance(rng);
        int window = static_cast<int>(rng() % 3);
        int top_l = 1 + static_cast<int>(rng() % 4);

        TopicFlowNetwork net =
            build_tfn(inst.corpus, inst.thetas, inst.years, window, top_l);
        auto got = collect_edges(net);

        std::uint32_t n_oracle_authors = 0;
        for (const auto& p : inst.papers)
            for (auto a : p.authors) n_oracle_authors = std::max(n_oracle_authors, a + 1);
        auto expected = oracle::build_tfn(inst.papers, n_oracle_authors, inst.n_topics,
                                          inst.years, window, top_l);

        REQUIRE(got.size() == expected.size());
        for (const auto& [key, weight] : expected) {
            EdgeKey mapped{std::get<0>(key), std::get<1>(key),
                           to_corpus_id(inst.corpus, std::get<2>(key)),
                           to_corpus_id(inst.corpus, std::get<3>(key))};
            REQUIRE(got.count(mapped));
            CHECK(got[mapped] == doctest::Approx(weight).epsilon(1e-9));
        }

        // direction soundness + top-l bound + expertise identity
        const ExpertiseTable& expertise = net.expertise();
        std::map<std::tuple<int, AuthorId, AuthorId>, std::set<int>> pair_topics;
        for (const auto& [key, weight] : got) {
            auto [year, topic, source, target] = key;
            CHECK(expertise.value(source, year, topic) >=
                  expertise.value(target, year, topic) - 1e-12);
            if (source != target)
                pair_topics[{year, std::min(source, target), std::max(source, target)}].insert(
                    topic);
            else
                CHECK(weight ==
                      doctest::Approx(expertise.value(source, year, topic)).epsilon(1e-12));
        }
        for (const auto& [key, topics] : pair_topics)
            CHECK(static_cast<int>(topics.size()) <= top_l);
    }
}

TEST_CASE("edge TSV export is ordered and re-readable") {
    MiniCorpus mini;
    std::vector<int> years{2000};
    TopicFlowNetwork net = build_tfn(mini.corpus, mini.thetas, years, 0, 8);
    auto dir = testutil::temp_dir("network");
    write_edges_tsv(net, dir / "edges.tsv");

    std::ifstream in(dir / "edges.tsv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "year\ttopic\tsource\ttarget\tweight");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    CHECK(lines.size() == 10);
    std::vector<std::string> sorted = lines;
    std::sort(sorted.begin(), sorted.end());
    // (year, topic, source, target) ordering implies lexicographic rows here
    CHECK(lines == sorted);

    TopicFlowNetwork loaded = read_edges_tsv(dir / "edges.tsv");
    auto got = collect_edges(loaded);
    auto want = collect_edges(net);
    REQUIRE(got.size() == want.size());
    for (const auto& [key, weight] : want)
        CHECK(got[key] == doctest::Approx(weight).epsilon(1e-8));
    CHECK(loaded.expertise().value(mini.a, 2000, 0) == doctest::Approx(1.4).epsilon(1e-8));

    testutil::write_file(dir / "broken.tsv", "year\ttopic\tsource\n2000\t0\tx\n");
    CHECK_THROWS_AS(read_edges_tsv(dir / "broken.tsv"), FormatError);
    CHECK_THROWS_AS(read_edges_tsv(dir / "missing.tsv"), IoError);
}
