#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tfn/corpus.hpp"

namespace tfn {

/// Directed edge of one (year, topic) relation. Self-loops carry expertise.
struct TfnEdge {
    AuthorId source = 0;
    AuthorId target = 0;
    double weight = 0.0;
};

/// Raw author-year topic vectors; the self-loop weight of author a on topic
/// t in year y equals value(a, y, t).
class ExpertiseTable {
public:
    ExpertiseTable() = default;
    ExpertiseTable(int n_topics, std::vector<int> years)
        : n_topics_(n_topics), years_(std::move(years)), by_year_(years_.size()) {}

    int n_topics() const { return n_topics_; }
    const std::vector<int>& years() const { return years_; }

    double value(AuthorId author, int year, int topic) const;
    /// Full topic vector, or nullptr when the author selected no papers.
    const Eigen::VectorXd* vector(AuthorId author, int year) const;
    /// Authors with a non-empty selection in a year, ascending.
    const std::map<AuthorId, Eigen::VectorXd>& year_table(int year) const;

    void set(AuthorId author, int year, Eigen::VectorXd theta);

private:
    std::optional<std::size_t> year_index(int year) const;

    int n_topics_ = 0;
    std::vector<int> years_;
    std::vector<std::map<AuthorId, Eigen::VectorXd>> by_year_;
};

/// Main topic of an author in a year: argmax of expertise, lowest index on
/// ties; absent when the author has no positive expertise.
std::optional<int> main_topic(const ExpertiseTable& expertise, AuthorId author, int year);

/// Most frequent defined main topic of a set of authors, frequency ties
/// broken by lower topic index; absent when no member has one.
std::optional<int> main_topic_of_set(const ExpertiseTable& expertise,
                                     std::span<const AuthorId> authors, int year);

class TfnView;

/// The topic flow network: a directed, edge-weighted multigraph over the
/// corpus authors with one edge relation per (year, topic). Non-loop edges
/// point from the author with higher expertise to the lower one (both
/// directions on exact ties) and are limited to top_l topics per unordered
/// author pair per year. Zero-weight edges are never stored.
class TopicFlowNetwork {
public:
    struct Provenance {
        int window = 0;
        int top_l = 0;
        std::string model_id;
    };

    TopicFlowNetwork() = default;

    const std::vector<std::string>& authors() const { return authors_; }
    const std::vector<int>& years() const { return years_; }
    int n_topics() const { return n_topics_; }
    const Provenance& provenance() const { return provenance_; }
    const ExpertiseTable& expertise() const { return expertise_; }

    bool has_year(int year) const;

    /// Edges of one relation, sorted by (source, target); empty when none.
    std::span<const TfnEdge> edges(int year, int topic) const;
    const std::map<std::pair<int, int>, std::vector<TfnEdge>>& relations() const {
        return relations_;
    }

    /// Read-only view restricted to a year and/or topic. Throws ParamError
    /// when the requested year or topic does not exist. Views borrow the
    /// network, so restricting a temporary is rejected.
    TfnView restrict(std::optional<int> year = std::nullopt,
                     std::optional<int> topic = std::nullopt) const&;
    TfnView restrict(std::optional<int> year = std::nullopt,
                     std::optional<int> topic = std::nullopt) const&& = delete;

    /// Assemble a network from explicit per-relation edges; the expertise
    /// table is reconstructed from the self-loops.
    static TopicFlowNetwork from_edges(
        std::vector<std::string> authors, std::vector<int> years, int n_topics,
        const std::vector<std::tuple<int, int, AuthorId, AuthorId, double>>& edges,
        Provenance provenance);
    static TopicFlowNetwork from_edges(
        std::vector<std::string> authors, std::vector<int> years, int n_topics,
        const std::vector<std::tuple<int, int, AuthorId, AuthorId, double>>& edges);

    friend TopicFlowNetwork build_tfn(const Corpus&, const Eigen::MatrixXd&,
                                      std::span<const int>, int, int, std::string);

private:
    std::vector<std::string> authors_;
    std::vector<int> years_;
    int n_topics_ = 0;
    std::map<std::pair<int, int>, std::vector<TfnEdge>> relations_;
    ExpertiseTable expertise_;
    Provenance provenance_;
};

/// Read-only slice of a network: all relations matching the optional year
/// and topic filters. The node set is always the full author set.
class TfnView {
public:
    TfnView(const TopicFlowNetwork& net, std::optional<int> year, std::optional<int> topic)
        : net_(&net), year_(year), topic_(topic) {}

    const TopicFlowNetwork& network() const { return *net_; }
    std::optional<int> year() const { return year_; }
    std::optional<int> topic() const { return topic_; }
    std::size_t node_count() const { return net_->authors().size(); }

    /// Visit every matching relation in (year, topic) order.
    void for_each_relation(
        const std::function<void(int year, int topic, std::span<const TfnEdge>)>& fn) const;

    std::size_t edge_count() const;

private:
    const TopicFlowNetwork* net_;
    std::optional<int> year_;
    std::optional<int> topic_;
};

/// Construct the network from a corpus and per-record topic proportions
/// (rows aligned with corpus records). Years are built independently;
/// window widens the selection map on both sides of every author pair.
/// Throws ParamError on an empty year list or top_l < 1.
TopicFlowNetwork build_tfn(const Corpus& corpus, const Eigen::MatrixXd& paper_thetas,
                           std::span<const int> years, int window, int top_l,
                           std::string model_id = {});

/// Edge-list TSV: year, topic, source, target, weight (9 significant
/// digits), rows ordered by (year, topic, source, target).
void write_edges_tsv(const TopicFlowNetwork& net, const std::filesystem::path& path);

/// Inverse of write_edges_tsv up to the printed precision.
TopicFlowNetwork read_edges_tsv(const std::filesystem::path& path);

} // namespace tfn
