#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tfn/corpus.hpp"
#include "tfn/textprep.hpp"

namespace tfn {

/// Non-negative factorization of a tf-idf matrix. topic_term is
/// n_topics x n_terms, doc_topic is n_docs x n_topics; both factors are
/// non-negative and the training error trace is non-increasing.
struct TopicModel {
    int n_topics = 0;
    Eigen::MatrixXd topic_term;
    Eigen::MatrixXd doc_topic;
    std::vector<std::string> terms;   // column labels of topic_term
    std::vector<std::string> doc_ids; // row labels of doc_topic
    std::vector<double> training_error_trace; // Frobenius error per iteration
    std::uint64_t seed = 0;
};

/// Fit NMF by Lee-Seung multiplicative updates on the squared Frobenius
/// objective, starting from seeded uniform-random positive factors. Stops
/// after max_iter iterations or when the relative error improvement falls
/// below tol. Throws ParamError when n_topics is outside
/// [1, min(rows, terms)] and NumericError if factors become non-finite.
TopicModel fit_nmf(const DocTermMatrix& matrix, int n_topics, int max_iter, double tol,
                   std::uint64_t seed);

/// Topic proportions of one training document: the doc_topic row
/// L1-normalized to sum 1 (all-zero rows stay all-zero).
Eigen::VectorXd paper_theta(const TopicModel& model, Eigen::Index row);

/// Topic proportions of an unseen document: non-negative least squares of
/// the tf-idf vector against topic_term via multiplicative updates, then
/// L1-normalized.
Eigen::VectorXd project_theta(const TopicModel& model, const Eigen::SparseVector<double>& x,
                              int max_iter = 200, double tol = 1e-9);

/// Per-record topic proportions for a whole corpus: training documents take
/// their doc_topic row, all other records are vectorized and projected.
/// Row order matches corpus record order.
Eigen::MatrixXd theta_table(const Corpus& corpus, const TopicModel& model,
                            const Vocabulary& vocabulary, const StopwordSet& stopwords);

/// Topic vector of an author in a year: componentwise sum of paper thetas
/// over the windowed selection. Empty selections give the zero vector.
Eigen::VectorXd author_theta(const Corpus& corpus, const Eigen::MatrixXd& paper_thetas,
                             AuthorId author, int year, int window);

/// The k heaviest terms of a topic, descending, ties broken
/// lexicographically. Throws ParamError on a bad topic index.
std::vector<std::string> top_terms(const TopicModel& model, int topic, int k);

/// Persist a model directory: topic_term.tsv, doc_topic.tsv, docs.txt,
/// vocabulary.tsv and meta. Weights are written in shortest round-trip form
/// so that load_model(save_model(m)) reproduces the factors exactly.
void save_model(const TopicModel& model, const Vocabulary& vocabulary,
                const std::filesystem::path& dir);

struct LoadedModel {
    TopicModel model;
    Vocabulary vocabulary;
};

LoadedModel load_model(const std::filesystem::path& dir);

} // namespace tfn
