#include "tfn/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "tfn/errors.hpp"

namespace tfn {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2) tokens.push_back(current);
        current.clear();
    };
    for (char c : text) {
        if (c >= 'a' && c <= 'z') {
            current.push_back(c);
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

bool is_english(const std::vector<std::string>& tokens, const StopwordSet& stopwords,
                double threshold) {
    if (tokens.empty()) return false;
    std::size_t hits = 0;
    for (const auto& tok : tokens)
        if (stopwords.count(tok)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(tokens.size()) >= threshold;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stop-word file: " + path.string());
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        set.insert(line.substr(start));
    }
    return set;
}

double Vocabulary::idf(int term) const {
    return std::log((1.0 + static_cast<double>(n_docs)) /
                    (1.0 + static_cast<double>(document_frequency[term]))) +
           1.0;
}

std::vector<std::string> record_tokens(const PublicationRecord& record) {
    std::string text = record.title;
    if (record.abstract) {
        text.push_back(' ');
        text += *record.abstract;
    }
    return tokenize(text);
}

bool is_english_record(const PublicationRecord& record, const StopwordSet& stopwords,
                       double threshold) {
    return is_english(record_tokens(record), stopwords, threshold);
}

namespace {

// tf counts of the non-stop-word tokens, keyed by term.
std::map<std::string, int> term_counts(const std::vector<std::string>& tokens,
                                       const StopwordSet& stopwords) {
    std::map<std::string, int> counts;
    for (const auto& tok : tokens)
        if (!stopwords.count(tok)) ++counts[tok];
    return counts;
}

} // namespace

DocTermMatrix build_matrix(const Corpus& corpus, const StopwordSet& stopwords,
                           double threshold, bool require_abstract, int min_df) {
    struct Doc {
        const PublicationRecord* record;
        std::map<std::string, int> counts;
    };
    std::vector<Doc> docs;
    for (const auto& rec : corpus.records()) {
        auto tokens = record_tokens(rec);
        if (!is_english(tokens, stopwords, threshold)) continue;
        if (require_abstract && !rec.abstract) continue;
        docs.push_back({&rec, term_counts(tokens, stopwords)});
    }
    if (docs.empty())
        throw FormatError("no documents left after language/abstract filtering");

    std::map<std::string, int> df;
    for (const auto& doc : docs)
        for (const auto& [term, count] : doc.counts) ++df[term];

    DocTermMatrix matrix;
    Vocabulary& vocab = matrix.vocabulary;
    vocab.n_docs = docs.size();
    for (const auto& [term, count] : df) {
        if (count < min_df) continue;
        vocab.index.emplace(term, static_cast<int>(vocab.terms.size()));
        vocab.terms.push_back(term);
        vocab.document_frequency.push_back(count);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t row = 0; row < docs.size(); ++row) {
        matrix.rows.push_back(docs[row].record->paper_id);
        double norm_sq = 0.0;
        std::vector<std::pair<int, double>> entries;
        for (const auto& [term, count] : docs[row].counts) {
            auto it = vocab.index.find(term);
            if (it == vocab.index.end()) continue;
            double value = static_cast<double>(count) * vocab.idf(it->second);
            entries.emplace_back(it->second, value);
            norm_sq += value * value;
        }
        if (norm_sq == 0.0) continue; // all-zero row stays unstored
        double norm = std::sqrt(norm_sq);
        for (const auto& [col, value] : entries)
            triplets.emplace_back(static_cast<int>(row), col, value / norm);
    }

    matrix.values.resize(static_cast<Eigen::Index>(docs.size()), vocab.size());
    matrix.values.setFromTriplets(triplets.begin(), triplets.end());
    matrix.values.makeCompressed();
    return matrix;
}

Eigen::SparseVector<double> vectorize(const Vocabulary& vocabulary,
                                      const PublicationRecord& record,
                                      const StopwordSet& stopwords) {
    Eigen::SparseVector<double> vec(vocabulary.size());
    auto counts = term_counts(record_tokens(record), stopwords);
    double norm_sq = 0.0;
    for (const auto& [term, count] : counts) {
        auto it = vocabulary.index.find(term);
        if (it == vocabulary.index.end()) continue;
        double value = static_cast<double>(count) * vocabulary.idf(it->second);
        vec.coeffRef(it->second) = value;
        norm_sq += value * value;
    }
    if (norm_sq > 0.0) vec /= std::sqrt(norm_sq);
    return vec;
}

void write_matrix_tsv(const DocTermMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write matrix TSV: " + path.string());
    out.precision(17);
    for (int row = 0; row < matrix.values.outerSize(); ++row)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix.values, row);
             it; ++it)
            out << matrix.rows[static_cast<std::size_t>(row)] << '\t'
                << matrix.vocabulary.terms[static_cast<std::size_t>(it.col())] << '\t'
                << it.value() << '\n';
}

} // namespace tfn
