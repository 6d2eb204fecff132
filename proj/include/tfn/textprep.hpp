#pragma once

#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tfn/corpus.hpp"

namespace tfn {

using StopwordSet = std::unordered_set<std::string>;

/// Lowercased ASCII-alphabetic tokens; digits, punctuation and any
/// non-alphabetic byte act as separators. Tokens shorter than 2 are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Stop-word language heuristic: true iff the fraction of tokens (with
/// multiplicity) contained in `stopwords` is at least `threshold`.
/// An empty token list is never classified as English.
bool is_english(const std::vector<std::string>& tokens, const StopwordSet& stopwords,
                double threshold);

/// Load a stop-word file: UTF-8, one token per line, '#' comment lines and
/// blank lines ignored. Throws IoError if unreadable.
StopwordSet load_stopwords(const std::filesystem::path& path);

/// Term dictionary of a fitted document-term matrix. idf uses the smoothed
/// variant ln((1+N)/(1+df)) + 1 over the N training documents.
struct Vocabulary {
    std::vector<std::string> terms; // index -> term, lexicographic
    std::unordered_map<std::string, int> index;
    std::vector<int> document_frequency;
    std::size_t n_docs = 0;

    int size() const { return static_cast<int>(terms.size()); }
    double idf(int term) const;
};

/// Sparse tf-idf matrix. Row order follows corpus iteration order over the
/// retained documents; rows that became empty during preprocessing stay as
/// unstored all-zero rows. Stored rows are L2-normalized.
struct DocTermMatrix {
    std::vector<std::string> rows; // document ids
    Eigen::SparseMatrix<double, Eigen::RowMajor> values;
    Vocabulary vocabulary;
};

/// Tokenized text of one record: title and abstract concatenated.
std::vector<std::string> record_tokens(const PublicationRecord& record);

/// Language verdict for a whole record (title + abstract tokens).
bool is_english_record(const PublicationRecord& record, const StopwordSet& stopwords,
                       double threshold);

/// Build the tf-idf matrix over a corpus: non-English documents are dropped,
/// documents without an abstract are dropped when require_abstract is set,
/// stop words are removed and terms with document frequency < min_df are
/// pruned. Throws FormatError when every document is filtered out.
DocTermMatrix build_matrix(const Corpus& corpus, const StopwordSet& stopwords,
                           double threshold, bool require_abstract, int min_df);

/// tf-idf vector of a record under an existing vocabulary; out-of-vocabulary
/// terms are ignored and the result is L2-normalized (all-zero stays zero).
Eigen::SparseVector<double> vectorize(const Vocabulary& vocabulary,
                                      const PublicationRecord& record,
                                      const StopwordSet& stopwords);

/// Debug export: one "doc<TAB>term<TAB>value" line per stored entry.
void write_matrix_tsv(const DocTermMatrix& matrix, const std::filesystem::path& path);

} // namespace tfn
