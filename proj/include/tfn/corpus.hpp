#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tfn {

/// One publication: identifier, text, normalized author list, year.
struct PublicationRecord {
    std::string paper_id;
    std::string title;
    std::optional<std::string> abstract;
    std::vector<std::string> authors; // normalized, duplicate-free, original order
    int year = 0;
    std::vector<std::string> fields_of_study;
};

using AuthorId = std::uint32_t;

/// Collapse internal whitespace runs to a single space and trim the ends.
/// Case is preserved; no further author disambiguation happens.
std::string normalize_author(std::string_view raw);

/// Immutable, deterministically ordered set of publication records with an
/// author index. Records are sorted by paper_id; author ids index into
/// authors(), which is sorted lexicographically.
class Corpus {
public:
    Corpus() = default;

    /// Build from in-memory records. Throws ParamError on duplicate paper
    /// ids or empty author lists; authors are normalized and deduplicated.
    static Corpus from_records(std::vector<PublicationRecord> records);

    const std::vector<PublicationRecord>& records() const { return records_; }
    std::pair<int, int> year_range() const { return year_range_; }

    const std::vector<std::string>& authors() const { return authors_; }
    std::optional<AuthorId> author_id(std::string_view name) const;
    const std::string& author_name(AuthorId id) const { return authors_[id]; }

    std::optional<std::size_t> find_paper(std::string_view paper_id) const;

    /// Author ids of one record, aligned with records()[record].authors.
    const std::vector<AuthorId>& record_author_ids(std::size_t record) const {
        return record_authors_[record];
    }

    /// Selection map: indices of the author's papers published in
    /// [year - window, year], sorted ascending. Unknown authors select
    /// nothing.
    std::vector<std::size_t> select(AuthorId author, int year, int window) const;

private:
    std::vector<PublicationRecord> records_;
    std::vector<std::string> authors_;
    std::unordered_map<std::string, AuthorId> author_ids_;
    std::vector<std::vector<AuthorId>> record_authors_;
    // author -> (year, record index), sorted by year then index
    std::vector<std::vector<std::pair<int, std::size_t>>> author_papers_;
    std::pair<int, int> year_range_{0, 0};
};

struct LoadReport {
    std::size_t total_lines = 0; // non-empty input lines
    std::size_t malformed = 0;   // failed parsing or schema validation
    std::size_t filtered = 0;    // valid but outside year/field filters
    std::size_t skipped() const { return malformed + filtered; }
    std::size_t loaded() const { return total_lines - skipped(); }
};

/// Load a JSON Lines corpus. Each line holds one object with keys
/// id, title, abstract (nullable), authors, year, fields. Records outside
/// [min_year, max_year] are dropped, as are records whose fields miss
/// include_fields (when non-empty) or touch exclude_fields. Malformed lines
/// are skipped; the skip report is written to stderr as
/// "skipped=<n> total=<m>". Throws IoError if the file cannot be read and
/// FormatError when more than half of the lines are malformed.
Corpus load_corpus(const std::filesystem::path& path, int min_year, int max_year,
                   const std::set<std::string>& include_fields = {},
                   const std::set<std::string>& exclude_fields = {},
                   LoadReport* report = nullptr);

} // namespace tfn
