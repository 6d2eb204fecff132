#include "tfn/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include "tfn/errors.hpp"

namespace tfn {

std::string normalize_author(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_space = true; // swallows leading whitespace
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

Corpus Corpus::from_records(std::vector<PublicationRecord> records) {
    for (auto& rec : records) {
        std::vector<std::string> cleaned;
        for (const auto& author : rec.authors) {
            std::string norm = normalize_author(author);
            if (norm.empty()) continue;
            if (std::find(cleaned.begin(), cleaned.end(), norm) == cleaned.end())
                cleaned.push_back(std::move(norm));
        }
        if (cleaned.empty())
            throw ParamError("record '" + rec.paper_id + "' has no valid authors");
        rec.authors = std::move(cleaned);
    }

    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.paper_id < b.paper_id; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].paper_id == records[i - 1].paper_id)
            throw ParamError("duplicate paper id '" + records[i].paper_id + "'");

    Corpus corpus;
    corpus.records_ = std::move(records);

    for (const auto& rec : corpus.records_)
        for (const auto& author : rec.authors) corpus.authors_.push_back(author);
    std::sort(corpus.authors_.begin(), corpus.authors_.end());
    corpus.authors_.erase(std::unique(corpus.authors_.begin(), corpus.authors_.end()),
                          corpus.authors_.end());
    for (AuthorId id = 0; id < corpus.authors_.size(); ++id)
        corpus.author_ids_.emplace(corpus.authors_[id], id);

    corpus.record_authors_.resize(corpus.records_.size());
    corpus.author_papers_.resize(corpus.authors_.size());
    int lo = 0, hi = 0;
    for (std::size_t i = 0; i < corpus.records_.size(); ++i) {
        const auto& rec = corpus.records_[i];
        if (i == 0) {
            lo = hi = rec.year;
        } else {
            lo = std::min(lo, rec.year);
            hi = std::max(hi, rec.year);
        }
        for (const auto& author : rec.authors) {
            AuthorId id = corpus.author_ids_.at(author);
            corpus.record_authors_[i].push_back(id);
            corpus.author_papers_[id].emplace_back(rec.year, i);
        }
    }
    for (auto& papers : corpus.author_papers_) std::sort(papers.begin(), papers.end());
    corpus.year_range_ = {lo, hi};
    return corpus;
}

std::optional<AuthorId> Corpus::author_id(std::string_view name) const {
    auto it = author_ids_.find(std::string(name));
    if (it == author_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Corpus::find_paper(std::string_view paper_id) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), paper_id,
                               [](const PublicationRecord& rec, std::string_view id) {
                                   return rec.paper_id < id;
                               });
    if (it == records_.end() || it->paper_id != paper_id) return std::nullopt;
    return static_cast<std::size_t>(it - records_.begin());
}

std::vector<std::size_t> Corpus::select(AuthorId author, int year, int window) const {
    std::vector<std::size_t> out;
    if (author >= author_papers_.size()) return out;
    for (const auto& [y, idx] : author_papers_[author])
        if (y >= year - window && y <= year) out.push_back(idx);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Parse and validate one JSONL record; nullopt means malformed.
std::optional<PublicationRecord> parse_record(const std::string& line) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

    PublicationRecord rec;
    auto id = obj.find("id");
    if (id == obj.end() || !id->is_string()) return std::nullopt;
    rec.paper_id = id->get<std::string>();
    if (rec.paper_id.empty()) return std::nullopt;

    auto title = obj.find("title");
    if (title == obj.end() || !title->is_string()) return std::nullopt;
    rec.title = title->get<std::string>();

    auto abstract = obj.find("abstract");
    if (abstract != obj.end() && !abstract->is_null()) {
        if (!abstract->is_string()) return std::nullopt;
        rec.abstract = abstract->get<std::string>();
    }

    auto year = obj.find("year");
    if (year == obj.end() || !year->is_number_integer()) return std::nullopt;
    rec.year = year->get<int>();

    auto authors = obj.find("authors");
    if (authors == obj.end() || !authors->is_array() || authors->empty()) return std::nullopt;
    for (const auto& a : *authors) {
        if (!a.is_string()) return std::nullopt;
        std::string norm = normalize_author(a.get<std::string>());
        if (norm.empty()) continue;
        if (std::find(rec.authors.begin(), rec.authors.end(), norm) == rec.authors.end())
            rec.authors.push_back(std::move(norm));
    }
    if (rec.authors.empty()) return std::nullopt;

    auto fields = obj.find("fields");
    if (fields != obj.end() && !fields->is_null()) {
        if (!fields->is_array()) return std::nullopt;
        for (const auto& f : *fields) {
            if (!f.is_string()) return std::nullopt;
            rec.fields_of_study.push_back(f.get<std::string>());
        }
    }
    return rec;
}

} // namespace

Corpus load_corpus(const std::filesystem::path& path, int min_year, int max_year,
                   const std::set<std::string>& include_fields,
                   const std::set<std::string>& exclude_fields, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path.string());

    LoadReport rep;
    std::vector<PublicationRecord> kept;
    std::set<std::string> seen_ids;
    std::size_t warned = 0;
    constexpr std::size_t kMaxWarnings = 10;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++rep.total_lines;

        auto rec = parse_record(line);
        if (rec && !seen_ids.insert(rec->paper_id).second) rec.reset();
        if (!rec) {
            ++rep.malformed;
            if (warned++ < kMaxWarnings)
                std::cerr << "warn [corpus]: skipping malformed line " << line_no << "\n";
            continue;
        }

        bool in_range = rec->year >= min_year && rec->year <= max_year;
        bool included = include_fields.empty();
        bool excluded = false;
        for (const auto& f : rec->fields_of_study) {
            if (include_fields.count(f)) included = true;
            if (exclude_fields.count(f)) excluded = true;
        }
        if (!in_range || !included || excluded) {
            ++rep.filtered;
            continue;
        }
        kept.push_back(std::move(*rec));
    }
    if (in.bad()) throw IoError("read error on corpus file: " + path.string());

    std::cerr << "skipped=" << rep.skipped() << " total=" << rep.total_lines << "\n";
    if (rep.total_lines > 0 && rep.malformed * 2 > rep.total_lines)
        throw FormatError("more than half of the input lines are malformed (" +
                          std::to_string(rep.malformed) + "/" +
                          std::to_string(rep.total_lines) + "); wrong input file?");

    if (report) *report = rep;
    return Corpus::from_records(std::move(kept));
}

} // namespace tfn
