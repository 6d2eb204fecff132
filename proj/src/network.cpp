#include "tfn/network.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "tfn/errors.hpp"

namespace tfn {

std::optional<std::size_t> ExpertiseTable::year_index(int year) const {
    auto it = std::find(years_.begin(), years_.end(), year);
    if (it == years_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - years_.begin());
}

double ExpertiseTable::value(AuthorId author, int year, int topic) const {
    const Eigen::VectorXd* vec = vector(author, year);
    if (!vec || topic < 0 || topic >= n_topics_) return 0.0;
    return (*vec)(topic);
}

const Eigen::VectorXd* ExpertiseTable::vector(AuthorId author, int year) const {
    auto yi = year_index(year);
    if (!yi) return nullptr;
    auto it = by_year_[*yi].find(author);
    if (it == by_year_[*yi].end()) return nullptr;
    return &it->second;
}

const std::map<AuthorId, Eigen::VectorXd>& ExpertiseTable::year_table(int year) const {
    auto yi = year_index(year);
    if (!yi) throw ParamError("unknown year " + std::to_string(year));
    return by_year_[*yi];
}

void ExpertiseTable::set(AuthorId author, int year, Eigen::VectorXd theta) {
    auto yi = year_index(year);
    if (!yi) throw ParamError("unknown year " + std::to_string(year));
    by_year_[*yi][author] = std::move(theta);
}

std::optional<int> main_topic(const ExpertiseTable& expertise, AuthorId author, int year) {
    const Eigen::VectorXd* vec = expertise.vector(author, year);
    if (!vec) return std::nullopt;
    int best = -1;
    double best_value = 0.0;
    for (int t = 0; t < static_cast<int>(vec->size()); ++t) {
        if ((*vec)(t) > best_value) {
            best_value = (*vec)(t);
            best = t;
        }
    }
    if (best < 0) return std::nullopt; // no positive expertise
    return best;
}

std::optional<int> main_topic_of_set(const ExpertiseTable& expertise,
                                     std::span<const AuthorId> authors, int year) {
    std::map<int, std::size_t> counts;
    for (AuthorId a : authors)
        if (auto t = main_topic(expertise, a, year)) ++counts[*t];
    std::optional<int> best;
    std::size_t best_count = 0;
    for (const auto& [topic, count] : counts) {
        if (count > best_count) { // map order breaks frequency ties by low index
            best_count = count;
            best = topic;
        }
    }
    return best;
}

bool TopicFlowNetwork::has_year(int year) const {
    return std::find(years_.begin(), years_.end(), year) != years_.end();
}

std::span<const TfnEdge> TopicFlowNetwork::edges(int year, int topic) const {
    auto it = relations_.find({year, topic});
    if (it == relations_.end()) return {};
    return it->second;
}

TfnView TopicFlowNetwork::restrict(std::optional<int> year, std::optional<int> topic) const& {
    if (year && !has_year(*year)) throw ParamError("unknown year " + std::to_string(*year));
    if (topic && (*topic < 0 || *topic >= n_topics_))
        throw ParamError("unknown topic " + std::to_string(*topic));
    return TfnView(*this, year, topic);
}

void TfnView::for_each_relation(
    const std::function<void(int, int, std::span<const TfnEdge>)>& fn) const {
    for (const auto& [key, edges] : net_->relations()) {
        if (year_ && key.first != *year_) continue;
        if (topic_ && key.second != *topic_) continue;
        fn(key.first, key.second, edges);
    }
}

std::size_t TfnView::edge_count() const {
    std::size_t n = 0;
    for_each_relation([&](int, int, std::span<const TfnEdge> edges) { n += edges.size(); });
    return n;
}

namespace {

struct YearRelations {
    std::map<AuthorId, Eigen::VectorXd> author_vectors;
    std::map<int, std::vector<TfnEdge>> edges_by_topic;
};

YearRelations build_year(const Corpus& corpus, const Eigen::MatrixXd& thetas, int year,
                         int window, int top_l) {
    YearRelations out;
    const int n_topics = static_cast<int>(thetas.cols());

    std::map<std::pair<AuthorId, AuthorId>, Eigen::VectorXd> shared;
    for (std::size_t i = 0; i < corpus.records().size(); ++i) {
        int y = corpus.records()[i].year;
        if (y < year - window || y > year) continue;
        const auto& authors = corpus.record_author_ids(i);
        Eigen::VectorXd theta = thetas.row(static_cast<Eigen::Index>(i)).transpose();
        for (AuthorId a : authors) {
            auto [it, inserted] =
                out.author_vectors.try_emplace(a, Eigen::VectorXd::Zero(n_topics));
            it->second += theta;
        }
        for (std::size_t p = 0; p < authors.size(); ++p) {
            for (std::size_t q = p + 1; q < authors.size(); ++q) {
                AuthorId a = std::min(authors[p], authors[q]);
                AuthorId b = std::max(authors[p], authors[q]);
                auto [it, inserted] =
                    shared.try_emplace({a, b}, Eigen::VectorXd::Zero(n_topics));
                it->second += theta;
            }
        }
    }

    // Self-loops carry the expertise of every selecting author.
    for (const auto& [a, vec] : out.author_vectors)
        for (int t = 0; t < n_topics; ++t)
            if (vec(t) > 0.0) out.edges_by_topic[t].push_back({a, a, vec(t)});

    // Collaboration edges, directed toward lower expertise, both directions
    // on exact ties, at most top_l topics per pair.
    for (const auto& entry : shared) {
        const std::pair<AuthorId, AuthorId>& pair = entry.first;
        const Eigen::VectorXd& vec = entry.second;
        const Eigen::VectorXd& ea = out.author_vectors.at(pair.first);
        const Eigen::VectorXd& eb = out.author_vectors.at(pair.second);
        std::vector<int> topics;
        for (int t = 0; t < n_topics; ++t)
            if (vec(t) > 0.0) topics.push_back(t);
        std::sort(topics.begin(), topics.end(), [&](int lhs, int rhs) {
            if (vec(lhs) != vec(rhs)) return vec(lhs) > vec(rhs);
            return lhs < rhs;
        });
        if (static_cast<int>(topics.size()) > top_l) topics.resize(static_cast<std::size_t>(top_l));
        for (int t : topics) {
            double w = vec(t);
            if (ea(t) >= eb(t)) out.edges_by_topic[t].push_back({pair.first, pair.second, w});
            if (eb(t) >= ea(t)) out.edges_by_topic[t].push_back({pair.second, pair.first, w});
        }
    }

    for (auto& [topic, edges] : out.edges_by_topic)
        std::sort(edges.begin(), edges.end(), [](const TfnEdge& x, const TfnEdge& y) {
            if (x.source != y.source) return x.source < y.source;
            return x.target < y.target;
        });
    return out;
}

} // namespace

TopicFlowNetwork build_tfn(const Corpus& corpus, const Eigen::MatrixXd& paper_thetas,
                           std::span<const int> years, int window, int top_l,
                           std::string model_id) {
    if (years.empty()) throw ParamError("empty year list");
    if (top_l < 1) throw ParamError("top_l must be at least 1");
    if (window < 0) throw ParamError("window must be non-negative");
    if (paper_thetas.rows() != static_cast<Eigen::Index>(corpus.records().size()))
        throw ParamError("theta table does not match corpus size");

    TopicFlowNetwork net;
    net.authors_ = corpus.authors();
    net.years_.assign(years.begin(), years.end());
    std::sort(net.years_.begin(), net.years_.end());
    net.years_.erase(std::unique(net.years_.begin(), net.years_.end()), net.years_.end());
    net.n_topics_ = static_cast<int>(paper_thetas.cols());
    net.provenance_ = {window, top_l, std::move(model_id)};
    net.expertise_ = ExpertiseTable(net.n_topics_, net.years_);

    std::vector<YearRelations> results(net.years_.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (net.years_.size() > 1 && workers > 1) {
        std::vector<std::future<void>> futures;
        std::atomic<std::size_t> next{0};
        for (unsigned k = 0; k < std::min<std::size_t>(workers, net.years_.size()); ++k) {
            futures.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next.fetch_add(1); i < net.years_.size();
                     i = next.fetch_add(1))
                    results[i] = build_year(corpus, paper_thetas, net.years_[i], window, top_l);
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < net.years_.size(); ++i)
            results[i] = build_year(corpus, paper_thetas, net.years_[i], window, top_l);
    }

    for (std::size_t i = 0; i < net.years_.size(); ++i) {
        int year = net.years_[i];
        for (auto& [a, vec] : results[i].author_vectors)
            net.expertise_.set(a, year, std::move(vec));
        for (auto& [topic, edges] : results[i].edges_by_topic)
            net.relations_.emplace(std::make_pair(year, topic), std::move(edges));
    }
    return net;
}

TopicFlowNetwork TopicFlowNetwork::from_edges(
    std::vector<std::string> authors, std::vector<int> years, int n_topics,
    const std::vector<std::tuple<int, int, AuthorId, AuthorId, double>>& edges) {
    return from_edges(std::move(authors), std::move(years), n_topics, edges, Provenance{});
}

TopicFlowNetwork TopicFlowNetwork::from_edges(
    std::vector<std::string> authors, std::vector<int> years, int n_topics,
    const std::vector<std::tuple<int, int, AuthorId, AuthorId, double>>& edges,
    Provenance provenance) {
    TopicFlowNetwork net;
    net.authors_ = std::move(authors);
    net.years_ = std::move(years);
    std::sort(net.years_.begin(), net.years_.end());
    net.years_.erase(std::unique(net.years_.begin(), net.years_.end()), net.years_.end());
    net.n_topics_ = n_topics;
    net.provenance_ = std::move(provenance);
    net.expertise_ = ExpertiseTable(n_topics, net.years_);

    std::map<std::pair<AuthorId, int>, Eigen::VectorXd> expertise;
    for (const auto& [year, topic, source, target, weight] : edges) {
        if (!net.has_year(year)) throw ParamError("edge year not in year list");
        if (topic < 0 || topic >= n_topics) throw ParamError("edge topic out of range");
        if (source >= net.authors_.size() || target >= net.authors_.size())
            throw ParamError("edge endpoint out of range");
        if (!(weight > 0.0)) throw ParamError("edge weights must be positive");
        net.relations_[{year, topic}].push_back({source, target, weight});
        if (source == target) {
            auto [it, inserted] =
                expertise.try_emplace({source, year}, Eigen::VectorXd::Zero(n_topics));
            it->second(topic) = weight;
        }
    }
    for (auto& [key, vec] : expertise) net.expertise_.set(key.first, key.second, std::move(vec));
    for (auto& [key, list] : net.relations_)
        std::sort(list.begin(), list.end(), [](const TfnEdge& x, const TfnEdge& y) {
            if (x.source != y.source) return x.source < y.source;
            return x.target < y.target;
        });
    return net;
}

void write_edges_tsv(const TopicFlowNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write edge list: " + path.string());
    out << "year\ttopic\tsource\ttarget\tweight\n";
    char buf[40];
    for (const auto& [key, edges] : net.relations()) {
        for (const auto& e : edges) {
            std::snprintf(buf, sizeof(buf), "%.9g", e.weight);
            out << key.first << '\t' << key.second << '\t' << net.authors()[e.source] << '\t'
                << net.authors()[e.target] << '\t' << buf << '\n';
        }
    }
}

TopicFlowNetwork read_edges_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty edge list");

    struct Row {
        int year, topic;
        std::string source, target;
        double weight;
    };
    std::vector<Row> rows;
    std::vector<std::string> names;
    int max_topic = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Row row;
        std::string weight;
        if (!std::getline(ss, line, '\t')) throw FormatError("bad edge row");
        row.year = std::stoi(line);
        if (!std::getline(ss, line, '\t')) throw FormatError("bad edge row");
        row.topic = std::stoi(line);
        if (!std::getline(ss, row.source, '\t') || !std::getline(ss, row.target, '\t') ||
            !std::getline(ss, weight, '\t'))
            throw FormatError("bad edge row");
        row.weight = std::strtod(weight.c_str(), nullptr);
        max_topic = std::max(max_topic, row.topic);
        names.push_back(row.source);
        names.push_back(row.target);
        rows.push_back(std::move(row));
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::unordered_map<std::string, AuthorId> ids;
    for (AuthorId i = 0; i < names.size(); ++i) ids.emplace(names[i], i);

    std::vector<int> years;
    std::vector<std::tuple<int, int, AuthorId, AuthorId, double>> edges;
    for (const auto& row : rows) {
        years.push_back(row.year);
        edges.emplace_back(row.year, row.topic, ids.at(row.source), ids.at(row.target),
                           row.weight);
    }
    return TopicFlowNetwork::from_edges(std::move(names), std::move(years), max_topic + 1,
                                        edges);
}

} // namespace tfn
