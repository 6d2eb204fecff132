#include "tfn/export.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "tfn/errors.hpp"

namespace tfn {

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string topic_label(const TopicModel& model, int topic) {
    std::string label;
    for (const auto& term : top_terms(model, topic, 5)) {
        if (!label.empty()) label += ", ";
        label += term;
    }
    return label;
}

} // namespace

SankeyDocument export_sankey(const FlowMatrix& matrix, const TopicModel& model, int k,
                             bool exclude_intra) {
    if (model.n_topics != matrix.values.rows())
        throw ParamError("model does not match flow matrix dimensions");

    SankeyDocument doc;
    doc.year = matrix.year;
    auto flows = top_flows(matrix, k, exclude_intra);

    std::vector<int> sources, targets;
    for (const auto& f : flows) {
        sources.push_back(f.source);
        targets.push_back(f.target);
    }
    auto dedupe = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(sources);
    dedupe(targets);

    for (int t : sources)
        doc.nodes.push_back({"source:" + std::to_string(t), "source", t, topic_label(model, t)});
    for (int t : targets)
        doc.nodes.push_back({"target:" + std::to_string(t), "target", t, topic_label(model, t)});
    for (const auto& f : flows)
        doc.links.push_back({"source:" + std::to_string(f.source),
                             "target:" + std::to_string(f.target), f.value});
    return doc;
}

std::string sankey_to_json(const SankeyDocument& doc) {
    nlohmann::ordered_json j;
    j["year"] = doc.year;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& node : doc.nodes)
        j["nodes"].push_back({{"id", node.id},
                              {"side", node.side},
                              {"topic", node.topic},
                              {"label", node.label}});
    j["links"] = nlohmann::ordered_json::array();
    for (const auto& link : doc.links)
        j["links"].push_back(
            {{"source", link.source}, {"target", link.target}, {"value", link.value}});
    return j.dump(2);
}

void write_sankey_json(const SankeyDocument& doc, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << sankey_to_json(doc) << '\n';
}

void write_pagerank_csv(const std::vector<double>& scores,
                        const std::vector<std::string>& authors,
                        const std::filesystem::path& path) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return authors[a] < authors[b];
    });
    auto out = open_out(path);
    out << "author,score\n";
    for (std::size_t i : order)
        out << csv_escape(authors[i]) << ',' << format_number(scores[i]) << '\n';
}

void write_communities_csv(
    const std::vector<std::pair<CommunityPartition, CommunitySummary>>& rows,
    const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "year,block_id,size,main_topic,second_topic\n";
    for (const auto& [partition, summary] : rows) {
        for (const auto& block : summary.blocks) {
            out << partition.year << ',' << block.block << ',' << block.size << ',';
            if (!block.topics.empty()) out << block.topics[0].first;
            out << ',';
            if (block.topics.size() > 1) out << block.topics[1].first;
            out << '\n';
        }
    }
}

void write_topic_sizes_csv(const std::vector<std::pair<int, CommunitySummary>>& per_year,
                           const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "year,topic,community_size_sum\n";
    for (const auto& [year, summary] : per_year)
        for (const auto& [topic, size] : summary.topic_sizes)
            out << year << ',' << topic << ',' << size << '\n';
}

void write_core_grid_csv(const CoreGrid& grid, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "topic";
    for (int year : grid.years) out << ',' << year;
    out << '\n';
    for (Eigen::Index t = 0; t < grid.coreness.rows(); ++t) {
        out << t;
        for (Eigen::Index y = 0; y < grid.coreness.cols(); ++y) out << ',' << grid.coreness(t, y);
        out << '\n';
    }
}

void write_flow_matrix_csv(const FlowMatrix& matrix, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "topic";
    for (Eigen::Index t = 0; t < matrix.values.cols(); ++t) out << ',' << t;
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < matrix.values.cols(); ++j)
            out << ',' << format_number(matrix.values(i, j));
        out << '\n';
    }
}

void write_metrics_csv(const std::vector<YearTopicMetrics>& rows,
                       const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "year,topic,asp,alc\n";
    for (const auto& row : rows) {
        out << row.year << ',' << row.topic << ',';
        if (row.metrics.average_shortest_path)
            out << format_number(*row.metrics.average_shortest_path);
        out << ',' << format_number(row.metrics.average_local_clustering) << '\n';
    }
}

} // namespace tfn
