#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tfn/analysis.hpp"
#include "tfn/topic_model.hpp"

namespace tfn {

/// Flow diagram data for one year. Source and target occurrences of the
/// same topic are distinct nodes; labels are the comma-joined top-5 terms.
struct SankeyNode {
    std::string id;
    std::string side; // "source" or "target"
    int topic = 0;
    std::string label;
};

struct SankeyLink {
    std::string source;
    std::string target;
    double value = 0.0;
};

struct SankeyDocument {
    int year = 0;
    std::vector<SankeyNode> nodes;
    std::vector<SankeyLink> links;
};

SankeyDocument export_sankey(const FlowMatrix& matrix, const TopicModel& model, int k = 25,
                             bool exclude_intra = true);

std::string sankey_to_json(const SankeyDocument& doc);
void write_sankey_json(const SankeyDocument& doc, const std::filesystem::path& path);

// CSV/TSV writers. Numbers carry 9 significant digits; fields containing
// commas or quotes are RFC 4180 quoted.
void write_pagerank_csv(const std::vector<double>& scores,
                        const std::vector<std::string>& authors,
                        const std::filesystem::path& path);
void write_communities_csv(const std::vector<std::pair<CommunityPartition, CommunitySummary>>& rows,
                           const std::filesystem::path& path);
void write_topic_sizes_csv(const std::vector<std::pair<int, CommunitySummary>>& per_year,
                           const std::filesystem::path& path);
void write_core_grid_csv(const CoreGrid& grid, const std::filesystem::path& path);
void write_flow_matrix_csv(const FlowMatrix& matrix, const std::filesystem::path& path);

struct YearTopicMetrics {
    int year = 0;
    int topic = 0;
    SmallWorldMetrics metrics;
};

void write_metrics_csv(const std::vector<YearTopicMetrics>& rows,
                       const std::filesystem::path& path);

std::string format_number(double value); // 9 significant digits
std::string csv_escape(const std::string& field);

} // namespace tfn
