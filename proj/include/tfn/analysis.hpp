#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

#include "tfn/network.hpp"

namespace tfn {

/// Weighted PageRank over the view with edge directions flipped, parallel
/// edges collapsed by weight sum and self-loops excluded. Uniform teleport,
/// dangling mass redistributed uniformly; the result sums to 1 and is
/// indexed by author id. Throws ParamError for an empty node set or a
/// damping factor outside (0, 1).
std::vector<double> pagerank(const TfnView& view, double damping = 0.85,
                             int max_iter = 100, double tol = 1e-10);

/// Community partition of one year's graph. Blocks are sorted by size
/// descending, ties by smallest member id; isolated authors appear as
/// size-1 blocks.
struct CommunityPartition {
    int year = 0;
    std::vector<std::vector<AuthorId>> blocks; // members sorted ascending
};

/// Walktrap community detection on the undirected weighted simple
/// projection of a single-year view. Vertex distances come exactly from the
/// walk_length-step transition probabilities; agglomeration merges the
/// adjacent pair with minimal squared-distance increase and the cut with
/// maximal modularity is returned.
CommunityPartition walktrap(const TfnView& view, int walk_length = 4);

struct BlockSummary {
    std::size_t block = 0; // index into CommunityPartition::blocks
    std::size_t size = 0;
    std::vector<std::pair<int, int>> topics; // (topic, member count), descending
};

struct CommunitySummary {
    std::vector<BlockSummary> blocks;        // blocks of size >= 2 only
    std::map<int, std::size_t> topic_sizes;  // main topic -> summed block sizes
};

/// Summarize blocks of size >= 2 by the frequency of their members' main
/// topics and aggregate block sizes per community main topic.
CommunitySummary community_topic_summary(const CommunityPartition& partition,
                                         const ExpertiseTable& expertise, int top_m = 2);

/// Multigraph core numbers per author id. The degree counts incident edge
/// multiplicity over all relations in the view, direction ignored and
/// self-loops excluded; peeling removes minimum-degree vertices.
std::vector<int> core_numbers(const TfnView& view);

/// Coreness (maximal non-empty k-core) per (topic, year) subgraph.
struct CoreGrid {
    std::vector<int> years;
    Eigen::MatrixXi coreness; // n_topics x years
};

CoreGrid coreness_grid(const TopicFlowNetwork& net);

/// Aggregated per-year topic flows: entry (t1, t2) sums the weights of
/// t1-labeled edges from main-topic-t1 authors into main-topic-t2 authors;
/// the diagonal includes self-loops. Authors without a main topic are
/// excluded. Throws ParamError for an unknown year.
struct FlowMatrix {
    int year = 0;
    Eigen::MatrixXd values; // n_topics x n_topics
};

FlowMatrix flow_matrix(const TopicFlowNetwork& net, const ExpertiseTable& expertise,
                       int year);

struct Flow {
    int source = 0;
    int target = 0;
    double value = 0.0;
};

/// The k largest positive flows, descending, ties by (source, target)
/// index; intratopic (diagonal) entries are skipped unless requested.
std::vector<Flow> top_flows(const FlowMatrix& matrix, int k = 25,
                            bool exclude_intra = true);

struct SmallWorldMetrics {
    std::optional<double> average_shortest_path; // absent below 2 nodes
    double average_local_clustering = 0.0;
};

/// ASP and ALC of the undirected simple projection. ASP averages hop-count
/// distances within the largest connected component; ALC averages local
/// clustering over all non-isolated nodes (degree < 2 contributes 0).
SmallWorldMetrics small_world_metrics(const TfnView& view);

} // namespace tfn
