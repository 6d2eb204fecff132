#include "tfn/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "tfn/errors.hpp"

namespace tfn {

std::vector<double> pagerank(const TfnView& view, double damping, int max_iter, double tol) {
    const std::size_t n = view.node_count();
    if (n == 0) throw ParamError("pagerank on an empty node set");
    if (!(damping > 0.0 && damping < 1.0)) throw ParamError("damping must lie in (0, 1)");

    // Flip directions and collapse parallel edges; self-loops excluded.
    std::map<std::pair<AuthorId, AuthorId>, double> flipped;
    view.for_each_relation([&](int, int, std::span<const TfnEdge> edges) {
        for (const auto& e : edges)
            if (e.source != e.target) flipped[{e.target, e.source}] += e.weight;
    });

    std::vector<double> out_weight(n, 0.0);
    for (const auto& [key, w] : flipped) out_weight[key.first] += w;

    const double uniform = 1.0 / static_cast<double>(n);
    std::vector<double> rank(n, uniform), next(n, 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (out_weight[v] == 0.0) dangling += rank[v];
        std::fill(next.begin(), next.end(),
                  (1.0 - damping) * uniform + damping * dangling * uniform);
        for (const auto& [key, w] : flipped)
            next[key.second] += damping * rank[key.first] * w / out_weight[key.first];

        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - rank[v]);
        rank.swap(next);
        if (change < tol) break;
    }

    double sum = 0.0;
    for (double r : rank) sum += r;
    for (double& r : rank) r /= sum;
    return rank;
}

namespace {

// Undirected weighted simple projection of a view: parallel edges summed,
// direction dropped, self-loops dropped. Nodes are the active endpoints.
struct SimpleGraph {
    std::vector<AuthorId> nodes; // ascending author ids
    std::map<std::pair<int, int>, double> weights; // local indices, i < j
    std::vector<std::vector<std::pair<int, double>>> adjacency;
    std::vector<double> strength;

    int index_of(AuthorId a) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), a);
        return static_cast<int>(it - nodes.begin());
    }
};

SimpleGraph simple_projection(const TfnView& view) {
    std::map<std::pair<AuthorId, AuthorId>, double> undirected;
    view.for_each_relation([&](int, int, std::span<const TfnEdge> edges) {
        for (const auto& e : edges) {
            if (e.source == e.target) continue;
            AuthorId a = std::min(e.source, e.target), b = std::max(e.source, e.target);
            undirected[{a, b}] += e.weight;
        }
    });

    SimpleGraph g;
    for (const auto& [key, w] : undirected) {
        g.nodes.push_back(key.first);
        g.nodes.push_back(key.second);
    }
    std::sort(g.nodes.begin(), g.nodes.end());
    g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());

    g.adjacency.resize(g.nodes.size());
    g.strength.assign(g.nodes.size(), 0.0);
    for (const auto& [key, w] : undirected) {
        int i = g.index_of(key.first), j = g.index_of(key.second);
        g.weights[{i, j}] = w;
        g.adjacency[static_cast<std::size_t>(i)].emplace_back(j, w);
        g.adjacency[static_cast<std::size_t>(j)].emplace_back(i, w);
        g.strength[static_cast<std::size_t>(i)] += w;
        g.strength[static_cast<std::size_t>(j)] += w;
    }
    return g;
}

// Modularity bookkeeping for a partition of a weighted graph.
struct ModularityState {
    double total2 = 0.0;               // 2m
    std::vector<double> internal;      // per community, both directions
    std::vector<double> degree;        // per community, summed strength
    double q = 0.0;

    double community_term(std::size_t c) const {
        double frac = degree[c] / total2;
        return internal[c] / total2 - frac * frac;
    }
};

} // namespace

CommunityPartition walktrap(const TfnView& view, int walk_length) {
    if (walk_length < 1) throw ParamError("walk_length must be at least 1");
    if (!view.year()) throw ParamError("walktrap requires a single-year view");

    CommunityPartition partition;
    partition.year = *view.year();

    SimpleGraph g = simple_projection(view);
    const int n = static_cast<int>(g.nodes.size());

    std::vector<std::vector<AuthorId>> found;
    if (n > 0) {
        // Exact t-step transition probabilities.
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (const auto& [j, w] : g.adjacency[static_cast<std::size_t>(i)])
                p(i, j) = w / g.strength[static_cast<std::size_t>(i)];
        Eigen::MatrixXd pt = p;
        for (int step = 1; step < walk_length; ++step) pt = pt * p;

        Eigen::VectorXd inv_strength(n);
        for (int i = 0; i < n; ++i) inv_strength(i) = 1.0 / g.strength[static_cast<std::size_t>(i)];

        // Agglomeration state: one community per vertex.
        struct Community {
            int size = 0;
            Eigen::VectorXd profile; // mean of member rows of P^t
            std::vector<int> members;
        };
        std::vector<Community> comms(static_cast<std::size_t>(n));
        std::vector<int> comm_of(static_cast<std::size_t>(n));
        std::map<std::pair<int, int>, double> between; // community pair -> weight
        ModularityState mod;
        for (int i = 0; i < n; ++i) {
            comms[static_cast<std::size_t>(i)].size = 1;
            comms[static_cast<std::size_t>(i)].profile = pt.row(i).transpose();
            comms[static_cast<std::size_t>(i)].members = {i};
            comm_of[static_cast<std::size_t>(i)] = i;
            mod.total2 += g.strength[static_cast<std::size_t>(i)];
        }
        mod.internal.assign(static_cast<std::size_t>(n), 0.0);
        mod.degree.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) mod.degree[static_cast<std::size_t>(i)] = g.strength[static_cast<std::size_t>(i)];
        for (const auto& [key, w] : g.weights) between[key] = w;
        for (std::size_t c = 0; c < static_cast<std::size_t>(n); ++c) mod.q += mod.community_term(c);

        auto delta_sigma = [&](int c1, int c2) {
            const Community& a = comms[static_cast<std::size_t>(c1)];
            const Community& b = comms[static_cast<std::size_t>(c2)];
            double r2 = ((a.profile - b.profile).array().square() * inv_strength.array()).sum();
            double factor = static_cast<double>(a.size) * static_cast<double>(b.size) /
                            static_cast<double>(a.size + b.size);
            return factor * r2 / static_cast<double>(n);
        };

        // Remember the best cut; the merge path itself is the candidate set.
        double best_q = mod.q;
        std::vector<int> best_assignment = comm_of;

        std::map<std::pair<int, int>, double> dsigma;
        for (const auto& [key, w] : between) dsigma[key] = delta_sigma(key.first, key.second);

        while (!dsigma.empty()) {
            auto best = dsigma.begin();
            for (auto it = std::next(dsigma.begin()); it != dsigma.end(); ++it)
                if (it->second < best->second) best = it;
            const int c1 = best->first.first;
            const int c2 = best->first.second;

            // Merge c2 into c1.
            Community& a = comms[static_cast<std::size_t>(c1)];
            Community& b = comms[static_cast<std::size_t>(c2)];
            a.profile = (static_cast<double>(a.size) * a.profile +
                         static_cast<double>(b.size) * b.profile) /
                        static_cast<double>(a.size + b.size);
            a.size += b.size;
            for (int m : b.members) comm_of[static_cast<std::size_t>(m)] = c1;
            a.members.insert(a.members.end(), b.members.begin(), b.members.end());
            b.members.clear();

            double between_w = between.at({c1, c2});
            mod.q -= mod.community_term(static_cast<std::size_t>(c1)) +
                     mod.community_term(static_cast<std::size_t>(c2));
            mod.internal[static_cast<std::size_t>(c1)] +=
                mod.internal[static_cast<std::size_t>(c2)] + 2.0 * between_w;
            mod.degree[static_cast<std::size_t>(c1)] += mod.degree[static_cast<std::size_t>(c2)];
            mod.q += mod.community_term(static_cast<std::size_t>(c1));

            // Rewire neighbor links of c1/c2 to the merged community.
            std::map<int, double> neighbor_w;
            auto absorb = [&](int c) {
                for (auto it = between.begin(); it != between.end();) {
                    if (it->first.first == c || it->first.second == c) {
                        int other = it->first.first == c ? it->first.second : it->first.first;
                        if (other != c1 && other != c2) neighbor_w[other] += it->second;
                        it = between.erase(it);
                    } else {
                        ++it;
                    }
                }
            };
            absorb(c1);
            absorb(c2);
            for (auto it = dsigma.begin(); it != dsigma.end();) {
                if (it->first.first == c1 || it->first.second == c1 ||
                    it->first.first == c2 || it->first.second == c2)
                    it = dsigma.erase(it);
                else
                    ++it;
            }
            for (const auto& [other, w] : neighbor_w) {
                auto key = std::minmax(c1, other);
                between[{key.first, key.second}] = w;
                dsigma[{key.first, key.second}] = delta_sigma(key.first, key.second);
            }

            if (mod.q > best_q) {
                best_q = mod.q;
                best_assignment = comm_of;
            }
        }

        std::map<int, std::vector<AuthorId>> by_comm;
        for (int i = 0; i < n; ++i)
            by_comm[best_assignment[static_cast<std::size_t>(i)]].push_back(
                g.nodes[static_cast<std::size_t>(i)]);
        for (auto& [c, members] : by_comm) {
            std::sort(members.begin(), members.end());
            found.push_back(std::move(members));
        }
    }

    // Isolated authors become singleton blocks.
    std::set<AuthorId> active(g.nodes.begin(), g.nodes.end());
    for (AuthorId a = 0; a < view.node_count(); ++a)
        if (!active.count(a)) found.push_back({a});

    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
        if (x.size() != y.size()) return x.size() > y.size();
        return x.front() < y.front();
    });
    partition.blocks = std::move(found);
    return partition;
}

CommunitySummary community_topic_summary(const CommunityPartition& partition,
                                         const ExpertiseTable& expertise, int top_m) {
    if (top_m < 1) throw ParamError("top_m must be at least 1");
    CommunitySummary summary;
    for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
        const auto& members = partition.blocks[b];
        if (members.size() < 2) continue; // size-1 communities are omitted

        std::map<int, int> counts;
        for (AuthorId a : members)
            if (auto t = main_topic(expertise, a, partition.year)) ++counts[*t];

        BlockSummary block;
        block.block = b;
        block.size = members.size();
        block.topics.assign(counts.begin(), counts.end());
        std::sort(block.topics.begin(), block.topics.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        if (static_cast<int>(block.topics.size()) > top_m)
            block.topics.resize(static_cast<std::size_t>(top_m));
        if (!block.topics.empty())
            summary.topic_sizes[block.topics.front().first] += members.size();
        summary.blocks.push_back(std::move(block));
    }
    return summary;
}

std::vector<int> core_numbers(const TfnView& view) {
    const std::size_t n = view.node_count();
    // Multigraph degrees over the active nodes only.
    std::map<std::pair<AuthorId, AuthorId>, int> multiplicity;
    view.for_each_relation([&](int, int, std::span<const TfnEdge> edges) {
        for (const auto& e : edges) {
            if (e.source == e.target) continue;
            AuthorId a = std::min(e.source, e.target), b = std::max(e.source, e.target);
            ++multiplicity[{a, b}];
        }
    });

    std::vector<int> core(n, 0);
    std::map<AuthorId, std::vector<std::pair<AuthorId, int>>> adjacency;
    std::map<AuthorId, int> degree;
    for (const auto& [key, m] : multiplicity) {
        adjacency[key.first].emplace_back(key.second, m);
        adjacency[key.second].emplace_back(key.first, m);
        degree[key.first] += m;
        degree[key.second] += m;
    }

    // Min-degree peeling; degrees can drop by more than one per removal.
    std::set<std::pair<int, AuthorId>> queue;
    for (const auto& [a, d] : degree) queue.insert({d, a});
    int level = 0;
    std::set<AuthorId> removed;
    while (!queue.empty()) {
        auto [d, a] = *queue.begin();
        queue.erase(queue.begin());
        level = std::max(level, d);
        core[a] = level;
        removed.insert(a);
        for (const auto& [b, m] : adjacency[a]) {
            if (removed.count(b)) continue;
            queue.erase({degree[b], b});
            degree[b] -= m;
            queue.insert({degree[b], b});
        }
    }
    return core;
}

CoreGrid coreness_grid(const TopicFlowNetwork& net) {
    CoreGrid grid;
    grid.years = net.years();
    grid.coreness =
        Eigen::MatrixXi::Zero(net.n_topics(), static_cast<Eigen::Index>(grid.years.size()));

    // Cells are independent; split them over a few workers.
    const std::size_t cells = static_cast<std::size_t>(net.n_topics()) * grid.years.size();
    auto compute_cell = [&](std::size_t cell) {
        int t = static_cast<int>(cell / grid.years.size());
        std::size_t y = cell % grid.years.size();
        if (net.edges(grid.years[y], t).empty()) return;
        auto cores = core_numbers(net.restrict(grid.years[y], t));
        grid.coreness(t, static_cast<Eigen::Index>(y)) =
            *std::max_element(cores.begin(), cores.end());
    };

    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (cells > 1 && workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> futures;
        for (unsigned k = 0; k < std::min<std::size_t>(workers, cells); ++k)
            futures.push_back(std::async(std::launch::async, [&] {
                for (std::size_t c = next.fetch_add(1); c < cells; c = next.fetch_add(1))
                    compute_cell(c);
            }));
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t c = 0; c < cells; ++c) compute_cell(c);
    }
    return grid;
}

FlowMatrix flow_matrix(const TopicFlowNetwork& net, const ExpertiseTable& expertise,
                       int year) {
    if (!net.has_year(year)) throw ParamError("unknown year " + std::to_string(year));

    FlowMatrix out;
    out.year = year;
    out.values = Eigen::MatrixXd::Zero(net.n_topics(), net.n_topics());

    // Main-topic cluster per author; absent entries are excluded.
    std::map<AuthorId, int> cluster;
    for (const auto& [a, vec] : expertise.year_table(year))
        if (auto t = main_topic(expertise, a, year)) cluster[a] = *t;

    for (int t = 0; t < net.n_topics(); ++t) {
        for (const auto& e : net.edges(year, t)) {
            auto src = cluster.find(e.source);
            if (src == cluster.end() || src->second != t) continue;
            auto dst = cluster.find(e.target);
            if (dst == cluster.end()) continue;
            out.values(t, dst->second) += e.weight;
        }
    }
    return out;
}

std::vector<Flow> top_flows(const FlowMatrix& matrix, int k, bool exclude_intra) {
    if (k < 1) throw ParamError("k must be at least 1");
    std::vector<Flow> flows;
    for (Eigen::Index i = 0; i < matrix.values.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) {
            if (exclude_intra && i == j) continue;
            double v = matrix.values(i, j);
            if (v > 0.0) flows.push_back({static_cast<int>(i), static_cast<int>(j), v});
        }
    std::sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.source != b.source) return a.source < b.source;
        return a.target < b.target;
    });
    if (static_cast<int>(flows.size()) > k) flows.resize(static_cast<std::size_t>(k));
    return flows;
}

SmallWorldMetrics small_world_metrics(const TfnView& view) {
    SimpleGraph g = simple_projection(view);
    const int n = static_cast<int>(g.nodes.size());
    SmallWorldMetrics metrics;
    if (n == 0) return metrics;

    // Local clustering over the simple graph; degree < 2 contributes 0.
    double clustering_sum = 0.0;
    for (int v = 0; v < n; ++v) {
        const auto& neigh = g.adjacency[static_cast<std::size_t>(v)];
        std::size_t deg = neigh.size();
        if (deg < 2) continue;
        int links = 0;
        for (std::size_t i = 0; i < deg; ++i)
            for (std::size_t j = i + 1; j < deg; ++j) {
                auto key = std::minmax(neigh[i].first, neigh[j].first);
                if (g.weights.count({key.first, key.second})) ++links;
            }
        clustering_sum +=
            2.0 * static_cast<double>(links) / (static_cast<double>(deg) * static_cast<double>(deg - 1));
    }
    metrics.average_local_clustering = clustering_sum / static_cast<double>(n);

    // Largest connected component (ties: smallest contained node index).
    std::vector<int> component(static_cast<std::size_t>(n), -1);
    int n_components = 0;
    for (int start = 0; start < n; ++start) {
        if (component[static_cast<std::size_t>(start)] >= 0) continue;
        std::deque<int> queue{start};
        component[static_cast<std::size_t>(start)] = n_components;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (const auto& [u, w] : g.adjacency[static_cast<std::size_t>(v)])
                if (component[static_cast<std::size_t>(u)] < 0) {
                    component[static_cast<std::size_t>(u)] = n_components;
                    queue.push_back(u);
                }
        }
        ++n_components;
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_components), 0);
    for (int v = 0; v < n; ++v) ++sizes[static_cast<std::size_t>(component[static_cast<std::size_t>(v)])];
    int largest = 0;
    for (int c = 1; c < n_components; ++c)
        if (sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(largest)]) largest = c;

    std::vector<int> members;
    for (int v = 0; v < n; ++v)
        if (component[static_cast<std::size_t>(v)] == largest) members.push_back(v);
    if (members.size() < 2) return metrics; // ASP undefined

    // Mean pairwise hop distance by BFS from every member.
    double distance_sum = 0.0;
    std::size_t pairs = 0;
    for (int source : members) {
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        std::deque<int> queue{source};
        dist[static_cast<std::size_t>(source)] = 0;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (const auto& [u, w] : g.adjacency[static_cast<std::size_t>(v)])
                if (dist[static_cast<std::size_t>(u)] < 0) {
                    dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                    queue.push_back(u);
                }
        }
        for (int target : members)
            if (target > source) {
                distance_sum += dist[static_cast<std::size_t>(target)];
                ++pairs;
            }
    }
    metrics.average_shortest_path = distance_sum / static_cast<double>(pairs);
    return metrics;
}

} // namespace tfn
