#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tfn/analysis.hpp"
#include "tfn/errors.hpp"
#include "tfn/export.hpp"
#include "tfn/pipeline.hpp"

namespace {

using tfn::RunConfig;

// Flag storage for one subcommand; values only override the config file
// when the user actually passed them.
struct CommonFlags {
    std::string config_file;
    std::string input, stopwords, out;
    double english_threshold = 0.0;
    bool require_abstract = true;
    bool no_require_abstract = false;
    int topics = 0, window = 0, top_l = 0, min_year = 0, max_year = 0;
    int min_df = 0, max_iter = 0, walk_length = 0, top_k = 0;
    std::uint64_t seed = 0;
    double tol = 0.0, damping = 0.0;
    bool include_intra = false;
    std::vector<std::string> include_fields, exclude_fields;

    CLI::Option* o_input = nullptr;
    CLI::Option* o_stopwords = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_threshold = nullptr;
    CLI::Option* o_no_abstract = nullptr;
    CLI::Option* o_topics = nullptr;
    CLI::Option* o_window = nullptr;
    CLI::Option* o_top_l = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_min_year = nullptr;
    CLI::Option* o_max_year = nullptr;
    CLI::Option* o_min_df = nullptr;
    CLI::Option* o_max_iter = nullptr;
    CLI::Option* o_tol = nullptr;
    CLI::Option* o_damping = nullptr;
    CLI::Option* o_walk_length = nullptr;
    CLI::Option* o_top_k = nullptr;
    CLI::Option* o_include_intra = nullptr;
    CLI::Option* o_include_fields = nullptr;
    CLI::Option* o_exclude_fields = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "key=value configuration file");
    f.o_input = cmd->add_option("--input", f.input, "JSON Lines corpus file");
    f.o_stopwords = cmd->add_option("--stopwords", f.stopwords, "stop-word list file");
    f.o_out = cmd->add_option("--out", f.out, "output directory");
    f.o_threshold = cmd->add_option("--english-threshold", f.english_threshold,
                                    "stop-word fraction for the language heuristic");
    f.o_no_abstract = cmd->add_flag("--no-require-abstract", f.no_require_abstract,
                                    "train on documents without an abstract too");
    f.o_topics = cmd->add_option("--topics", f.topics, "number of topics");
    f.o_window = cmd->add_option("--window", f.window, "publication-lag window in years");
    f.o_top_l = cmd->add_option("--top-l", f.top_l, "edge topics kept per author pair");
    f.o_seed = cmd->add_option("--seed", f.seed, "random seed");
    f.o_min_year = cmd->add_option("--min-year", f.min_year, "earliest accepted year");
    f.o_max_year = cmd->add_option("--max-year", f.max_year, "latest accepted year");
    f.o_min_df = cmd->add_option("--min-df", f.min_df, "minimum term document frequency");
    f.o_max_iter = cmd->add_option("--max-iter", f.max_iter, "NMF iteration limit");
    f.o_tol = cmd->add_option("--tol", f.tol, "NMF relative improvement tolerance");
    f.o_damping = cmd->add_option("--damping", f.damping, "PageRank damping factor");
    f.o_walk_length = cmd->add_option("--walk-length", f.walk_length, "walktrap walk length");
    f.o_top_k = cmd->add_option("--top-k", f.top_k, "number of flows to export");
    f.o_include_intra =
        cmd->add_flag("--include-intra", f.include_intra, "keep intratopic flows in exports");
    f.o_include_fields =
        cmd->add_option("--include-field", f.include_fields, "required field of study");
    f.o_exclude_fields =
        cmd->add_option("--exclude-field", f.exclude_fields, "rejected field of study");
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_file.empty()) cfg = tfn::load_config_file(f.config_file);
    if (f.o_input->count()) cfg.input = f.input;
    if (f.o_stopwords->count()) cfg.stopwords = f.stopwords;
    if (f.o_out->count()) cfg.out = f.out;
    if (f.o_threshold->count()) cfg.english_threshold = f.english_threshold;
    if (f.o_no_abstract->count()) cfg.require_abstract = false;
    if (f.o_topics->count()) cfg.n_topics = f.topics;
    if (f.o_window->count()) cfg.window = f.window;
    if (f.o_top_l->count()) cfg.top_l = f.top_l;
    if (f.o_seed->count()) cfg.seed = f.seed;
    if (f.o_min_year->count()) cfg.min_year = f.min_year;
    if (f.o_max_year->count()) cfg.max_year = f.max_year;
    if (f.o_min_df->count()) cfg.min_df = f.min_df;
    if (f.o_max_iter->count()) cfg.max_iter = f.max_iter;
    if (f.o_tol->count()) cfg.tol = f.tol;
    if (f.o_damping->count()) cfg.damping = f.damping;
    if (f.o_walk_length->count()) cfg.walk_length = f.walk_length;
    if (f.o_top_k->count()) cfg.top_flows_k = f.top_k;
    if (f.o_include_intra->count()) cfg.exclude_intra = false;
    if (f.o_include_fields->count())
        cfg.include_fields = {f.include_fields.begin(), f.include_fields.end()};
    if (f.o_exclude_fields->count())
        cfg.exclude_fields = {f.exclude_fields.begin(), f.exclude_fields.end()};
    return cfg;
}

std::vector<int> selected_years(const tfn::TopicFlowNetwork& net, std::optional<int> year) {
    if (year) {
        if (!net.has_year(*year)) throw tfn::ParamError("unknown year " + std::to_string(*year));
        return {*year};
    }
    return net.years();
}

// Tag non-pipeline failures with the stage the subcommand belongs to.
template <typename Fn>
void with_stage(tfn::Stage stage, Fn&& fn) {
    try {
        fn();
    } catch (const tfn::StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw tfn::StageError{stage, e.what()};
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic flow network toolkit for publication corpora"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonFlags flags;
        std::optional<int> year;
        std::optional<int> topic;
    };
    std::map<std::string, Sub> subs;
    auto add_sub = [&](const std::string& name, const std::string& desc, bool with_year = false,
                       bool with_topic = false) {
        Sub& sub = subs[name];
        sub.cmd = app.add_subcommand(name, desc);
        add_common_flags(sub.cmd, sub.flags);
        if (with_year)
            sub.cmd->add_option_function<int>(
                "--year", [&sub](const int& y) { sub.year = y; }, "restrict to one year");
        if (with_topic)
            sub.cmd->add_option_function<int>(
                "--topic", [&sub](const int& t) { sub.topic = t; }, "restrict to one topic");
        return sub.cmd;
    };

    add_sub("ingest", "Load and validate the corpus, write the corpus report");
    add_sub("vectorize", "Build the tf-idf matrix and export it as TSV");
    add_sub("fit-topics", "Fit the NMF topic model and persist it");
    add_sub("build-tfn", "Construct the topic flow network and export the edge list");
    add_sub("pagerank", "Author relevance on the flipped network", true, true);
    add_sub("communities", "Walktrap communities with topic summaries", true);
    add_sub("kcores", "Coreness per topic and year");
    add_sub("flows", "Per-year topic flow matrices", true);
    add_sub("metrics", "Small-world metrics per topic and year", true);
    add_sub("export-sankey", "Flow diagram JSON documents", true);
    add_sub("run", "Full pipeline: ingest, fit, build, analyze, export");

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    Sub& sub = subs.at(name);

    try {
        tfn::Pipeline pipeline(resolve_config(sub.flags));
        const RunConfig& cfg = pipeline.config();
        std::filesystem::create_directories(cfg.out);

        if (name == "run") {
            tfn::run_pipeline(pipeline);
            std::cout << "artifacts written to " << cfg.out.string() << "\n";
            return 0;
        }

        if (name == "ingest") {
            const auto& corpus = pipeline.corpus();
            const auto& report = pipeline.load_report();
            auto path = cfg.out / "corpus_report.json";
            std::ofstream out(path);
            out << "{\n  \"records\": " << corpus.records().size()
                << ",\n  \"authors\": " << corpus.authors().size()
                << ",\n  \"malformed\": " << report.malformed
                << ",\n  \"filtered\": " << report.filtered
                << ",\n  \"input_lines\": " << report.total_lines << "\n}\n";
            std::cout << "loaded " << corpus.records().size() << " records\n";
        } else if (name == "vectorize") {
            auto path = cfg.out / "matrix.tsv";
            tfn::write_matrix_tsv(pipeline.matrix(), path);
            std::cout << "wrote " << path.string() << "\n";
        } else if (name == "fit-topics") {
            const auto& model = pipeline.model();
            std::cout << "fitted " << model.n_topics << " topics in "
                      << model.training_error_trace.size() << " iterations, final error "
                      << tfn::format_number(model.training_error_trace.empty()
                                                ? 0.0
                                                : model.training_error_trace.back())
                      << "\n";
            for (int t = 0; t < model.n_topics; ++t) {
                std::cout << "topic " << t << ":";
                for (const auto& term : tfn::top_terms(model, t, 5)) std::cout << ' ' << term;
                std::cout << "\n";
            }
        } else if (name == "build-tfn") {
            auto path = cfg.out / "tfn_edges.tsv";
            tfn::write_edges_tsv(pipeline.network(), path);
            std::cout << "wrote " << path.string() << "\n";
        } else if (name == "pagerank") {
            const auto& net = pipeline.network();
            with_stage(tfn::Stage::Analysis, [&] {
                for (int year : selected_years(net, sub.year)) {
                    auto view = net.restrict(year, sub.topic);
                    auto scores = tfn::pagerank(view, cfg.damping);
                    std::string file = "pagerank_" + std::to_string(year);
                    if (sub.topic) file += "_t" + std::to_string(*sub.topic);
                    auto path = cfg.out / (file + ".csv");
                    tfn::write_pagerank_csv(scores, net.authors(), path);
                    std::cout << "wrote " << path.string() << "\n";
                }
            });
        } else if (name == "communities") {
            const auto& net = pipeline.network();
            with_stage(tfn::Stage::Analysis, [&] {
                std::vector<std::pair<tfn::CommunityPartition, tfn::CommunitySummary>> rows;
                std::vector<std::pair<int, tfn::CommunitySummary>> sizes;
                for (int year : selected_years(net, sub.year)) {
                    auto partition = tfn::walktrap(net.restrict(year), cfg.walk_length);
                    auto summary = tfn::community_topic_summary(partition, net.expertise(), 2);
                    sizes.emplace_back(year, summary);
                    rows.emplace_back(std::move(partition), std::move(summary));
                }
                tfn::write_communities_csv(rows, cfg.out / "communities.csv");
                tfn::write_topic_sizes_csv(sizes, cfg.out / "community_topic_sizes.csv");
                std::cout << "wrote " << (cfg.out / "communities.csv").string() << "\n";
            });
        } else if (name == "kcores") {
            const auto& net = pipeline.network();
            with_stage(tfn::Stage::Analysis, [&] {
                auto grid = tfn::coreness_grid(net);
                auto path = cfg.out / "core_grid.csv";
                tfn::write_core_grid_csv(grid, path);
                std::cout << "wrote " << path.string() << "\n";
            });
        } else if (name == "flows") {
            const auto& net = pipeline.network();
            with_stage(tfn::Stage::Analysis, [&] {
                for (int year : selected_years(net, sub.year)) {
                    auto matrix = tfn::flow_matrix(net, net.expertise(), year);
                    auto path = cfg.out / ("flows_" + std::to_string(year) + ".csv");
                    tfn::write_flow_matrix_csv(matrix, path);
                    std::cout << "wrote " << path.string() << "\n";
                }
            });
        } else if (name == "metrics") {
            const auto& net = pipeline.network();
            with_stage(tfn::Stage::Analysis, [&] {
                std::vector<tfn::YearTopicMetrics> rows;
                for (int year : selected_years(net, sub.year))
                    for (int topic = 0; topic < net.n_topics(); ++topic)
                        rows.push_back(
                            {year, topic, tfn::small_world_metrics(net.restrict(year, topic))});
                auto path = cfg.out / "metrics.csv";
                tfn::write_metrics_csv(rows, path);
                std::cout << "wrote " << path.string() << "\n";
            });
        } else if (name == "export-sankey") {
            const auto& net = pipeline.network();
            const auto& model = pipeline.model();
            with_stage(tfn::Stage::Export, [&] {
                for (int year : selected_years(net, sub.year)) {
                    auto matrix = tfn::flow_matrix(net, net.expertise(), year);
                    auto doc =
                        tfn::export_sankey(matrix, model, cfg.top_flows_k, cfg.exclude_intra);
                    auto path = cfg.out / ("sankey_" + std::to_string(year) + ".json");
                    tfn::write_sankey_json(doc, path);
                    std::cout << "wrote " << path.string() << "\n";
                }
            });
        }
        return 0;
    } catch (const tfn::StageError& e) {
        std::cerr << "error [" << tfn::stage_name(e.stage) << "]: " << e.message << "\n";
        return tfn::stage_exit_code(e.stage);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
