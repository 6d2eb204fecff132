#include "tfn/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tfn/errors.hpp"
#include "tfn/export.hpp"

namespace tfn {

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Corpus: return "corpus";
        case Stage::Textprep: return "textprep";
        case Stage::TopicModel: return "topicmodel";
        case Stage::Tfn: return "tfn";
        case Stage::Analysis: return "analysis";
        case Stage::Export: return "export";
    }
    return "unknown";
}

int stage_exit_code(Stage stage) {
    return 2 + static_cast<int>(stage);
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash file: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return hash;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ParamError("invalid boolean value: " + value);
}

std::set<std::string> parse_list(const std::string& value) {
    std::set<std::string> out;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.insert(item);
    }
    return out;
}

} // namespace

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(line_no) + " is not key=value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));

        if (key == "input") base.input = value;
        else if (key == "stopwords") base.stopwords = value;
        else if (key == "out") base.out = value;
        else if (key == "english_threshold") base.english_threshold = std::stod(value);
        else if (key == "require_abstract") base.require_abstract = parse_bool(value);
        else if (key == "topics") base.n_topics = std::stoi(value);
        else if (key == "window") base.window = std::stoi(value);
        else if (key == "top_l") base.top_l = std::stoi(value);
        else if (key == "seed") base.seed = std::stoull(value);
        else if (key == "min_year") base.min_year = std::stoi(value);
        else if (key == "max_year") base.max_year = std::stoi(value);
        else if (key == "include_fields") base.include_fields = parse_list(value);
        else if (key == "exclude_fields") base.exclude_fields = parse_list(value);
        else if (key == "min_df") base.min_df = std::stoi(value);
        else if (key == "max_iter") base.max_iter = std::stoi(value);
        else if (key == "tol") base.tol = std::stod(value);
        else if (key == "damping") base.damping = std::stod(value);
        else if (key == "walk_length") base.walk_length = std::stoi(value);
        else if (key == "top_flows") base.top_flows_k = std::stoi(value);
        else if (key == "exclude_intra") base.exclude_intra = parse_bool(value);
        else throw FormatError("unknown config key: " + key);
    }
    return base;
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {}

const Corpus& Pipeline::corpus() {
    if (!corpus_) {
        try {
            LoadReport report;
            corpus_ = load_corpus(config_.input, config_.min_year, config_.max_year,
                                  config_.include_fields, config_.exclude_fields, &report);
            load_report_ = report;
        } catch (const std::exception& e) {
            throw StageError{Stage::Corpus, e.what()};
        }
    }
    return *corpus_;
}

const LoadReport& Pipeline::load_report() {
    corpus();
    return *load_report_;
}

const StopwordSet& Pipeline::stopword_set() {
    if (!stopwords_) {
        try {
            stopwords_ = load_stopwords(config_.stopwords);
        } catch (const std::exception& e) {
            throw StageError{Stage::Textprep, e.what()};
        }
    }
    return *stopwords_;
}

const Corpus& Pipeline::english_corpus() {
    if (!english_) {
        const Corpus& raw = corpus();
        const StopwordSet& stop = stopword_set();
        try {
            std::vector<PublicationRecord> kept;
            for (const auto& rec : raw.records())
                if (is_english_record(rec, stop, config_.english_threshold)) kept.push_back(rec);
            if (kept.empty())
                throw FormatError("no documents pass the language heuristic");
            english_ = Corpus::from_records(std::move(kept));
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError{Stage::Textprep, e.what()};
        }
    }
    return *english_;
}

const DocTermMatrix& Pipeline::matrix() {
    if (!matrix_) {
        const Corpus& corpus = english_corpus();
        try {
            matrix_ = build_matrix(corpus, stopword_set(), config_.english_threshold,
                                   config_.require_abstract, config_.min_df);
        } catch (const std::exception& e) {
            throw StageError{Stage::Textprep, e.what()};
        }
    }
    return *matrix_;
}

const TopicModel& Pipeline::model() {
    if (!model_) {
        const DocTermMatrix& mat = matrix();
        try {
            // Cache key: fitting inputs only. A matching key means the model
            // on disk was fitted from identical data and parameters.
            std::ostringstream key_src;
            key_src << "input=" << hash_hex(fnv1a64_file(config_.input))
                    << " stopwords=" << hash_hex(fnv1a64_file(config_.stopwords))
                    << " threshold=" << config_.english_threshold
                    << " require_abstract=" << config_.require_abstract
                    << " min_df=" << config_.min_df << " min_year=" << config_.min_year
                    << " max_year=" << config_.max_year << " topics=" << config_.n_topics
                    << " max_iter=" << config_.max_iter << " tol=" << config_.tol
                    << " seed=" << config_.seed;
            for (const auto& f : config_.include_fields) key_src << " inc=" << f;
            for (const auto& f : config_.exclude_fields) key_src << " exc=" << f;
            std::string key = hash_hex(fnv1a64(key_src.str().data(), key_src.str().size()));

            auto model_dir = config_.out / "model";
            auto key_path = model_dir / "cache_key";
            std::string stored;
            if (std::ifstream key_in(key_path); key_in) std::getline(key_in, stored);
            if (stored == key) {
                try {
                    auto loaded = load_model(model_dir);
                    model_ = std::move(loaded.model);
                    model_vocab_ = std::move(loaded.vocabulary);
                } catch (const std::exception&) {
                    model_.reset(); // corrupt cache, refit below
                }
            }
            if (!model_) {
                model_ = fit_nmf(mat, config_.n_topics, config_.max_iter, config_.tol,
                                 config_.seed);
                model_vocab_ = mat.vocabulary;
                std::filesystem::create_directories(model_dir);
                save_model(*model_, *model_vocab_, model_dir);
                std::ofstream key_out(key_path);
                key_out << key << '\n';
            }
            for (const char* name :
                 {"topic_term.tsv", "doc_topic.tsv", "docs.txt", "vocabulary.tsv", "meta"})
                note_artifact(model_dir / name);
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError{Stage::TopicModel, e.what()};
        }
    }
    return *model_;
}

const Eigen::MatrixXd& Pipeline::thetas() {
    if (!thetas_) {
        const TopicModel& m = model();
        try {
            thetas_ = theta_table(english_corpus(), m, *model_vocab_, stopword_set());
        } catch (const std::exception& e) {
            throw StageError{Stage::TopicModel, e.what()};
        }
    }
    return *thetas_;
}

const TopicFlowNetwork& Pipeline::network() {
    if (!network_) {
        const Corpus& corpus = english_corpus();
        const Eigen::MatrixXd& theta = thetas();
        try {
            auto [lo, hi] = corpus.year_range();
            std::vector<int> years;
            for (int y = lo; y <= hi; ++y) years.push_back(y);
            network_ = build_tfn(corpus, theta, years, config_.window, config_.top_l,
                                 "nmf-seed" + std::to_string(config_.seed));
        } catch (const std::exception& e) {
            throw StageError{Stage::Tfn, e.what()};
        }
    }
    return *network_;
}

void Pipeline::note_artifact(const std::filesystem::path& path) {
    auto rel = std::filesystem::relative(path, config_.out);
    artifacts_[rel.generic_string()] = fnv1a64_file(path);
}

void Pipeline::write_manifest() {
    nlohmann::ordered_json j;
    j["tool"] = "topicflow";
    j["version"] = "0.1.0";
    j["format"] = 1;
    nlohmann::ordered_json cfg;
    cfg["input"] = config_.input.generic_string();
    cfg["stopwords"] = config_.stopwords.generic_string();
    cfg["english_threshold"] = config_.english_threshold;
    cfg["require_abstract"] = config_.require_abstract;
    cfg["topics"] = config_.n_topics;
    cfg["window"] = config_.window;
    cfg["top_l"] = config_.top_l;
    cfg["seed"] = config_.seed;
    cfg["min_year"] = config_.min_year;
    cfg["max_year"] = config_.max_year;
    cfg["include_fields"] = config_.include_fields;
    cfg["exclude_fields"] = config_.exclude_fields;
    cfg["min_df"] = config_.min_df;
    cfg["max_iter"] = config_.max_iter;
    cfg["tol"] = config_.tol;
    cfg["damping"] = config_.damping;
    cfg["walk_length"] = config_.walk_length;
    cfg["top_flows"] = config_.top_flows_k;
    cfg["exclude_intra"] = config_.exclude_intra;
    j["config"] = cfg;
    nlohmann::ordered_json hashes;
    for (const auto& [rel, hash] : artifacts_) hashes[rel] = hash_hex(hash);
    j["artifacts"] = hashes;

    auto path = config_.out / "manifest.json";
    std::ofstream out(path);
    if (!out) throw StageError{Stage::Export, "cannot write " + path.string()};
    out << j.dump(2) << '\n';
}

void run_pipeline(Pipeline& p) {
    const RunConfig& cfg = p.config();
    std::filesystem::create_directories(cfg.out);

    // Ingest + corpus report.
    const Corpus& corpus = p.english_corpus();
    {
        const LoadReport& report = p.load_report();
        nlohmann::ordered_json j;
        j["input_lines"] = report.total_lines;
        j["malformed"] = report.malformed;
        j["filtered"] = report.filtered;
        j["loaded"] = report.loaded();
        j["english"] = corpus.records().size();
        j["authors"] = corpus.authors().size();
        auto [lo, hi] = corpus.year_range();
        j["year_min"] = lo;
        j["year_max"] = hi;
        auto path = cfg.out / "corpus_report.json";
        std::ofstream out(path);
        if (!out) throw StageError{Stage::Corpus, "cannot write " + path.string()};
        out << j.dump(2) << '\n';
        out.close();
        p.note_artifact(path);
    }

    // Model (cached), thetas, network + edge list.
    const TopicFlowNetwork& net = p.network();
    try {
        auto path = cfg.out / "tfn_edges.tsv";
        write_edges_tsv(net, path);
        p.note_artifact(path);
    } catch (const std::exception& e) {
        throw StageError{Stage::Tfn, e.what()};
    }

    // Analyses.
    try {
        const ExpertiseTable& expertise = net.expertise();

        for (int year : net.years()) {
            auto scores = pagerank(net.restrict(year), cfg.damping);
            auto path = cfg.out / ("pagerank_" + std::to_string(year) + ".csv");
            write_pagerank_csv(scores, net.authors(), path);
            p.note_artifact(path);
        }

        std::vector<std::pair<CommunityPartition, CommunitySummary>> communities;
        std::vector<std::pair<int, CommunitySummary>> topic_sizes;
        for (int year : net.years()) {
            auto partition = walktrap(net.restrict(year), cfg.walk_length);
            auto summary = community_topic_summary(partition, expertise, 2);
            topic_sizes.emplace_back(year, summary);
            communities.emplace_back(std::move(partition), std::move(summary));
        }
        auto communities_path = cfg.out / "communities.csv";
        write_communities_csv(communities, communities_path);
        p.note_artifact(communities_path);
        auto sizes_path = cfg.out / "community_topic_sizes.csv";
        write_topic_sizes_csv(topic_sizes, sizes_path);
        p.note_artifact(sizes_path);

        auto grid = coreness_grid(net);
        auto grid_path = cfg.out / "core_grid.csv";
        write_core_grid_csv(grid, grid_path);
        p.note_artifact(grid_path);

        std::vector<YearTopicMetrics> metrics;
        for (int year : net.years())
            for (int topic = 0; topic < net.n_topics(); ++topic)
                metrics.push_back(
                    {year, topic, small_world_metrics(net.restrict(year, topic))});
        auto metrics_path = cfg.out / "metrics.csv";
        write_metrics_csv(metrics, metrics_path);
        p.note_artifact(metrics_path);

        for (int year : net.years()) {
            auto flows = flow_matrix(net, expertise, year);
            auto flow_path = cfg.out / ("flows_" + std::to_string(year) + ".csv");
            write_flow_matrix_csv(flows, flow_path);
            p.note_artifact(flow_path);

            auto sankey = export_sankey(flows, p.model(), cfg.top_flows_k, cfg.exclude_intra);
            auto sankey_path = cfg.out / ("sankey_" + std::to_string(year) + ".json");
            write_sankey_json(sankey, sankey_path);
            p.note_artifact(sankey_path);
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError{Stage::Analysis, e.what()};
    }

    p.write_manifest();
}

} // namespace tfn
