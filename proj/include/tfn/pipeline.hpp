#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "tfn/analysis.hpp"
#include "tfn/corpus.hpp"
#include "tfn/network.hpp"
#include "tfn/textprep.hpp"
#include "tfn/topic_model.hpp"

namespace tfn {

/// Pipeline stages, used to tag fatal errors and exit codes.
enum class Stage { Corpus, Textprep, TopicModel, Tfn, Analysis, Export };

const char* stage_name(Stage stage);
int stage_exit_code(Stage stage);

struct StageError {
    Stage stage;
    std::string message;
};

/// Full run configuration. Defaults follow the common case-study settings:
/// 64 topics, top-8 edges per pair, 2-year window, 10% stop-word threshold.
struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path stopwords;
    std::filesystem::path out = "out";
    double english_threshold = 0.10;
    bool require_abstract = true;
    int n_topics = 64;
    int window = 2;
    int top_l = 8;
    std::uint64_t seed = 42;
    int min_year = 1960;
    int max_year = 2021;
    std::set<std::string> include_fields;
    std::set<std::string> exclude_fields;
    int min_df = 2;
    int max_iter = 200;
    double tol = 1e-4;
    double damping = 0.85;
    int walk_length = 4;
    int top_flows_k = 25;
    bool exclude_intra = true;
};

/// Parse a flat key=value config file ('#' comments allowed). Unknown keys
/// are rejected. Values use the same spellings as the CLI flags.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// FNV-1a 64-bit content hash, used for artifact manifests and stage cache
/// keys.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hash_hex(std::uint64_t hash);

/// Lazily evaluated pipeline shared by the CLI subcommands. Every product
/// is deterministic in (config, input bytes); the fitted model is cached on
/// disk keyed by a content hash so re-running analyses does not refit it.
class Pipeline {
public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const { return config_; }

    const Corpus& corpus();          // raw ingested corpus
    const LoadReport& load_report();
    const Corpus& english_corpus();  // after the language heuristic
    const StopwordSet& stopword_set();
    const DocTermMatrix& matrix();
    const TopicModel& model();       // cached on disk under out/model
    const Eigen::MatrixXd& thetas(); // per english_corpus record
    const TopicFlowNetwork& network();

    std::filesystem::path out_dir() const { return config_.out; }
    /// Record an artifact file in the manifest (hash computed on demand).
    void note_artifact(const std::filesystem::path& path);
    void write_manifest();

private:
    RunConfig config_;
    std::optional<LoadReport> load_report_;
    std::optional<Corpus> corpus_;
    std::optional<Corpus> english_;
    std::optional<StopwordSet> stopwords_;
    std::optional<DocTermMatrix> matrix_;
    std::optional<TopicModel> model_;
    std::optional<Vocabulary> model_vocab_;
    std::optional<Eigen::MatrixXd> thetas_;
    std::optional<TopicFlowNetwork> network_;
    std::map<std::string, std::uint64_t> artifacts_; // relative path -> hash
};

/// Run every stage end to end and write the artifact directory: corpus
/// report, model directory, edge list, analysis CSVs, per-year Sankey
/// documents and the manifest. Throws StageError on any fatal failure.
void run_pipeline(Pipeline& pipeline);

} // namespace tfn
