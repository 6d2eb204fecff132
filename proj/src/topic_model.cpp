#include "tfn/topic_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "tfn/errors.hpp"

namespace tfn {

namespace {

constexpr double kDenomEps = 1e-12;

// Uniform doubles in (0, 1] drawn straight from the generator words so that
// initialization is identical across standard libraries.
double uniform_positive(std::mt19937_64& rng) {
    return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fill_random(Eigen::MatrixXd& m, std::mt19937_64& rng) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform_positive(rng);
}

// ||X - WH||_F via <X,X> - 2<X,WH> + <W'W, HH'>; avoids forming WH.
double reconstruction_error(const Eigen::SparseMatrix<double, Eigen::RowMajor>& x,
                            double x_sq, const Eigen::MatrixXd& w,
                            const Eigen::MatrixXd& h) {
    double cross = 0.0;
    for (int row = 0; row < x.outerSize(); ++row)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(x, row); it; ++it)
            cross += it.value() * w.row(row).dot(h.col(it.col()));
    Eigen::MatrixXd wtw = w.transpose() * w;
    Eigen::MatrixXd hht = h * h.transpose();
    double wh_sq = wtw.cwiseProduct(hht).sum();
    return std::sqrt(std::max(0.0, x_sq - 2.0 * cross + wh_sq));
}

std::string shortest(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

} // namespace

TopicModel fit_nmf(const DocTermMatrix& matrix, int n_topics, int max_iter, double tol,
                   std::uint64_t seed) {
    const Eigen::Index n_docs = matrix.values.rows();
    const Eigen::Index n_terms = matrix.values.cols();
    if (n_docs == 0 || n_terms == 0) throw ParamError("empty document-term matrix");
    if (n_topics < 1 || n_topics > std::min(n_docs, n_terms))
        throw ParamError("n_topics must lie in [1, min(docs, terms)]");
    if (max_iter < 1) throw ParamError("max_iter must be positive");

    const auto& x = matrix.values;
    const double x_sq = x.coeffs().square().sum();
    if (!std::isfinite(x_sq)) throw NumericError("non-finite values in input matrix");

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd w(n_docs, n_topics);
    Eigen::MatrixXd h(n_topics, n_terms);
    fill_random(w, rng);
    fill_random(h, rng);

    TopicModel model;
    model.n_topics = n_topics;
    model.seed = seed;
    model.terms = matrix.vocabulary.terms;
    model.doc_ids = matrix.rows;

    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        // H <- H . (W'X) / (W'W H)
        Eigen::MatrixXd numer_h = (x.transpose() * w).transpose();
        Eigen::MatrixXd denom_h = (w.transpose() * w) * h;
        h.array() *= numer_h.array() / (denom_h.array() + kDenomEps);

        // W <- W . (XH') / (W HH')
        Eigen::MatrixXd numer_w = x * h.transpose();
        Eigen::MatrixXd denom_w = w * (h * h.transpose());
        w.array() *= numer_w.array() / (denom_w.array() + kDenomEps);

        double err = reconstruction_error(x, x_sq, w, h);
        if (!std::isfinite(err)) throw NumericError("NMF reconstruction error diverged");
        model.training_error_trace.push_back(err);
        if (std::isfinite(prev)) {
            double rel = (prev - err) / std::max(prev, kDenomEps);
            if (rel < tol) break;
        }
        prev = err;
    }

    if (!w.allFinite() || !h.allFinite())
        throw NumericError("NMF factors contain non-finite values");
    model.doc_topic = std::move(w);
    model.topic_term = std::move(h);
    return model;
}

namespace {

Eigen::VectorXd l1_normalized(Eigen::VectorXd v) {
    double sum = v.sum();
    if (sum > 0.0) v /= sum;
    return v;
}

} // namespace

Eigen::VectorXd paper_theta(const TopicModel& model, Eigen::Index row) {
    if (row < 0 || row >= model.doc_topic.rows()) throw ParamError("document row out of range");
    return l1_normalized(model.doc_topic.row(row).transpose());
}

Eigen::VectorXd project_theta(const TopicModel& model, const Eigen::SparseVector<double>& x,
                              int max_iter, double tol) {
    if (x.size() != model.topic_term.cols())
        throw ParamError("vector length does not match the model vocabulary");
    const Eigen::MatrixXd& h = model.topic_term;
    Eigen::VectorXd numer = h * x; // (xH')' for a column vector x
    Eigen::MatrixXd hht = h * h.transpose();

    Eigen::VectorXd w = Eigen::VectorXd::Constant(model.n_topics, 1.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd denom = hht * w;
        Eigen::VectorXd next =
            w.array() * numer.array() / (denom.array() + kDenomEps);
        double change = (next - w).cwiseAbs().sum();
        w = std::move(next);
        if (change < tol) break;
    }
    return l1_normalized(std::move(w));
}

Eigen::MatrixXd theta_table(const Corpus& corpus, const TopicModel& model,
                            const Vocabulary& vocabulary, const StopwordSet& stopwords) {
    std::unordered_map<std::string, Eigen::Index> row_of;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(model.doc_ids.size()); ++i)
        row_of.emplace(model.doc_ids[static_cast<std::size_t>(i)], i);

    Eigen::MatrixXd table(corpus.records().size(), model.n_topics);
    for (std::size_t i = 0; i < corpus.records().size(); ++i) {
        const auto& rec = corpus.records()[i];
        auto it = row_of.find(rec.paper_id);
        if (it != row_of.end()) {
            table.row(static_cast<Eigen::Index>(i)) = paper_theta(model, it->second).transpose();
        } else {
            auto vec = vectorize(vocabulary, rec, stopwords);
            table.row(static_cast<Eigen::Index>(i)) = project_theta(model, vec).transpose();
        }
    }
    return table;
}

Eigen::VectorXd author_theta(const Corpus& corpus, const Eigen::MatrixXd& paper_thetas,
                             AuthorId author, int year, int window) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(paper_thetas.cols());
    for (std::size_t idx : corpus.select(author, year, window))
        sum += paper_thetas.row(static_cast<Eigen::Index>(idx)).transpose();
    return sum;
}

std::vector<std::string> top_terms(const TopicModel& model, int topic, int k) {
    if (topic < 0 || topic >= model.n_topics) throw ParamError("topic index out of range");
    if (k < 0) throw ParamError("k must be non-negative");
    std::vector<int> order(model.terms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double wa = model.topic_term(topic, a), wb = model.topic_term(topic, b);
        if (wa != wb) return wa > wb;
        return model.terms[static_cast<std::size_t>(a)] < model.terms[static_cast<std::size_t>(b)];
    });
    std::vector<std::string> out;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(order.size())); ++i)
        out.push_back(model.terms[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    return out;
}

void save_model(const TopicModel& model, const Vocabulary& vocabulary,
                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "topic_term.tsv");
        if (!out) throw IoError("cannot write " + (dir / "topic_term.tsv").string());
        for (int t = 0; t < model.n_topics; ++t)
            for (Eigen::Index c = 0; c < model.topic_term.cols(); ++c)
                if (double v = model.topic_term(t, c); v != 0.0)
                    out << t << '\t' << model.terms[static_cast<std::size_t>(c)] << '\t'
                        << shortest(v) << '\n';
    }
    {
        std::ofstream out(dir / "doc_topic.tsv");
        if (!out) throw IoError("cannot write " + (dir / "doc_topic.tsv").string());
        for (Eigen::Index r = 0; r < model.doc_topic.rows(); ++r)
            for (int t = 0; t < model.n_topics; ++t)
                if (double v = model.doc_topic(r, t); v != 0.0)
                    out << model.doc_ids[static_cast<std::size_t>(r)] << '\t' << t << '\t'
                        << shortest(v) << '\n';
    }
    {
        std::ofstream out(dir / "docs.txt");
        if (!out) throw IoError("cannot write " + (dir / "docs.txt").string());
        for (const auto& id : model.doc_ids) out << id << '\n';
    }
    {
        std::ofstream out(dir / "vocabulary.tsv");
        if (!out) throw IoError("cannot write " + (dir / "vocabulary.tsv").string());
        for (int i = 0; i < vocabulary.size(); ++i)
            out << vocabulary.terms[static_cast<std::size_t>(i)] << '\t'
                << vocabulary.document_frequency[static_cast<std::size_t>(i)] << '\n';
    }
    {
        std::ofstream out(dir / "meta");
        if (!out) throw IoError("cannot write " + (dir / "meta").string());
        out << "n_topics=" << model.n_topics << '\n';
        out << "seed=" << model.seed << '\n';
        out << "iterations=" << model.training_error_trace.size() << '\n';
        out << "final_error="
            << (model.training_error_trace.empty()
                    ? "0"
                    : shortest(model.training_error_trace.back()))
            << '\n';
        out << "train_docs=" << vocabulary.n_docs << '\n';
        out << "error_trace=";
        for (std::size_t i = 0; i < model.training_error_trace.size(); ++i) {
            if (i) out << ',';
            out << shortest(model.training_error_trace[i]);
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            parts.push_back(line.substr(pos));
            break;
        }
        parts.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return parts;
}

} // namespace

LoadedModel load_model(const std::filesystem::path& dir) {
    LoadedModel loaded;
    TopicModel& model = loaded.model;
    Vocabulary& vocab = loaded.vocabulary;

    std::ifstream meta(dir / "meta");
    if (!meta) throw IoError("cannot open model meta: " + (dir / "meta").string());
    std::string line;
    while (std::getline(meta, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "n_topics") model.n_topics = std::stoi(value);
        else if (key == "seed") model.seed = std::stoull(value);
        else if (key == "train_docs") vocab.n_docs = std::stoull(value);
        else if (key == "error_trace" && !value.empty()) {
            std::istringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                model.training_error_trace.push_back(std::strtod(item.c_str(), nullptr));
        }
    }
    if (model.n_topics < 1) throw FormatError("model meta missing n_topics");

    std::ifstream vocab_in(dir / "vocabulary.tsv");
    if (!vocab_in) throw IoError("cannot open " + (dir / "vocabulary.tsv").string());
    while (std::getline(vocab_in, line)) {
        auto parts = split_tabs(line);
        if (parts.size() != 2) throw FormatError("bad vocabulary line: " + line);
        vocab.index.emplace(parts[0], static_cast<int>(vocab.terms.size()));
        vocab.terms.push_back(parts[0]);
        vocab.document_frequency.push_back(std::stoi(parts[1]));
    }
    model.terms = vocab.terms;

    std::ifstream docs(dir / "docs.txt");
    if (!docs) throw IoError("cannot open " + (dir / "docs.txt").string());
    std::unordered_map<std::string, Eigen::Index> row_of;
    while (std::getline(docs, line)) {
        if (line.empty()) continue;
        row_of.emplace(line, static_cast<Eigen::Index>(model.doc_ids.size()));
        model.doc_ids.push_back(line);
    }

    model.topic_term = Eigen::MatrixXd::Zero(model.n_topics, vocab.size());
    std::ifstream tt(dir / "topic_term.tsv");
    if (!tt) throw IoError("cannot open " + (dir / "topic_term.tsv").string());
    while (std::getline(tt, line)) {
        auto parts = split_tabs(line);
        if (parts.size() != 3) throw FormatError("bad topic_term line: " + line);
        int topic = std::stoi(parts[0]);
        auto term = vocab.index.find(parts[1]);
        if (term == vocab.index.end()) throw FormatError("unknown term: " + parts[1]);
        model.topic_term(topic, term->second) = std::strtod(parts[2].c_str(), nullptr);
    }

    model.doc_topic =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.doc_ids.size()), model.n_topics);
    std::ifstream dt(dir / "doc_topic.tsv");
    if (!dt) throw IoError("cannot open " + (dir / "doc_topic.tsv").string());
    while (std::getline(dt, line)) {
        auto parts = split_tabs(line);
        if (parts.size() != 3) throw FormatError("bad doc_topic line: " + line);
        auto row = row_of.find(parts[0]);
        if (row == row_of.end()) throw FormatError("unknown document: " + parts[0]);
        model.doc_topic(row->second, std::stoi(parts[1])) =
            std::strtod(parts[2].c_str(), nullptr);
    }
    return loaded;
}

} // namespace tfn
