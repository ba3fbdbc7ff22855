// pvec: paragraph-vector sentiment pipeline front end.
// Subcommands: normalize, train, infer, classify, sweep, report.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pvec/arabic_text.hpp"
#include "pvec/classify.hpp"
#include "pvec/corpus.hpp"
#include "pvec/metrics.hpp"
#include "pvec/model.hpp"
#include "pvec/sweep.hpp"

namespace {

constexpr const char *tool_version = "0.1.0";

std::ifstream open_input(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pvec::ConfigError("file not found: " + path);
    return in;
}

std::ofstream open_output(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pvec::IoError("cannot write file: " + path);
    return out;
}

pvec::Architecture parse_arch_flag(const std::string &s) {
    if (s == "dm") return pvec::Architecture::dm;
    if (s == "dbow") return pvec::Architecture::dbow;
    throw pvec::ConfigError("unknown architecture '" + s + "' (expected dm|dbow)");
}

pvec::ClassifierKind parse_kind_flag(const std::string &s) {
    if (s == "lr") return pvec::ClassifierKind::lr;
    if (s == "svm") return pvec::ClassifierKind::svm;
    if (s == "nb") return pvec::ClassifierKind::nb;
    if (s == "dt") return pvec::ClassifierKind::dt;
    throw pvec::ConfigError("unknown classifier '" + s + "' (expected lr|svm|nb|dt)");
}

// Every run logs the fully resolved configuration so it can be replayed.
class ConfigLog {
public:
    explicit ConfigLog(std::string cmd) : cmd_(std::move(cmd)) {}
    template <typename T>
    ConfigLog &add(const std::string &key, const T &value) {
        std::ostringstream os;
        os << value;
        entries_.emplace_back(key, os.str());
        return *this;
    }
    void emit() const {
        std::cerr << "config: command=" << cmd_;
        for (const auto &[k, v] : entries_) std::cerr << ' ' << k << '=' << v;
        std::cerr << '\n';
    }

private:
    std::string cmd_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct NormalizeArgs {
    std::string input, output, stopwords;
    bool keep_ya = false, keep_teh_marbuta = false;
    std::uint32_t run_threshold = 3;
};

int run_normalize(const NormalizeArgs &a) {
    pvec::NormalizationRules rules;
    rules.unify_ya = !a.keep_ya;
    rules.unify_teh_marbuta = !a.keep_teh_marbuta;
    rules.run_threshold = a.run_threshold;
    if (!a.stopwords.empty()) rules.stopwords = pvec::load_stopwords(a.stopwords, rules);
    ConfigLog("normalize")
        .add("input", a.input)
        .add("output", a.output)
        .add("stopwords", a.stopwords.empty() ? "<none>" : a.stopwords)
        .add("unify_ya", rules.unify_ya)
        .add("unify_teh_marbuta", rules.unify_teh_marbuta)
        .add("run_threshold", rules.run_threshold)
        .emit();
    auto in = open_input(a.input);
    auto out = open_output(a.output);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // empty lines stay empty so document alignment survives
        auto tokens = pvec::tokenize(pvec::normalize(line, rules), rules);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) out << ' ';
            out << tokens[i];
        }
        out << '\n';
    }
    return 0;
}

struct TrainArgs {
    std::string arch = "dm";
    std::uint32_t dim = 100, window = 5, negative = 5, epochs = 10, workers = 1, min_count = 5;
    std::uint64_t seed = 1;
    double subsample_t = 1e-5, alpha0 = 0.025, alpha_min = 1e-4;
    std::vector<std::string> corpus;
    std::string save;
};

int run_train(const TrainArgs &a) {
    pvec::TrainConfig cfg;
    cfg.arch = parse_arch_flag(a.arch);
    cfg.dim = a.dim;
    cfg.window = a.window;
    cfg.negatives = a.negative;
    cfg.epochs = a.epochs;
    cfg.workers = a.workers;
    cfg.min_count = a.min_count;
    cfg.seed = a.seed;
    cfg.subsample_t = a.subsample_t;
    cfg.alpha0 = a.alpha0;
    cfg.alpha_min = a.alpha_min;
    cfg.validate();
    {
        ConfigLog log("train");
        log.add("arch", a.arch)
            .add("dim", cfg.dim)
            .add("window", cfg.window)
            .add("negative", cfg.negatives)
            .add("epochs", cfg.epochs)
            .add("workers", cfg.workers)
            .add("min_count", cfg.min_count)
            .add("subsample_t", cfg.subsample_t)
            .add("alpha0", cfg.alpha0)
            .add("alpha_min", cfg.alpha_min)
            .add("seed", cfg.seed)
            .add("save", a.save);
        for (const auto &c : a.corpus) log.add("corpus", c);
        log.emit();
    }
    std::vector<pvec::NormalizedDocument> docs;
    for (const auto &path : a.corpus) {
        auto part = pvec::load_corpus_file(path, docs.size());
        for (auto &d : part) docs.push_back(std::move(d));
    }
    if (docs.empty()) throw pvec::ConfigError("corpus is empty");
    auto vocab = pvec::build_vocabulary(docs, cfg.min_count, cfg.subsample_t);
    auto model = pvec::init_model(std::move(vocab), docs.size(), cfg);
    auto report = pvec::train(model, docs);
    for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e)
        std::cerr << "epoch " << (e + 1) << " mean loss " << report.epoch_mean_loss[e] << '\n';
    pvec::save_model(model, a.save);
    std::cerr << "saved model: " << a.save << " (vocab " << model.vocab.size() << ", docs "
              << model.n_docs << ")\n";
    return 0;
}

struct InferArgs {
    std::string model, input, output;
    std::uint32_t infer_epochs = 0;  // 0: use the model's setting
    std::uint64_t seed = 1;
};

int run_infer(const InferArgs &a) {
    auto model = pvec::load_model(a.model);
    const std::uint32_t epochs = a.infer_epochs ? a.infer_epochs : model.config.infer_epochs;
    ConfigLog("infer")
        .add("model", a.model)
        .add("input", a.input)
        .add("output", a.output)
        .add("infer_epochs", epochs)
        .add("seed", a.seed)
        .emit();
    auto in = open_input(a.input);
    auto out = open_output(a.output);
    out.setf(std::ios::fixed);
    out.precision(6);
    std::string line;
    std::size_t line_no = 0, unknown = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw pvec::ParseError("missing TAB separator", line_no);
        const std::string doc_id = line.substr(0, tab);
        pvec::NormalizedDocument doc;
        pvec::NormalizationRules plain;
        doc.tokens = pvec::tokenize(line.substr(tab + 1), plain);
        auto inferred =
            pvec::infer_vector(model, doc, epochs, pvec::mix_seed(a.seed, line_no));
        if (!inferred.any_known) {
            ++unknown;
            std::cerr << "warning: no known words in document " << doc_id << " (line " << line_no
                      << "); emitting zero vector\n";
        }
        out << doc_id;
        for (float v : inferred.values) out << '\t' << v;
        out << '\n';
    }
    if (unknown) std::cerr << unknown << " document(s) had no in-vocabulary words\n";
    return 0;
}

pvec::FeatureMatrix load_feature_matrix(const std::string &vectors_path,
                                        const std::string &labels_path) {
    pvec::FeatureMatrix m;
    {
        auto in = open_input(vectors_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string field;
            std::vector<double> row;
            bool first = true;
            while (std::getline(ss, field, '\t')) {
                if (first) {
                    first = false;  // doc_id column
                    continue;
                }
                try {
                    row.push_back(std::stod(field));
                } catch (const std::exception &) {
                    throw pvec::ParseError("bad vector value '" + field + "'", line_no);
                }
            }
            if (m.dim == 0) m.dim = row.size();
            if (row.size() != m.dim) throw pvec::ParseError("inconsistent vector width", line_no);
            m.x.insert(m.x.end(), row.begin(), row.end());
            ++m.n;
        }
    }
    {
        auto in = open_input(labels_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            // accept either a bare label or doc_id TAB label
            std::size_t tab = line.find('\t');
            std::string label = tab == std::string::npos ? line : line.substr(tab + 1);
            if (label == "pos" || label == "1")
                m.y.push_back(1);
            else if (label == "neg" || label == "0")
                m.y.push_back(0);
            else
                throw pvec::ParseError("unknown label '" + label + "'", line_no);
        }
    }
    if (m.y.size() != m.n) throw pvec::ConfigError("vector/label row count mismatch");
    return m;
}

struct ClassifyArgs {
    std::string train_vectors, train_labels, test_vectors, test_labels, kind = "lr";
    std::uint64_t seed = 1;
};

int run_classify(const ClassifyArgs &a) {
    ConfigLog("classify")
        .add("train_vectors", a.train_vectors)
        .add("train_labels", a.train_labels)
        .add("test_vectors", a.test_vectors)
        .add("test_labels", a.test_labels)
        .add("kind", a.kind)
        .add("seed", a.seed)
        .emit();
    auto kind = parse_kind_flag(a.kind);
    auto train = load_feature_matrix(a.train_vectors, a.train_labels);
    auto test = load_feature_matrix(a.test_vectors, a.test_labels);
    auto model = pvec::train_classifier(kind, train, {}, a.seed);
    auto preds = pvec::predict_batch(model, test);
    std::cout << pvec::format_metrics_line(pvec::compute_metrics(preds, test.y)) << '\n';
    return 0;
}

struct SweepArgs {
    std::string config, out;
    std::uint32_t jobs = 1;
};

int run_sweep_cmd(const SweepArgs &a) {
    auto grid = pvec::load_sweep_config(a.config);
    if (!a.out.empty()) grid.out_path = a.out;
    if (grid.out_path.empty()) throw pvec::ConfigError("no output path (set 'out' or --out)");
    {
        ConfigLog log("sweep");
        log.add("config", a.config).add("out", grid.out_path).add("jobs", a.jobs);
        log.add("seed", grid.seed).add("epochs", grid.epochs).add("workers", grid.workers);
        log.add("dataset", grid.dataset_path);
        log.emit();
    }
    auto rows = pvec::run_sweep(grid, a.jobs);
    pvec::write_results_csv(rows, grid.out_path);
    std::size_t errors = 0;
    for (const auto &r : rows) errors += r.status != "ok";
    std::cerr << "sweep complete: " << rows.size() << " rows (" << errors << " error rows) -> "
              << grid.out_path << '\n';
    return 0;
}

struct ReportArgs {
    std::string results, out_prefix;
};

int run_report(const ReportArgs &a) {
    ConfigLog("report").add("results", a.results).add("out_prefix", a.out_prefix).emit();
    auto rows = pvec::load_results_csv(a.results);
    auto summary = pvec::summarize(rows);
    std::cout << "best accuracy per (architecture, classifier):\n";
    std::cout << "arch  clf  window dim  neg  acc       p         r         f1\n";
    std::cout.setf(std::ios::fixed);
    std::cout.precision(6);
    for (const auto &r : summary.best) {
        std::cout << pvec::arch_name(r.arch) << (r.arch == pvec::Architecture::dm ? "    " : "  ")
                  << pvec::classifier_name(r.classifier) << "   " << r.window << "      " << r.dim
                  << "  " << r.negatives << "    " << r.metrics.acc << "  " << r.metrics.precision
                  << "  " << r.metrics.recall << "  " << r.metrics.f1 << '\n';
    }
    auto print_marginal = [](const char *name, const std::vector<pvec::MarginalPoint> &pts) {
        std::cout << "mean accuracy by " << name << ":";
        for (const auto &p : pts) std::cout << "  " << p.value << "->" << p.mean_acc;
        std::cout << '\n';
    };
    print_marginal("window", summary.by_window);
    print_marginal("dim", summary.by_dim);
    print_marginal("negative", summary.by_negatives);
    const std::string prefix = a.out_prefix.empty() ? a.results + "." : a.out_prefix;
    pvec::write_marginal_tsv(summary.by_window, prefix + "window.tsv");
    pvec::write_marginal_tsv(summary.by_dim, prefix + "dim.tsv");
    pvec::write_marginal_tsv(summary.by_negatives, prefix + "negative.tsv");
    std::cerr << "marginal series written with prefix " << prefix << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"paragraph-vector sentiment pipeline"};
    app.require_subcommand(0, 1);
    auto version_cb = [](std::size_t) {
        std::cout << "pvec " << tool_version << " (model format v" << pvec::model_format_version
                  << ")\n";
        std::exit(0);
    };
    app.add_flag_function("--version", version_cb, "print tool and model-format versions");

    NormalizeArgs na;
    auto *norm = app.add_subcommand("normalize", "normalize raw Arabic text, one document per line");
    norm->add_option("--input", na.input)->required();
    norm->add_option("--output", na.output)->required();
    norm->add_option("--stopwords", na.stopwords);
    norm->add_flag("--keep-ya", na.keep_ya);
    norm->add_flag("--keep-teh-marbuta", na.keep_teh_marbuta);
    norm->add_option("--run-threshold", na.run_threshold);

    TrainArgs ta;
    auto *train = app.add_subcommand("train", "train a paragraph-vector model");
    train->add_option("--arch", ta.arch, "dm|dbow");
    train->add_option("--dim", ta.dim);
    train->add_option("--window", ta.window);
    train->add_option("--negative", ta.negative);
    train->add_option("--epochs", ta.epochs);
    train->add_option("--workers", ta.workers);
    train->add_option("--seed", ta.seed);
    train->add_option("--min-count", ta.min_count);
    train->add_option("--subsample-t", ta.subsample_t);
    train->add_option("--alpha0", ta.alpha0);
    train->add_option("--alpha-min", ta.alpha_min);
    train->add_option("--corpus", ta.corpus, "normalized corpus files")->required()->expected(-1);
    train->add_option("--save", ta.save)->required();

    InferArgs ia;
    auto *infer = app.add_subcommand("infer", "infer vectors for unseen documents");
    infer->add_option("--model", ia.model)->required();
    infer->add_option("--input", ia.input, "TSV: doc_id TAB normalized text")->required();
    infer->add_option("--output", ia.output)->required();
    infer->add_option("--infer-epochs", ia.infer_epochs);
    infer->add_option("--seed", ia.seed);

    ClassifyArgs ca;
    auto *classify = app.add_subcommand("classify", "train and evaluate one classifier");
    classify->add_option("--train-vectors", ca.train_vectors)->required();
    classify->add_option("--train-labels", ca.train_labels)->required();
    classify->add_option("--test-vectors", ca.test_vectors)->required();
    classify->add_option("--test-labels", ca.test_labels)->required();
    classify->add_option("--kind", ca.kind, "lr|svm|nb|dt");
    classify->add_option("--seed", ca.seed);

    SweepArgs sa;
    auto *sweep = app.add_subcommand("sweep", "run the hyperparameter grid");
    sweep->add_option("--config", sa.config)->required();
    sweep->add_option("--out", sa.out);
    sweep->add_option("--jobs", sa.jobs);

    ReportArgs ra;
    auto *report = app.add_subcommand("report", "summarize sweep results");
    report->add_option("--results", ra.results)->required();
    report->add_option("--out-prefix", ra.out_prefix);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (norm->parsed()) return run_normalize(na);
        if (train->parsed()) return run_train(ta);
        if (infer->parsed()) return run_infer(ia);
        if (classify->parsed()) return run_classify(ca);
        if (sweep->parsed()) return run_sweep_cmd(sa);
        if (report->parsed()) return run_report(ra);
        std::cerr << app.help();
        return 1;
    } catch (const pvec::ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const pvec::ParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
