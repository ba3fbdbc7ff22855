#ifndef PVEC_SWEEP_HPP
#define PVEC_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "pvec/classify.hpp"
#include "pvec/common.hpp"
#include "pvec/corpus.hpp"
#include "pvec/metrics.hpp"
#include "pvec/model.hpp"

namespace pvec {

struct SweepGrid {
    std::vector<std::uint32_t> windows;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint32_t> negatives;
    std::vector<Architecture> architectures;
    std::vector<ClassifierKind> classifiers;
    std::uint64_t seed = 1;
    std::uint32_t epochs = 10;
    std::vector<std::string> corpus_paths;
    std::string dataset_path;
    std::string out_path;
    std::string stopwords_path;
    // training knobs shared by every cell
    std::uint32_t min_count = 5;
    double subsample_t = 1e-5;
    double alpha0 = 0.025;
    double alpha_min = 1e-4;
    std::uint32_t workers = 1;
    std::uint32_t infer_epochs = 50;
    double test_fraction = 0.2;
    bool record_timings = true;

    void validate() const {
        auto non_empty_unique = [](const auto &v, const char *what) {
            if (v.empty()) throw ConfigError(std::string(what) + " list must be non-empty");
            auto s = v;
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end())
                throw ConfigError(std::string(what) + " list has duplicates");
        };
        non_empty_unique(windows, "windows");
        non_empty_unique(dims, "dims");
        non_empty_unique(negatives, "negatives");
        non_empty_unique(architectures, "architectures");
        non_empty_unique(classifiers, "classifiers");
        if (dataset_path.empty()) throw ConfigError("dataset path is required");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
    }
};

struct SweepCell {
    Architecture arch;
    std::uint32_t window, dim, negatives;
};

struct SweepResult {
    Architecture arch = Architecture::dm;
    std::uint32_t window = 0, dim = 0, negatives = 0;
    ClassifierKind classifier = ClassifierKind::lr;
    MetricsReport metrics;
    double embed_seconds = 0.0;
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

// Every (arch, W, D, NS) combination, in deterministic sorted order.
inline std::vector<SweepCell> plan_cells(const SweepGrid &grid) {
    grid.validate();
    std::vector<SweepCell> cells;
    auto arches = grid.architectures;
    std::sort(arches.begin(), arches.end());
    auto ws = grid.windows, ds = grid.dims, ns = grid.negatives;
    std::sort(ws.begin(), ws.end());
    std::sort(ds.begin(), ds.end());
    std::sort(ns.begin(), ns.end());
    for (Architecture a : arches)
        for (std::uint32_t w : ws)
            for (std::uint32_t d : ds)
                for (std::uint32_t k : ns) cells.push_back({a, w, d, k});
    return cells;
}

inline std::uint64_t cell_seed(std::uint64_t sweep_seed, const SweepCell &c) {
    return mix_seed(sweep_seed, static_cast<std::uint64_t>(c.arch), c.window, c.dim, c.negatives);
}

// ---- config file: flat `key = value`, lists comma-separated ---------------

namespace detail {

inline std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

inline std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline Architecture parse_arch(const std::string &s, std::size_t line) {
    if (s == "dm") return Architecture::dm;
    if (s == "dbow") return Architecture::dbow;
    throw ParseError("unknown architecture '" + s + "'", line);
}

inline ClassifierKind parse_classifier(const std::string &s, std::size_t line) {
    if (s == "lr") return ClassifierKind::lr;
    if (s == "svm") return ClassifierKind::svm;
    if (s == "nb") return ClassifierKind::nb;
    if (s == "dt") return ClassifierKind::dt;
    throw ParseError("unknown classifier '" + s + "'", line);
}

} // namespace detail

inline SweepGrid parse_sweep_config(std::istream &in) {
    SweepGrid g;
    g.architectures = {Architecture::dm, Architecture::dbow};
    g.classifiers = {ClassifierKind::lr, ClassifierKind::svm, ClassifierKind::nb,
                     ClassifierKind::dt};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        auto as_u32_list = [&] {
            std::vector<std::uint32_t> out;
            for (auto &s : detail::split_list(val)) out.push_back(std::stoul(s));
            return out;
        };
        try {
            if (key == "windows") g.windows = as_u32_list();
            else if (key == "dims") g.dims = as_u32_list();
            else if (key == "negatives") g.negatives = as_u32_list();
            else if (key == "architectures") {
                g.architectures.clear();
                for (auto &s : detail::split_list(val))
                    g.architectures.push_back(detail::parse_arch(s, line_no));
            } else if (key == "classifiers") {
                g.classifiers.clear();
                for (auto &s : detail::split_list(val))
                    g.classifiers.push_back(detail::parse_classifier(s, line_no));
            } else if (key == "epochs") g.epochs = std::stoul(val);
            else if (key == "seed") g.seed = std::stoull(val);
            else if (key == "corpus") g.corpus_paths = detail::split_list(val);
            else if (key == "dataset") g.dataset_path = val;
            else if (key == "out") g.out_path = val;
            else if (key == "stopwords") g.stopwords_path = val;
            else if (key == "min_count") g.min_count = std::stoul(val);
            else if (key == "subsample_t") g.subsample_t = std::stod(val);
            else if (key == "alpha0") g.alpha0 = std::stod(val);
            else if (key == "alpha_min") g.alpha_min = std::stod(val);
            else if (key == "workers") g.workers = std::stoul(val);
            else if (key == "infer_epochs") g.infer_epochs = std::stoul(val);
            else if (key == "test_fraction") g.test_fraction = std::stod(val);
            else if (key == "timings") g.record_timings = (val != "off" && val != "false" && val != "0");
            else throw ParseError("unknown key '" + key + "'", line_no);
        } catch (const std::invalid_argument &) {
            throw ParseError("bad value for key '" + key + "'", line_no);
        } catch (const std::out_of_range &) {
            throw ParseError("value out of range for key '" + key + "'", line_no);
        }
    }
    return g;
}

inline SweepGrid load_sweep_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("file not found: " + path);
    return parse_sweep_config(in);
}

// ---- sweep execution -------------------------------------------------------

namespace detail {

struct SweepContext {
    LabeledDataset train_split, test_split;
    std::vector<NormalizedDocument> embed_docs;  // corpus docs then train docs
    std::size_t train_row_offset = 0;            // first train doc's row
};

inline SweepContext prepare_sweep_context(const SweepGrid &grid) {
    NormalizationRules rules;
    if (!grid.stopwords_path.empty()) rules.stopwords = load_stopwords(grid.stopwords_path, rules);
    LabeledDataset ds = load_labeled_dataset(grid.dataset_path, rules);
    if (ds.documents.empty()) throw ConfigError("dataset is empty: " + grid.dataset_path);
    SplitResult split = stratified_split(ds, grid.test_fraction, mix_seed(grid.seed, 0x5317ull));
    SweepContext ctx;
    for (const auto &path : grid.corpus_paths) {
        auto docs = load_corpus_file(path, ctx.embed_docs.size());
        for (auto &d : docs) ctx.embed_docs.push_back(std::move(d));
    }
    ctx.train_row_offset = ctx.embed_docs.size();
    for (const auto &d : split.train.documents) ctx.embed_docs.push_back(d);
    ctx.train_split = std::move(split.train);
    ctx.test_split = std::move(split.test);
    return ctx;
}

// Trains one embedding cell and evaluates every requested classifier on it.
inline std::vector<SweepResult> run_cell(const SweepGrid &grid, const SweepContext &ctx,
                                         const SweepCell &cell) {
    const std::uint64_t seed = cell_seed(grid.seed, cell);
    std::vector<SweepResult> rows;
    auto error_rows = [&](const std::string &msg) {
        for (ClassifierKind k : grid.classifiers) {
            SweepResult r;
            r.arch = cell.arch;
            r.window = cell.window;
            r.dim = cell.dim;
            r.negatives = cell.negatives;
            r.classifier = k;
            r.seed = seed;
            r.status = "error:" + msg;
            rows.push_back(r);
        }
        return rows;
    };
    try {
        const auto t0 = std::chrono::steady_clock::now();
        TrainConfig cfg;
        cfg.arch = cell.arch;
        cfg.window = cell.window;
        cfg.dim = cell.dim;
        cfg.negatives = cell.negatives;
        cfg.epochs = grid.epochs;
        cfg.alpha0 = grid.alpha0;
        cfg.alpha_min = grid.alpha_min;
        cfg.subsample_t = grid.subsample_t;
        cfg.min_count = grid.min_count;
        cfg.seed = seed;
        cfg.workers = grid.workers;
        cfg.infer_epochs = grid.infer_epochs;
        Vocabulary vocab = build_vocabulary(ctx.embed_docs, cfg.min_count, cfg.subsample_t);
        EmbeddingModel model = init_model(std::move(vocab), ctx.embed_docs.size(), cfg);
        train(model, ctx.embed_docs);

        // train-side vectors come straight off the model; test side is
        // always inferred (unseen text path)
        FeatureMatrix train_x, test_x;
        train_x.n = ctx.train_split.documents.size();
        train_x.dim = cfg.dim;
        train_x.x.reserve(train_x.n * cfg.dim);
        for (std::size_t i = 0; i < train_x.n; ++i) {
            const float *row = model.doc_row(ctx.train_row_offset + i);
            train_x.x.insert(train_x.x.end(), row, row + cfg.dim);
            train_x.y.push_back(ctx.train_split.documents[i].label == Polarity::positive ? 1 : 0);
        }
        test_x.n = ctx.test_split.documents.size();
        test_x.dim = cfg.dim;
        test_x.x.reserve(test_x.n * cfg.dim);
        for (std::size_t i = 0; i < test_x.n; ++i) {
            auto inferred = infer_vector(model, ctx.test_split.documents[i], cfg.infer_epochs,
                                         mix_seed(seed, 0x1E57ull, i));
            test_x.x.insert(test_x.x.end(), inferred.values.begin(), inferred.values.end());
            test_x.y.push_back(ctx.test_split.documents[i].label == Polarity::positive ? 1 : 0);
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double embed_seconds = std::chrono::duration<double>(t1 - t0).count();

        for (ClassifierKind k : grid.classifiers) {
            SweepResult r;
            r.arch = cell.arch;
            r.window = cell.window;
            r.dim = cell.dim;
            r.negatives = cell.negatives;
            r.classifier = k;
            r.seed = seed;
            try {
                const auto c0 = std::chrono::steady_clock::now();
                ClassifierModel clf = train_classifier(k, train_x, {}, mix_seed(seed, static_cast<std::uint64_t>(k)));
                const auto preds = predict_batch(clf, test_x);
                r.metrics = compute_metrics(preds, test_x.y);
                const auto c1 = std::chrono::steady_clock::now();
                if (grid.record_timings) {
                    r.embed_seconds = embed_seconds;
                    r.train_seconds = std::chrono::duration<double>(c1 - c0).count();
                }
            } catch (const std::exception &e) {
                r.status = std::string("error:") + e.what();
            }
            rows.push_back(std::move(r));
        }
        return rows;
    } catch (const std::exception &e) {
        rows.clear();
        return error_rows(e.what());
    }
}

} // namespace detail

// Cells are independent jobs keyed by derived seeds; rows come back sorted by
// (arch, W, D, NS, classifier) so parallel execution never changes output.
inline std::vector<SweepResult> run_sweep(const SweepGrid &grid, std::uint32_t jobs = 1) {
    grid.validate();
    const auto cells = plan_cells(grid);
    const auto ctx = detail::prepare_sweep_context(grid);
    std::vector<std::vector<SweepResult>> per_cell(cells.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            per_cell[i] = detail::run_cell(grid, ctx, cells[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::uint32_t j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    per_cell[i] = detail::run_cell(grid, ctx, cells[i]);
                }
            });
        for (auto &t : pool) t.join();
    }
    std::vector<SweepResult> rows;
    for (auto &v : per_cell)
        for (auto &r : v) rows.push_back(std::move(r));
    auto order = [](const SweepResult &r) {
        return std::make_tuple(std::string(arch_name(r.arch)), r.window, r.dim, r.negatives,
                               std::string(classifier_name(r.classifier)));
    };
    std::sort(rows.begin(), rows.end(),
              [&](const SweepResult &a, const SweepResult &b) { return order(a) < order(b); });
    return rows;
}

inline std::string results_csv_header() {
    return "arch,window,dim,negative,classifier,acc,precision,recall,f1,tp,fp,fn,tn,"
           "embed_seconds,train_seconds,seed,status";
}

inline void write_results_csv(const std::vector<SweepResult> &rows, std::ostream &out) {
    out << results_csv_header() << '\n';
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto &r : rows) {
        out << arch_name(r.arch) << ',' << r.window << ',' << r.dim << ',' << r.negatives << ','
            << classifier_name(r.classifier) << ',' << r.metrics.acc << ',' << r.metrics.precision
            << ',' << r.metrics.recall << ',' << r.metrics.f1 << ',' << r.metrics.counts.tp << ','
            << r.metrics.counts.fp << ',' << r.metrics.counts.fn << ',' << r.metrics.counts.tn
            << ',' << r.embed_seconds << ',' << r.train_seconds << ',' << r.seed << ','
            << r.status << '\n';
    }
}

inline void write_results_csv(const std::vector<SweepResult> &rows, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write results CSV: " + path);
    write_results_csv(rows, out);
}

inline std::vector<SweepResult> load_results_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("file not found: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty results CSV: " + path);
    std::vector<SweepResult> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() < 17) throw ParseError("too few CSV fields", line_no);
        SweepResult r;
        r.arch = detail::parse_arch(f[0], line_no);
        r.window = std::stoul(f[1]);
        r.dim = std::stoul(f[2]);
        r.negatives = std::stoul(f[3]);
        r.classifier = detail::parse_classifier(f[4], line_no);
        r.metrics.acc = std::stod(f[5]);
        r.metrics.precision = std::stod(f[6]);
        r.metrics.recall = std::stod(f[7]);
        r.metrics.f1 = std::stod(f[8]);
        r.metrics.counts.tp = std::stoull(f[9]);
        r.metrics.counts.fp = std::stoull(f[10]);
        r.metrics.counts.fn = std::stoull(f[11]);
        r.metrics.counts.tn = std::stoull(f[12]);
        r.embed_seconds = std::stod(f[13]);
        r.train_seconds = std::stod(f[14]);
        r.seed = std::stoull(f[15]);
        // the status message may itself contain commas
        std::string status = f[16];
        for (std::size_t i = 17; i < f.size(); ++i) status += "," + f[i];
        r.status = status;
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- summary ---------------------------------------------------------------

struct MarginalPoint {
    std::uint32_t value = 0;
    double mean_acc = 0.0;
    std::size_t rows = 0;
};

struct SweepSummary {
    // best-accuracy row per (architecture, classifier)
    std::vector<SweepResult> best;
    std::vector<MarginalPoint> by_window, by_dim, by_negatives;
};

inline SweepSummary summarize(const std::vector<SweepResult> &results) {
    if (results.empty()) throw ConfigError("cannot summarize empty results");
    SweepSummary s;
    std::map<std::pair<std::string, std::string>, SweepResult> best;
    std::map<std::uint32_t, std::pair<double, std::size_t>> by_w, by_d, by_n;
    for (const auto &r : results) {
        if (r.status != "ok") continue;
        auto key = std::make_pair(std::string(arch_name(r.arch)),
                                  std::string(classifier_name(r.classifier)));
        auto it = best.find(key);
        if (it == best.end() || r.metrics.acc > it->second.metrics.acc) best[key] = r;
        auto acc = [&](auto &m, std::uint32_t v) {
            auto &e = m[v];
            e.first += r.metrics.acc;
            e.second += 1;
        };
        acc(by_w, r.window);
        acc(by_d, r.dim);
        acc(by_n, r.negatives);
    }
    for (auto &kv : best) s.best.push_back(kv.second);
    auto flatten = [](const auto &m) {
        std::vector<MarginalPoint> out;
        for (const auto &kv : m)
            out.push_back({kv.first, kv.second.first / static_cast<double>(kv.second.second),
                           kv.second.second});
        return out;
    };
    s.by_window = flatten(by_w);
    s.by_dim = flatten(by_d);
    s.by_negatives = flatten(by_n);
    return s;
}

// Plot-ready two-column TSV: parameter value, mean accuracy.
inline void write_marginal_tsv(const std::vector<MarginalPoint> &points, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write TSV: " + path);
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto &p : points) out << p.value << '\t' << p.mean_acc << '\n';
}

} // namespace pvec

#endif
