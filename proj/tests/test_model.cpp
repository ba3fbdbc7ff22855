#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pvec/model.hpp"
#include "synthetic.hpp"

using namespace pvec;

namespace {

Vocabulary small_vocab(std::size_t v) {
    std::vector<NormalizedDocument> docs(1);
    const auto words = pvec_tests::topic_vocabulary(true);
    REQUIRE(v <= words.size());
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t c = 0; c < i + 1; ++c) docs[0].tokens.push_back(words[i]);
    return build_vocabulary(docs, 1, 0.0);
}

// Independent loss evaluation used as the finite-difference oracle.
double ns_loss(const std::vector<double> &h, const std::vector<std::uint32_t> &rows,
               const std::vector<double> &outputs, std::size_t dim) {
    double loss = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double score = 0.0;
        for (std::size_t i = 0; i < dim; ++i) score += outputs[rows[r] * dim + i] * h[i];
        const double s = r == 0 ? score : -score;
        loss += -std::log(1.0 / (1.0 + std::exp(-s)));
    }
    return loss;
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EmbeddingModel trained_synthetic_model(Architecture arch, std::uint32_t workers = 1,
                                       std::size_t docs_per_topic = 60) {
    auto ds = pvec_tests::make_synthetic_dataset(9, docs_per_topic);
    TrainConfig cfg;
    cfg.arch = arch;
    cfg.dim = 16;
    cfg.window = 3;
    cfg.negatives = 3;
    cfg.epochs = 3;
    cfg.min_count = 1;
    cfg.subsample_t = 0.0;
    cfg.seed = 5;
    cfg.workers = workers;
    auto vocab = build_vocabulary(ds.documents, cfg.min_count, cfg.subsample_t);
    auto model = init_model(std::move(vocab), ds.documents.size(), cfg);
    train(model, ds.documents);
    return model;
}

} // namespace

TEST_CASE("sigmoid symmetry") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-30.0, 30.0);
        CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-12);
    }
}

TEST_CASE("init_model bounds, zero outputs, determinism") {
    auto vocab = small_vocab(5);
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.min_count = 1;
    cfg.seed = 9;
    auto m = init_model(vocab, 3, cfg);
    for (float v : m.word_vectors) {
        CHECK(v >= -0.125f);
        CHECK(v <= 0.125f);
    }
    for (float v : m.doc_vectors) {
        CHECK(v >= -0.125f);
        CHECK(v <= 0.125f);
    }
    for (float v : m.output_vectors) CHECK(v == 0.0f);

    auto m2 = init_model(vocab, 3, cfg);
    CHECK(m.doc_vectors == m2.doc_vectors);
    CHECK(m.word_vectors == m2.word_vectors);
}

TEST_CASE("config invariants are enforced") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.alpha_min = 1.0;  // above alpha0
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("fresh-model first-step loss is (k+1) ln 2") {
    const std::size_t dim = 8;
    const std::uint32_t k = 2;
    std::vector<double> outputs(10 * dim, 0.0);
    std::vector<double> h(dim), grad(dim);
    Rng rng(4);
    for (auto &v : h) v = rng.uniform(-1.0, 1.0);
    std::vector<std::uint32_t> rows = {0, 3, 7};
    const double loss =
        ns_step_rows<double>(h.data(), dim, rows, outputs.data(), 0.025, grad.data());
    CHECK(std::abs(loss - (k + 1) * std::log(2.0)) < 1e-9);
}

TEST_CASE("ns_step gradients match central finite differences") {
    const std::size_t dim = 8;
    Rng rng(13);
    const double eps = 1e-4;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> outputs(6 * dim);
        for (auto &v : outputs) v = rng.uniform(-1.0, 1.0);
        std::vector<double> h(dim);
        for (auto &v : h) v = rng.uniform(-1.0, 1.0);
        // distinct rows: in-place updates alias through duplicate ids
        std::vector<std::uint32_t> pool = {0, 1, 2, 3, 4, 5};
        for (std::size_t i = pool.size() - 1; i > 0; --i)
            std::swap(pool[i], pool[rng.bounded(i + 1)]);
        std::vector<std::uint32_t> rows(pool.begin(), pool.begin() + 4);

        // analytic grad_h, and grad_u recovered from an alpha=1 update
        std::vector<double> grad_h(dim);
        std::vector<double> updated = outputs;
        ns_step_rows<double>(h.data(), dim, rows, updated.data(), 1.0, grad_h.data());

        for (std::size_t i = 0; i < dim; ++i) {
            auto hp = h, hm = h;
            hp[i] += eps;
            hm[i] -= eps;
            const double fd =
                (ns_loss(hp, rows, outputs, dim) - ns_loss(hm, rows, outputs, dim)) / (2 * eps);
            CHECK(std::abs(grad_h[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t i = 0; i < dim; ++i) {
                const std::size_t idx = rows[r] * dim + i;
                const double analytic = outputs[idx] - updated[idx];  // alpha * dL/du
                auto op = outputs, om = outputs;
                op[idx] += eps;
                om[idx] -= eps;
                const double fd =
                    (ns_loss(h, rows, op, dim) - ns_loss(h, rows, om, dim)) / (2 * eps);
                CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("one ns step reduces the loss for small alpha") {
    const std::size_t dim = 8;
    Rng rng(21);
    std::vector<double> outputs(6 * dim);
    for (auto &v : outputs) v = rng.uniform(-1.0, 1.0);
    std::vector<double> h(dim), grad(dim);
    for (auto &v : h) v = rng.uniform(-1.0, 1.0);
    std::vector<std::uint32_t> rows = {0, 2, 4};
    const double before = ns_loss(h, rows, outputs, dim);
    ns_step_rows<double>(h.data(), dim, rows, outputs.data(), 0.01, grad.data());
    for (std::size_t i = 0; i < dim; ++i) h[i] -= 0.01 * grad[i];
    CHECK(ns_loss(h, rows, outputs, dim) < before);
}

TEST_CASE("alpha schedule decays linearly and floors at alpha_min") {
    TrainConfig cfg;
    cfg.alpha0 = 0.025;
    cfg.alpha_min = 1e-4;
    double prev = cfg.alpha0;
    for (std::uint64_t c = 0; c <= 1000; c += 50) {
        const double a = detail::alpha_at(cfg, c, 1000);
        CHECK(a <= prev);
        CHECK(a >= cfg.alpha_min);
        prev = a;
    }
    CHECK(detail::alpha_at(cfg, 0, 1000) == cfg.alpha0);
    CHECK(detail::alpha_at(cfg, 1000, 1000) == cfg.alpha_min);
    CHECK(std::abs(detail::alpha_at(cfg, 400, 1000) - cfg.alpha0 * 0.6) < 1e-15);
}

TEST_CASE("training loss decreases on the synthetic corpus") {
    auto ds = pvec_tests::make_synthetic_dataset(17, 100);
    for (Architecture arch : {Architecture::dbow, Architecture::dm}) {
        TrainConfig cfg;
        cfg.arch = arch;
        cfg.dim = 24;
        cfg.window = 4;
        cfg.negatives = 5;
        cfg.epochs = 3;
        cfg.min_count = 1;
        cfg.subsample_t = 0.0;
        cfg.seed = 31;
        auto vocab = build_vocabulary(ds.documents, cfg.min_count, cfg.subsample_t);
        auto model = init_model(std::move(vocab), ds.documents.size(), cfg);
        auto report = train(model, ds.documents);
        REQUIRE(report.epoch_mean_loss.size() == 3);
        CHECK(report.epoch_mean_loss[2] < report.epoch_mean_loss[0]);
        CHECK_FALSE(model.has_nan());
    }
}

TEST_CASE("single-worker training is bitwise deterministic") {
    auto a = trained_synthetic_model(Architecture::dm);
    auto b = trained_synthetic_model(Architecture::dm);
    CHECK(a.doc_vectors == b.doc_vectors);
    CHECK(a.word_vectors == b.word_vectors);
    CHECK(a.output_vectors == b.output_vectors);
}

TEST_CASE("DBOW leaves word input vectors untouched") {
    auto ds = pvec_tests::make_synthetic_dataset(3, 40);
    TrainConfig cfg;
    cfg.arch = Architecture::dbow;
    cfg.dim = 12;
    cfg.negatives = 3;
    cfg.epochs = 2;
    cfg.min_count = 1;
    cfg.subsample_t = 0.0;
    auto vocab = build_vocabulary(ds.documents, 1, 0.0);
    auto model = init_model(std::move(vocab), ds.documents.size(), cfg);
    const auto before = model.word_vectors;
    train(model, ds.documents);
    CHECK(model.word_vectors == before);
    // doc vectors did move
    bool changed = false;
    auto fresh = init_model(model.vocab, model.n_docs, cfg);
    for (std::size_t i = 0; i < model.doc_vectors.size(); ++i)
        if (model.doc_vectors[i] != fresh.doc_vectors[i]) changed = true;
    CHECK(changed);
}

TEST_CASE("hogwild training converges with multiple workers") {
    auto model = trained_synthetic_model(Architecture::dbow, 4, 100);
    CHECK_FALSE(model.has_nan());
}

TEST_CASE("degenerate single-token document trains without context") {
    const auto words = pvec_tests::topic_vocabulary(true);
    std::vector<NormalizedDocument> docs(2);
    docs[0].doc_id = 0;
    docs[0].tokens = {words[0]};
    docs[1].doc_id = 1;
    docs[1].tokens = {words[1], words[0]};
    TrainConfig cfg;
    cfg.arch = Architecture::dm;
    cfg.dim = 4;
    cfg.window = 1;
    cfg.negatives = 1;
    cfg.epochs = 2;
    cfg.min_count = 1;
    cfg.subsample_t = 0.0;
    auto vocab = build_vocabulary(docs, 1, 0.0);
    auto model = init_model(std::move(vocab), docs.size(), cfg);
    auto report = train(model, docs);
    CHECK(report.epoch_mean_loss.size() == 2);
    CHECK_FALSE(model.has_nan());
}

TEST_CASE("infer_vector is deterministic and leaves the model untouched") {
    auto model = trained_synthetic_model(Architecture::dbow);
    auto ds = pvec_tests::make_synthetic_dataset(9, 60);
    const auto doc_before = model.doc_vectors;
    const auto word_before = model.word_vectors;
    const auto out_before = model.output_vectors;
    auto a = infer_vector(model, ds.documents[0], 20, 123);
    auto b = infer_vector(model, ds.documents[0], 20, 123);
    CHECK(a.any_known);
    CHECK(a.values == b.values);
    CHECK(model.doc_vectors == doc_before);
    CHECK(model.word_vectors == word_before);
    CHECK(model.output_vectors == out_before);
}

TEST_CASE("infer_vector on unknown-only documents flags a warning") {
    auto model = trained_synthetic_model(Architecture::dm);
    NormalizedDocument doc;
    auto r = infer_vector(model, doc, 10, 1);
    CHECK_FALSE(r.any_known);
    for (float v : r.values) CHECK(v == 0.0f);

    doc.tokens = {"كلمهغريبه"};  // out of vocabulary
    auto r2 = infer_vector(model, doc, 10, 1);
    CHECK_FALSE(r2.any_known);
}

TEST_CASE("inferred vectors land near their topic centroid") {
    auto ds = pvec_tests::make_synthetic_dataset(25, 150);
    TrainConfig cfg;
    cfg.arch = Architecture::dbow;
    cfg.dim = 24;
    cfg.window = 4;
    cfg.negatives = 5;
    cfg.epochs = 8;
    cfg.min_count = 1;
    cfg.subsample_t = 0.0;
    cfg.seed = 2;
    auto vocab = build_vocabulary(ds.documents, cfg.min_count, cfg.subsample_t);
    // hold out the last 20 documents of each topic
    std::vector<NormalizedDocument> train_docs, held;
    for (const auto &d : ds.documents)
        (d.doc_id < 260 ? train_docs : held).push_back(d);
    for (std::size_t i = 0; i < train_docs.size(); ++i) train_docs[i].doc_id = i;
    auto model = init_model(std::move(vocab), train_docs.size(), cfg);
    train(model, train_docs);

    const std::size_t dim = cfg.dim;
    std::vector<double> cen_a(dim, 0.0), cen_b(dim, 0.0);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < train_docs.size(); ++i) {
        const bool is_a = train_docs[i].label == Polarity::positive;
        auto &cen = is_a ? cen_a : cen_b;
        (is_a ? na : nb)++;
        for (std::size_t j = 0; j < dim; ++j) cen[j] += model.doc_row(i)[j];
    }
    for (std::size_t j = 0; j < dim; ++j) {
        cen_a[j] /= static_cast<double>(na);
        cen_b[j] /= static_cast<double>(nb);
    }
    auto cosine = [&](const std::vector<float> &x, const std::vector<double> &c) {
        double dot = 0, nx = 0, nc = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            dot += x[j] * c[j];
            nx += x[j] * x[j];
            nc += c[j] * c[j];
        }
        return dot / (std::sqrt(nx) * std::sqrt(nc) + 1e-12);
    };
    double mean_to_a = 0, mean_to_b = 0;
    std::size_t n_held_a = 0;
    for (const auto &d : held) {
        if (d.label != Polarity::positive) continue;
        auto v = infer_vector(model, d, 50, 1000 + d.doc_id);
        mean_to_a += cosine(v.values, cen_a);
        mean_to_b += cosine(v.values, cen_b);
        ++n_held_a;
    }
    REQUIRE(n_held_a > 0);
    CHECK(mean_to_a / n_held_a > mean_to_b / n_held_a);
}

TEST_CASE("model save/load round trip is byte identical") {
    auto model = trained_synthetic_model(Architecture::dm);
    save_model(model, "tmp_model_a.bin");
    auto loaded = load_model("tmp_model_a.bin");
    CHECK(loaded.doc_vectors == model.doc_vectors);
    CHECK(loaded.word_vectors == model.word_vectors);
    CHECK(loaded.output_vectors == model.output_vectors);
    CHECK(loaded.vocab.words == model.vocab.words);
    CHECK(loaded.vocab.counts == model.vocab.counts);
    CHECK(loaded.config.window == model.config.window);
    CHECK(loaded.config.seed == model.config.seed);
    save_model(loaded, "tmp_model_b.bin");
    CHECK(slurp("tmp_model_a.bin") == slurp("tmp_model_b.bin"));
}

TEST_CASE("bad magic and truncation are format errors") {
    {
        std::ofstream out("tmp_model_bad.bin", std::ios::binary);
        out << "XXXXgarbage";
    }
    CHECK_THROWS_AS(load_model("tmp_model_bad.bin"), FormatError);

    auto model = trained_synthetic_model(Architecture::dm);
    save_model(model, "tmp_model_c.bin");
    const std::string bytes = slurp("tmp_model_c.bin");
    {
        std::ofstream out("tmp_model_trunc.bin", std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_model("tmp_model_trunc.bin"), FormatError);
}

TEST_CASE("model file size matches the format arithmetic") {
    const auto words = pvec_tests::topic_vocabulary(true);
    std::vector<NormalizedDocument> docs(2);
    docs[0].tokens = {words[0], words[1], words[2]};
    docs[1].tokens = {words[0], words[1], words[2]};
    TrainConfig cfg;
    cfg.dim = 2;
    cfg.min_count = 1;
    cfg.negatives = 1;
    auto vocab = build_vocabulary(docs, 1, 0.0);
    REQUIRE(vocab.size() == 3);
    auto model = init_model(std::move(vocab), 2, cfg);
    save_model(model, "tmp_model_size.bin");
    std::size_t vocab_bytes = 8;
    for (const auto &w : model.vocab.words) vocab_bytes += 4 + w.size() + 8;
    const std::size_t expected = 4 + 4 + 1                       // magic, version, arch
                                 + 4 * 4 + 3 * 8 + 8 + 4         // config block
                                 + vocab_bytes + 8               // vocab, doc count
                                 + 4 * (2 * 2 + 3 * 2 + 3 * 2);  // three f32 matrices
    CHECK(slurp("tmp_model_size.bin").size() == expected);
}
