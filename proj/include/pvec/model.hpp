#ifndef PVEC_MODEL_HPP
#define PVEC_MODEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pvec/common.hpp"
#include "pvec/corpus.hpp"

namespace pvec {

enum class Architecture : std::uint8_t { dm = 0, dbow = 1 };

inline const char *arch_name(Architecture a) { return a == Architecture::dm ? "dm" : "dbow"; }

struct TrainConfig {
    Architecture arch = Architecture::dm;
    std::uint32_t window = 5;
    std::uint32_t dim = 100;
    std::uint32_t negatives = 5;
    std::uint32_t epochs = 10;
    double alpha0 = 0.025;
    double alpha_min = 1e-4;
    double subsample_t = 1e-5;
    std::uint32_t min_count = 5;
    std::uint64_t seed = 1;
    std::uint32_t workers = 1;
    std::uint32_t infer_epochs = 50;

    void validate() const {
        if (window < 1) throw ConfigError("window must be >= 1");
        if (dim < 1) throw ConfigError("dim must be >= 1");
        if (negatives < 1) throw ConfigError("negatives must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(alpha0 > 0.0)) throw ConfigError("alpha0 must be > 0");
        if (alpha_min > alpha0) throw ConfigError("alpha_min must be <= alpha0");
        if (subsample_t < 0.0) throw ConfigError("subsample_t must be >= 0");
        if (min_count < 1) throw ConfigError("min_count must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (infer_epochs < 1) throw ConfigError("infer_epochs must be >= 1");
    }
};

template <typename Real>
inline Real sigmoid(Real x) {
    if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
    Real e = std::exp(x);
    return e / (Real(1) + e);
}

// log(1 + exp(x)), overflow-safe
template <typename Real>
inline Real softplus(Real x) {
    if (x > Real(0)) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// One negative-sampling step against explicit output rows.
// rows[0] is the positive target, rows[1..] the k negatives.
//   L = -log sigma(u_t . h) - sum_i log sigma(-u_i . h)
// grad_h receives dL/dh (accumulated over the pre-update rows); when
// update_outputs is set each row u gets u -= alpha * (sigma(u.h) - label) * h.
template <typename Real>
Real ns_step_rows(const Real *h, std::size_t dim, std::span<const std::uint32_t> rows,
                  Real *outputs, Real alpha, Real *grad_h, bool update_outputs = true) {
    Real loss = 0;
    for (std::size_t i = 0; i < dim; ++i) grad_h[i] = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Real *u = outputs + static_cast<std::size_t>(rows[r]) * dim;
        Real score = 0;
        for (std::size_t i = 0; i < dim; ++i) score += u[i] * h[i];
        const Real label = (r == 0) ? Real(1) : Real(0);
        loss += (r == 0) ? softplus(-score) : softplus(score);
        const Real g = sigmoid(score) - label;
        for (std::size_t i = 0; i < dim; ++i) grad_h[i] += g * u[i];
        if (update_outputs) {
            const Real step = alpha * g;
            for (std::size_t i = 0; i < dim; ++i) u[i] -= step * h[i];
        }
    }
    return loss;
}

// Samples k negatives from the vocabulary noise table (rejecting the target)
// and runs the step. `rows` is caller scratch to avoid per-call allocation.
template <typename Real>
Real ns_step(const Real *h, std::size_t dim, std::uint32_t target, std::uint32_t k,
             const Vocabulary &vocab, Real *outputs, Real alpha, Real *grad_h, Rng &rng,
             std::vector<std::uint32_t> &rows, bool update_outputs = true) {
    rows.clear();
    rows.push_back(target);
    for (std::uint32_t i = 0; i < k; ++i) rows.push_back(vocab.sample_negative(rng, target));
    return ns_step_rows(h, dim, std::span<const std::uint32_t>(rows), outputs, alpha, grad_h,
                        update_outputs);
}

class EmbeddingModel {
public:
    Vocabulary vocab;
    TrainConfig config;
    std::uint64_t n_docs = 0;
    std::vector<float> doc_vectors;     // n_docs x dim
    std::vector<float> word_vectors;    // V x dim, input side
    std::vector<float> output_vectors;  // V x dim, context side

    float *doc_row(std::size_t i) { return doc_vectors.data() + i * config.dim; }
    const float *doc_row(std::size_t i) const { return doc_vectors.data() + i * config.dim; }
    float *word_row(std::size_t i) { return word_vectors.data() + i * config.dim; }
    const float *word_row(std::size_t i) const { return word_vectors.data() + i * config.dim; }

    bool has_nan() const {
        auto bad = [](const std::vector<float> &m) {
            for (float v : m)
                if (!std::isfinite(v)) return true;
            return false;
        };
        return bad(doc_vectors) || bad(word_vectors) || bad(output_vectors);
    }
};

// doc_vectors and word_vectors i.i.d. uniform in [-0.5/dim, 0.5/dim];
// output_vectors zero (word2vec convention).
inline EmbeddingModel init_model(Vocabulary vocab, std::uint64_t n_docs, const TrainConfig &config) {
    config.validate();
    if (n_docs < 1) throw ConfigError("n_docs must be >= 1");
    EmbeddingModel m;
    m.vocab = std::move(vocab);
    m.config = config;
    m.n_docs = n_docs;
    const std::size_t dim = config.dim;
    const double half = 0.5 / static_cast<double>(dim);
    Rng rng(mix_seed(config.seed, 0xD0C5EEDull));
    m.doc_vectors.resize(n_docs * dim);
    for (float &v : m.doc_vectors) v = static_cast<float>(rng.uniform(-half, half));
    m.word_vectors.resize(m.vocab.size() * dim);
    for (float &v : m.word_vectors) v = static_cast<float>(rng.uniform(-half, half));
    m.output_vectors.assign(m.vocab.size() * dim, 0.0f);
    return m;
}

// Documents mapped to dense word ids; unknown words dropped. Row i of
// doc_vectors corresponds to docs[i].
inline std::vector<std::vector<std::uint32_t>> to_token_ids(
    const std::vector<NormalizedDocument> &docs, const Vocabulary &vocab) {
    std::vector<std::vector<std::uint32_t>> out(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        out[i].reserve(docs[i].tokens.size());
        for (const auto &tok : docs[i].tokens) {
            std::int64_t id = vocab.id_of(tok);
            if (id >= 0) out[i].push_back(static_cast<std::uint32_t>(id));
        }
    }
    return out;
}

namespace detail {

struct EpochStats {
    double loss_sum = 0.0;
    std::uint64_t predictions = 0;
};

// alpha decays linearly with tokens consumed across the whole run:
// alpha(p) = max(alpha_min, alpha0 * (1 - p)).
inline double alpha_at(const TrainConfig &c, std::uint64_t consumed, std::uint64_t total_work) {
    double p = total_work ? static_cast<double>(consumed) / static_cast<double>(total_work) : 1.0;
    return std::max(c.alpha_min, c.alpha0 * (1.0 - p));
}

template <bool IsDm>
void train_docs_range(EmbeddingModel &model, const std::vector<std::vector<std::uint32_t>> &docs,
                      std::size_t begin, std::size_t end, std::uint64_t rng_seed,
                      std::atomic<std::uint64_t> &consumed, std::uint64_t total_work,
                      EpochStats &stats) {
    const TrainConfig &c = model.config;
    const std::size_t dim = c.dim;
    Rng rng(rng_seed);
    std::vector<float> h(dim), grad(dim);
    std::vector<std::uint32_t> surviving, rows;
    float *outputs = model.output_vectors.data();
    for (std::size_t d = begin; d < end; ++d) {
        const auto &doc = docs[d];
        if (doc.empty()) continue;
        const double alpha =
            alpha_at(c, consumed.fetch_add(doc.size(), std::memory_order_relaxed), total_work);
        const float alpha_f = static_cast<float>(alpha);
        surviving.clear();
        for (std::uint32_t id : doc) {
            double kp = model.vocab.keep_prob[id];
            if (kp >= 1.0 || rng.uniform() < kp) surviving.push_back(id);
        }
        if (surviving.empty()) continue;
        float *docvec = model.doc_row(d);
        const std::size_t n = surviving.size();
        for (std::size_t t = 0; t < n; ++t) {
            const std::uint32_t target = surviving[t];
            if constexpr (IsDm) {
                // reduced window b ~ Uniform{1..W}; h = mean of doc vector
                // and context word input vectors
                const std::size_t b = 1 + static_cast<std::size_t>(rng.bounded(c.window));
                const std::size_t lo = t >= b ? t - b : 0;
                const std::size_t hi = std::min(n - 1, t + b);
                std::size_t cnt = 1;
                for (std::size_t i = 0; i < dim; ++i) h[i] = docvec[i];
                for (std::size_t p = lo; p <= hi; ++p) {
                    if (p == t) continue;
                    const float *wv = model.word_row(surviving[p]);
                    for (std::size_t i = 0; i < dim; ++i) h[i] += wv[i];
                    ++cnt;
                }
                const float inv = 1.0f / static_cast<float>(cnt);
                for (std::size_t i = 0; i < dim; ++i) h[i] *= inv;
                stats.loss_sum += ns_step(h.data(), dim, target, c.negatives, model.vocab, outputs,
                                          alpha_f, grad.data(), rng, rows);
                ++stats.predictions;
                                const float scale = alpha_f * inv;
                for (std::size_t i = 0; i < dim; ++i) docvec[i] -= scale * grad[i];
                for (std::size_t p = lo; p <= hi; ++p) {
                    if (p == t) continue;
                    float *wv = model.word_row(surviving[p]);
                    for (std::size_t i = 0; i < dim; ++i) wv[i] -= scale * grad[i];
                }
            } else {
                // DBOW: the document vector alone predicts each word
                stats.loss_sum += ns_step(docvec, dim, target, c.negatives, model.vocab, outputs,
                                          alpha_f, grad.data(), rng, rows);
                ++stats.predictions;
                for (std::size_t i = 0; i < dim; ++i) docvec[i] -= alpha_f * grad[i];
            }
        }
    }
}

template <bool IsDm>
double train_epoch_impl(EmbeddingModel &model, const std::vector<std::vector<std::uint32_t>> &docs,
                        std::uint32_t epoch, std::atomic<std::uint64_t> &consumed,
                        std::uint64_t total_work) {
    const std::uint32_t workers = model.config.workers;
    std::vector<EpochStats> stats(workers);
    if (workers == 1) {
        train_docs_range<IsDm>(model, docs, 0, docs.size(),
                               mix_seed(model.config.seed, epoch, 0, 0x77ull), consumed, total_work,
                               stats[0]);
    } else {
        // hogwild: workers share the matrices without locks; convergence is
        // statistical, not bitwise
        std::vector<std::thread> threads;
        const std::size_t chunk = (docs.size() + workers - 1) / workers;
        for (std::uint32_t w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(docs.size(), static_cast<std::size_t>(w) * chunk);
            const std::size_t end = std::min(docs.size(), begin + chunk);
            threads.emplace_back([&, w, begin, end] {
                train_docs_range<IsDm>(model, docs, begin, end,
                                       mix_seed(model.config.seed, epoch, w, 0x77ull), consumed,
                                       total_work, stats[w]);
            });
        }
        for (auto &t : threads) t.join();
    }
    double loss = 0.0;
    std::uint64_t preds = 0;
    for (const auto &s : stats) {
        loss += s.loss_sum;
        preds += s.predictions;
    }
    return preds ? loss / static_cast<double>(preds) : 0.0;
}

} // namespace detail

inline double train_epoch_dm(EmbeddingModel &model, const std::vector<std::vector<std::uint32_t>> &docs,
                             std::uint32_t epoch, std::atomic<std::uint64_t> &consumed,
                             std::uint64_t total_work) {
    return detail::train_epoch_impl<true>(model, docs, epoch, consumed, total_work);
}

inline double train_epoch_dbow(EmbeddingModel &model,
                               const std::vector<std::vector<std::uint32_t>> &docs,
                               std::uint32_t epoch, std::atomic<std::uint64_t> &consumed,
                               std::uint64_t total_work) {
    return detail::train_epoch_impl<false>(model, docs, epoch, consumed, total_work);
}

struct TrainReport {
    std::vector<double> epoch_mean_loss;
};

// Full training run; docs[i] owns doc_vectors row i.
inline TrainReport train(EmbeddingModel &model, const std::vector<NormalizedDocument> &docs) {
    model.config.validate();
    if (docs.size() != model.n_docs) throw ConfigError("document count does not match model");
    const auto token_docs = to_token_ids(docs, model.vocab);
    std::uint64_t tokens_per_epoch = 0;
    for (const auto &d : token_docs) tokens_per_epoch += d.size();
    const std::uint64_t total_work =
        tokens_per_epoch * static_cast<std::uint64_t>(model.config.epochs);
    std::atomic<std::uint64_t> consumed{0};
    TrainReport report;
    for (std::uint32_t e = 0; e < model.config.epochs; ++e) {
        double loss = model.config.arch == Architecture::dm
                          ? train_epoch_dm(model, token_docs, e, consumed, total_work)
                          : train_epoch_dbow(model, token_docs, e, consumed, total_work);
        if (model.has_nan()) throw DivergenceError("NaN/Inf parameter detected", e);
        report.epoch_mean_loss.push_back(loss);
    }
    return report;
}

struct InferredVector {
    std::vector<float> values;
    bool any_known = false;  // false: every token was out of vocabulary
};

// Fits a fresh doc vector with word and output matrices frozen.
inline InferredVector infer_vector(const EmbeddingModel &model, const NormalizedDocument &doc,
                                   std::uint32_t infer_epochs, std::uint64_t seed) {
    const TrainConfig &c = model.config;
    const std::size_t dim = c.dim;
    InferredVector result;
    result.values.assign(dim, 0.0f);
    std::vector<std::uint32_t> ids;
    for (const auto &tok : doc.tokens) {
        std::int64_t id = model.vocab.id_of(tok);
        if (id >= 0) ids.push_back(static_cast<std::uint32_t>(id));
    }
    if (ids.empty()) return result;
    result.any_known = true;

    Rng rng(mix_seed(seed, 0x1FE2ull));
    const double half = 0.5 / static_cast<double>(dim);
    std::vector<float> vec(dim);
    for (float &v : vec) v = static_cast<float>(rng.uniform(-half, half));

    // output rows are copied per step so the model stays untouched
    std::vector<float> h(dim), grad(dim), u_scratch;
    std::vector<std::uint32_t> rows;
    const float *outputs = model.output_vectors.data();
    const std::uint64_t total_work = static_cast<std::uint64_t>(infer_epochs) * ids.size();
    std::uint64_t consumed = 0;
    const std::size_t n = ids.size();
    for (std::uint32_t e = 0; e < infer_epochs; ++e) {
        for (std::size_t t = 0; t < n; ++t) {
            const float alpha = static_cast<float>(detail::alpha_at(c, consumed++, total_work));
            const std::uint32_t target = ids[t];
            rows.clear();
            rows.push_back(target);
            for (std::uint32_t k = 0; k < c.negatives; ++k)
                rows.push_back(model.vocab.sample_negative(rng, target));
            const float *hp;
            float inv = 1.0f;
            if (c.arch == Architecture::dm) {
                const std::size_t b = 1 + static_cast<std::size_t>(rng.bounded(c.window));
                const std::size_t lo = t >= b ? t - b : 0;
                const std::size_t hi = std::min(n - 1, t + b);
                std::size_t cnt = 1;
                for (std::size_t i = 0; i < dim; ++i) h[i] = vec[i];
                for (std::size_t p = lo; p <= hi; ++p) {
                    if (p == t) continue;
                    const float *wv = model.word_row(ids[p]);
                    for (std::size_t i = 0; i < dim; ++i) h[i] += wv[i];
                    ++cnt;
                }
                inv = 1.0f / static_cast<float>(cnt);
                for (std::size_t i = 0; i < dim; ++i) h[i] *= inv;
                hp = h.data();
            } else {
                hp = vec.data();
            }
            ns_step_rows<float>(hp, dim, std::span<const std::uint32_t>(rows),
                                const_cast<float *>(outputs), alpha, grad.data(),
                                /*update_outputs=*/false);
            const float scale = alpha * inv;
            for (std::size_t i = 0; i < dim; ++i) vec[i] -= scale * grad[i];
        }
    }
    result.values = std::move(vec);
    return result;
}

// ---- persistence -----------------------------------------------------------
// Little-endian layout: magic "PVEC", version u32=1, arch u8, config block
// (W,D,k,E u32; alpha0,alpha_min,subsample_t f64; seed u64; min_count u32),
// vocab block (V u64; per word: byte length u32, bytes, count u64),
// doc count u64, then doc/word/output matrices row-major f32.

inline constexpr std::uint32_t model_format_version = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream &out, T v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream &in) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(v));
    if (!in) throw FormatError("model file truncated");
    return v;
}

} // namespace detail

inline void save_model(const EmbeddingModel &model, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path);
    out.write("PVEC", 4);
    detail::write_pod<std::uint32_t>(out, model_format_version);
    detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(model.config.arch));
    detail::write_pod<std::uint32_t>(out, model.config.window);
    detail::write_pod<std::uint32_t>(out, model.config.dim);
    detail::write_pod<std::uint32_t>(out, model.config.negatives);
    detail::write_pod<std::uint32_t>(out, model.config.epochs);
    detail::write_pod<double>(out, model.config.alpha0);
    detail::write_pod<double>(out, model.config.alpha_min);
    detail::write_pod<double>(out, model.config.subsample_t);
    detail::write_pod<std::uint64_t>(out, model.config.seed);
    detail::write_pod<std::uint32_t>(out, model.config.min_count);
    detail::write_pod<std::uint64_t>(out, model.vocab.size());
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
        const std::string &w = model.vocab.words[i];
        detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
        detail::write_pod<std::uint64_t>(out, model.vocab.counts[i]);
    }
    detail::write_pod<std::uint64_t>(out, model.n_docs);
    auto write_matrix = [&](const std::vector<float> &m) {
        out.write(reinterpret_cast<const char *>(m.data()),
                  static_cast<std::streamsize>(m.size() * sizeof(float)));
    };
    write_matrix(model.doc_vectors);
    write_matrix(model.word_vectors);
    write_matrix(model.output_vectors);
    if (!out) throw IoError("write failed: " + path);
}

inline EmbeddingModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PVEC", 4) != 0) throw FormatError("bad magic: not a model file");
    const std::uint32_t version = detail::read_pod<std::uint32_t>(in);
    if (version != model_format_version)
        throw FormatError("unsupported model format version " + std::to_string(version));
    EmbeddingModel m;
    const std::uint8_t arch = detail::read_pod<std::uint8_t>(in);
    if (arch > 1) throw FormatError("unknown architecture tag");
    m.config.arch = static_cast<Architecture>(arch);
    m.config.window = detail::read_pod<std::uint32_t>(in);
    m.config.dim = detail::read_pod<std::uint32_t>(in);
    m.config.negatives = detail::read_pod<std::uint32_t>(in);
    m.config.epochs = detail::read_pod<std::uint32_t>(in);
    m.config.alpha0 = detail::read_pod<double>(in);
    m.config.alpha_min = detail::read_pod<double>(in);
    m.config.subsample_t = detail::read_pod<double>(in);
    m.config.seed = detail::read_pod<std::uint64_t>(in);
    m.config.min_count = detail::read_pod<std::uint32_t>(in);
    const std::uint64_t vocab_size = detail::read_pod<std::uint64_t>(in);
    m.vocab.words.reserve(vocab_size);
    m.vocab.counts.reserve(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        const std::uint32_t len = detail::read_pod<std::uint32_t>(in);
        std::string w(len, '\0');
        in.read(w.data(), len);
        if (!in) throw FormatError("model file truncated");
        m.vocab.words.push_back(std::move(w));
        const std::uint64_t count = detail::read_pod<std::uint64_t>(in);
        m.vocab.counts.push_back(count);
        m.vocab.total_tokens += count;
    }
    // derived vocabulary state is rebuilt, not stored
    m.vocab.keep_prob.resize(vocab_size);
    std::vector<double> noise(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        if (m.config.subsample_t > 0.0) {
            double f = static_cast<double>(m.vocab.counts[i]) /
                       static_cast<double>(m.vocab.total_tokens);
            m.vocab.keep_prob[i] =
                std::min(1.0, std::sqrt(m.config.subsample_t / f) + m.config.subsample_t / f);
        } else {
            m.vocab.keep_prob[i] = 1.0;
        }
        noise[i] = std::pow(static_cast<double>(m.vocab.counts[i]), 0.75);
    }
    if (vocab_size > 0) m.vocab.noise_table = AliasTable(noise);
    m.vocab.rebuild_index();
    m.n_docs = detail::read_pod<std::uint64_t>(in);
    auto read_matrix = [&](std::vector<float> &mat, std::uint64_t rows) {
        mat.resize(rows * m.config.dim);
        in.read(reinterpret_cast<char *>(mat.data()),
                static_cast<std::streamsize>(mat.size() * sizeof(float)));
        if (!in) throw FormatError("model file truncated");
    };
    read_matrix(m.doc_vectors, m.n_docs);
    read_matrix(m.word_vectors, vocab_size);
    read_matrix(m.output_vectors, vocab_size);
    return m;
}

} // namespace pvec

#endif
