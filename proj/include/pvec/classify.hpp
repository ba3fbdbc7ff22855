#ifndef PVEC_CLASSIFY_HPP
#define PVEC_CLASSIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "pvec/common.hpp"
#include "pvec/model.hpp"

namespace pvec {

enum class ClassifierKind : std::uint8_t { lr, svm, nb, dt };

inline const char *classifier_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::lr: return "lr";
        case ClassifierKind::svm: return "svm";
        case ClassifierKind::nb: return "nb";
        default: return "dt";
    }
}

struct FeatureMatrix {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> x;  // n x dim row-major
    std::vector<int> y;     // labels in {0,1}

    const double *row(std::size_t i) const { return x.data() + i * dim; }

    void validate_for_training() const {
        if (n < 2) throw ConfigError("training needs at least 2 samples");
        if (x.size() != n * dim || y.size() != n) throw ConfigError("feature matrix shape mismatch");
        bool pos = false, neg = false;
        for (int v : y) (v == 1 ? pos : neg) = true;
        if (!pos || !neg) throw ConfigError("training data contains a single class");
        for (double v : x)
            if (!std::isfinite(v)) throw ConfigError("non-finite feature value");
    }
};

struct ClassifierHyper {
    // LR / SVM
    double lambda = 1e-4;
    std::uint32_t epochs = 100;
    std::uint32_t batch = 32;
    double lr0 = 0.1;
    double lr_decay = 1e-3;  // lr_t = lr0 / (1 + lr_decay * t)
    // DT
    std::uint32_t max_depth = 10;
    std::uint32_t min_samples_split = 2;
    std::uint32_t max_thresholds = 64;
};

struct TreeNode {
    bool leaf = true;
    int label = 0;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;  // indices into the node pool
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::lr;
    ClassifierHyper hyper;
    std::size_t dim = 0;
    // LR / SVM
    std::vector<double> w;
    double bias = 0.0;
    // NB
    std::vector<double> mean0, var0, mean1, var1;
    double log_prior0 = 0.0, log_prior1 = 0.0;
    // DT
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng &rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

// Mini-batch SGD shared by LR (logistic loss) and SVM (hinge loss), both with
// (lambda/2)||w||^2; bias unregularized.
inline void train_linear(ClassifierModel &m, const FeatureMatrix &data, std::uint64_t seed,
                         bool hinge) {
    const auto &h = m.hyper;
    m.w.assign(data.dim, 0.0);
    m.bias = 0.0;
    Rng rng(mix_seed(seed, hinge ? 0x5764ull : 0x17ull));
    std::vector<double> grad(data.dim);
    std::uint64_t t = 0;
    for (std::uint32_t e = 0; e < h.epochs; ++e) {
        auto idx = shuffled_indices(data.n, rng);
        for (std::size_t start = 0; start < data.n; start += h.batch) {
            const std::size_t end = std::min(data.n, start + h.batch);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const double *xi = data.row(idx[k]);
                double s = m.bias;
                for (std::size_t j = 0; j < data.dim; ++j) s += m.w[j] * xi[j];
                double g;
                if (hinge) {
                    const double yi = data.y[idx[k]] == 1 ? 1.0 : -1.0;
                    if (yi * s >= 1.0) continue;
                    g = -yi;
                } else {
                    g = sigmoid(s) - static_cast<double>(data.y[idx[k]]);
                }
                for (std::size_t j = 0; j < data.dim; ++j) grad[j] += g * xi[j];
                grad_b += g;
            }
            const double lr = h.lr0 / (1.0 + h.lr_decay * static_cast<double>(t));
            ++t;
            for (std::size_t j = 0; j < data.dim; ++j)
                m.w[j] -= lr * (grad[j] * inv_b + h.lambda * m.w[j]);
            m.bias -= lr * grad_b * inv_b;
        }
    }
}

inline void train_gaussian_nb(ClassifierModel &m, const FeatureMatrix &data) {
    const std::size_t d = data.dim;
    m.mean0.assign(d, 0.0);
    m.mean1.assign(d, 0.0);
    m.var0.assign(d, 0.0);
    m.var1.assign(d, 0.0);
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double *xi = data.row(i);
        auto &mean = data.y[i] == 1 ? m.mean1 : m.mean0;
        (data.y[i] == 1 ? n1 : n0)++;
        for (std::size_t j = 0; j < d; ++j) mean[j] += xi[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
        m.mean0[j] /= static_cast<double>(n0);
        m.mean1[j] /= static_cast<double>(n1);
    }
    for (std::size_t i = 0; i < data.n; ++i) {
        const double *xi = data.row(i);
        auto &mean = data.y[i] == 1 ? m.mean1 : m.mean0;
        auto &var = data.y[i] == 1 ? m.var1 : m.var0;
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = xi[j] - mean[j];
            var[j] += dlt * dlt;
        }
    }
    // variance smoothing: epsilon = 1e-9 * max feature variance over the
    // whole training set
    double max_var = 0.0;
    std::vector<double> gmean(d, 0.0);
    for (std::size_t i = 0; i < data.n; ++i)
        for (std::size_t j = 0; j < d; ++j) gmean[j] += data.row(i)[j];
    for (std::size_t j = 0; j < d; ++j) gmean[j] /= static_cast<double>(data.n);
    for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < data.n; ++i) {
            const double dlt = data.row(i)[j] - gmean[j];
            v += dlt * dlt;
        }
        max_var = std::max(max_var, v / static_cast<double>(data.n));
    }
    double eps = 1e-9 * max_var;
    if (eps <= 0.0) eps = 1e-12;
    for (std::size_t j = 0; j < d; ++j) {
        m.var0[j] = m.var0[j] / static_cast<double>(n0) + eps;
        m.var1[j] = m.var1[j] / static_cast<double>(n1) + eps;
    }
    m.log_prior0 = std::log(static_cast<double>(n0) / static_cast<double>(data.n));
    m.log_prior1 = std::log(static_cast<double>(n1) / static_cast<double>(data.n));
}

inline double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

inline int majority_label(const std::vector<std::size_t> &idx, const FeatureMatrix &data) {
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += data.y[i] == 1;
    const std::size_t neg = idx.size() - pos;
    if (pos == neg) return 0;  // tie -> 0
    return pos > neg ? 1 : 0;
}

inline std::int32_t grow_tree(ClassifierModel &m, const FeatureMatrix &data,
                              std::vector<std::size_t> idx, std::uint32_t depth) {
    const auto &h = m.hyper;
    TreeNode node;
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += data.y[i] == 1;
    const bool pure = pos == 0 || pos == idx.size();
    if (pure || depth >= h.max_depth || idx.size() < h.min_samples_split) {
        node.label = majority_label(idx, data);
        m.nodes.push_back(node);
        return static_cast<std::int32_t>(m.nodes.size() - 1);
    }
    const double parent_gini = gini(pos, idx.size());
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;
    std::vector<std::pair<double, int>> vals(idx.size());
    for (std::size_t f = 0; f < data.dim; ++f) {
        for (std::size_t k = 0; k < idx.size(); ++k)
            vals[k] = {data.row(idx[k])[f], data.y[idx[k]]};
        std::sort(vals.begin(), vals.end());
        // candidate thresholds: midpoints between consecutive distinct sorted
        // values, thinned to at most max_thresholds quantile positions
        std::vector<double> cands;
        for (std::size_t k = 1; k < vals.size(); ++k)
            if (vals[k].first > vals[k - 1].first)
                cands.push_back(0.5 * (vals[k].first + vals[k - 1].first));
        if (cands.empty()) continue;
        if (cands.size() > h.max_thresholds) {
            std::vector<double> thinned;
            thinned.reserve(h.max_thresholds);
            for (std::uint32_t q = 0; q < h.max_thresholds; ++q) {
                std::size_t p = (static_cast<std::size_t>(q) + 1) * cands.size() /
                                (static_cast<std::size_t>(h.max_thresholds) + 1);
                thinned.push_back(cands[std::min(p, cands.size() - 1)]);
            }
            thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
            cands.swap(thinned);
        }
        // sweep thresholds over the sorted values, maintaining left counts
        std::size_t li = 0, lpos = 0;
        for (double thr : cands) {
            while (li < vals.size() && vals[li].first <= thr) {
                lpos += vals[li].second == 1;
                ++li;
            }
            const std::size_t ln = li, rn = vals.size() - li;
            if (ln == 0 || rn == 0) continue;
            const double score =
                (static_cast<double>(ln) * gini(lpos, ln) +
                 static_cast<double>(rn) * gini(pos - lpos, rn)) /
                static_cast<double>(vals.size());
            if (score < best_score - 1e-15 ||
                (std::abs(score - best_score) <= 1e-15 && !found)) {
                best_score = score;
                best_feature = f;
                best_threshold = thr;
                found = true;
            }
        }
    }
    // zero-gain splits are allowed (XOR-style data needs them); recursion is
    // bounded by depth and shrinking child sets
    if (!found || best_score > parent_gini + 1e-12) {
        node.label = majority_label(idx, data);
        m.nodes.push_back(node);
        return static_cast<std::int32_t>(m.nodes.size() - 1);
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
        (data.row(i)[best_feature] <= best_threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    node.leaf = false;
    node.feature = best_feature;
    node.threshold = best_threshold;
    m.nodes.push_back(node);
    const std::int32_t self = static_cast<std::int32_t>(m.nodes.size() - 1);
    const std::int32_t l = grow_tree(m, data, std::move(left), depth + 1);
    const std::int32_t r = grow_tree(m, data, std::move(right), depth + 1);
    m.nodes[self].left = l;
    m.nodes[self].right = r;
    return self;
}

} // namespace detail

inline ClassifierModel train_classifier(ClassifierKind kind, const FeatureMatrix &data,
                                        const ClassifierHyper &hyper = {}, std::uint64_t seed = 1) {
    data.validate_for_training();
    ClassifierModel m;
    m.kind = kind;
    m.hyper = hyper;
    m.dim = data.dim;
    switch (kind) {
        case ClassifierKind::lr: detail::train_linear(m, data, seed, /*hinge=*/false); break;
        case ClassifierKind::svm: detail::train_linear(m, data, seed, /*hinge=*/true); break;
        case ClassifierKind::nb: detail::train_gaussian_nb(m, data); break;
        case ClassifierKind::dt: {
            std::vector<std::size_t> idx(data.n);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            detail::grow_tree(m, data, std::move(idx), 0);
            break;
        }
    }
    return m;
}

inline int predict(const ClassifierModel &m, const double *x, std::size_t dim) {
    if (dim != m.dim) throw ConfigError("feature dimension mismatch");
    switch (m.kind) {
        case ClassifierKind::lr: {
            double s = m.bias;
            for (std::size_t j = 0; j < dim; ++j) s += m.w[j] * x[j];
            return sigmoid(s) >= 0.5 ? 1 : 0;
        }
        case ClassifierKind::svm: {
            double s = m.bias;
            for (std::size_t j = 0; j < dim; ++j) s += m.w[j] * x[j];
            return s >= 0.0 ? 1 : 0;
        }
        case ClassifierKind::nb: {
            double s0 = m.log_prior0, s1 = m.log_prior1;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d0 = x[j] - m.mean0[j];
                const double d1 = x[j] - m.mean1[j];
                s0 += -0.5 * std::log(2.0 * M_PI * m.var0[j]) - d0 * d0 / (2.0 * m.var0[j]);
                s1 += -0.5 * std::log(2.0 * M_PI * m.var1[j]) - d1 * d1 / (2.0 * m.var1[j]);
            }
            return s1 > s0 ? 1 : 0;  // ties -> 0
        }
        default: {
            std::int32_t node = 0;
            while (!m.nodes[node].leaf)
                node = x[m.nodes[node].feature] <= m.nodes[node].threshold ? m.nodes[node].left
                                                                          : m.nodes[node].right;
            return m.nodes[node].label;
        }
    }
}

inline int predict(const ClassifierModel &m, const std::vector<double> &x) {
    return predict(m, x.data(), x.size());
}

inline std::vector<int> predict_batch(const ClassifierModel &m, const FeatureMatrix &data) {
    if (data.dim != m.dim) throw ConfigError("feature dimension mismatch");
    std::vector<int> out(data.n);
    for (std::size_t i = 0; i < data.n; ++i) out[i] = predict(m, data.row(i), data.dim);
    return out;
}

} // namespace pvec

#endif
