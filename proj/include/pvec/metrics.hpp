#ifndef PVEC_METRICS_HPP
#define PVEC_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "pvec/common.hpp"
#include "pvec/corpus.hpp"

namespace pvec {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
    double acc = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    ConfusionCounts counts;
};

// Acc=(tp+tn)/n, P=tp/(tp+fp), R=tp/(tp+fn), F1=2PR/(P+R); 0/0 -> 0.
inline MetricsReport metrics_from_counts(const ConfusionCounts &c) {
    MetricsReport r;
    r.counts = c;
    const double n = static_cast<double>(c.total());
    r.acc = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
    r.precision = (c.tp + c.fp) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    r.recall = (c.tp + c.fn) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

inline MetricsReport compute_metrics(const std::vector<int> &predicted,
                                     const std::vector<int> &actual) {
    if (predicted.size() != actual.size())
        throw ConfigError("predicted/actual length mismatch");
    if (predicted.empty()) throw ConfigError("cannot compute metrics on zero items");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (actual[i] == 1)
            (predicted[i] == 1 ? c.tp : c.fn)++;
        else
            (predicted[i] == 1 ? c.fp : c.tn)++;
    }
    return metrics_from_counts(c);
}

// Machine-readable single line, 6-decimal fixed point.
inline std::string format_metrics_line(const MetricsReport &r) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << "acc=" << r.acc << " p=" << r.precision << " r=" << r.recall << " f1=" << r.f1
       << " tp=" << r.counts.tp << " fp=" << r.counts.fp << " fn=" << r.counts.fn
       << " tn=" << r.counts.tn;
    return os.str();
}

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
};

// Per-class 80:20 (or given fraction) split with a seeded in-class shuffle.
// Test size per class is round(class_count * test_fraction).
inline SplitResult stratified_split(const LabeledDataset &ds, double test_fraction,
                                    std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0,1)");
    SplitResult out;
    out.train.name = ds.name + ":train";
    out.test.name = ds.name + ":test";
    for (int cls = 0; cls < 2; ++cls) {
        const Polarity pol = cls == 1 ? Polarity::positive : Polarity::negative;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.documents.size(); ++i)
            if (ds.documents[i].label == pol) idx.push_back(i);
        if (idx.size() < 2)
            throw ConfigError("stratified split needs at least 2 members per class");
        Rng rng(mix_seed(seed, 0x5917ull, static_cast<std::uint64_t>(cls)));
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
            std::swap(idx[i], idx[j]);
        }
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * test_fraction));
        n_test = std::min(n_test, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            LabeledDataset &dst = i < n_test ? out.test : out.train;
            dst.documents.push_back(ds.documents[idx[i]]);
            if (pol == Polarity::positive)
                ++dst.positive_count;
            else
                ++dst.negative_count;
        }
    }
    return out;
}

} // namespace pvec

#endif
