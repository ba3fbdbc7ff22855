#ifndef PVEC_CORPUS_HPP
#define PVEC_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvec/arabic_text.hpp"
#include "pvec/common.hpp"

namespace pvec {

// O(1) exact sampling from a fixed discrete distribution (Vose alias method).
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(const std::vector<double> &weights) {
        const std::size_t n = weights.size();
        if (n == 0) throw ConfigError("alias table needs at least one weight");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ConfigError("alias weights must be non-negative");
            sum += w;
        }
        if (sum <= 0.0) throw ConfigError("alias weights must not all be zero");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * n / sum;
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            std::uint32_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (std::uint32_t i : large) prob_[i] = 1.0;
        for (std::uint32_t i : small) prob_[i] = 1.0;
    }

    std::uint32_t sample(Rng &rng) const {
        std::uint32_t i = static_cast<std::uint32_t>(rng.bounded(prob_.size()));
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

    std::size_t size() const { return prob_.size(); }

    // Closed-form per-id probability implied by the table. Used by tests to
    // check the construction against weight/sum.
    double probability(std::uint32_t id) const {
        double p = prob_[id];
        for (std::size_t i = 0; i < prob_.size(); ++i)
            if (alias_[i] == id && prob_[i] < 1.0) p += 1.0 - prob_[i];
        return p / static_cast<double>(prob_.size());
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

class Vocabulary {
public:
    std::vector<std::string> words;      // dense id -> word
    std::vector<std::uint64_t> counts;   // id -> occurrence count
    std::uint64_t total_tokens = 0;      // sum of kept counts
    std::vector<double> keep_prob;       // subsampling keep probability
    AliasTable noise_table;              // unigram^0.75 sampler

    std::size_t size() const { return words.size(); }

    std::int64_t id_of(const std::string &w) const {
        auto it = index_.find(w);
        return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
    }

    std::uint32_t sample_noise(Rng &rng) const { return noise_table.sample(rng); }

    // Draw from the noise distribution, redrawing while the positive target
    // comes up. Requires at least two words.
    std::uint32_t sample_negative(Rng &rng, std::uint32_t exclude) const {
        for (;;) {
            std::uint32_t id = noise_table.sample(rng);
            if (id != exclude) return id;
        }
    }

    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < words.size(); ++i) index_[words[i]] = static_cast<std::uint32_t>(i);
    }

private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

// Counts the stream, drops words below min_count, assigns dense ids ordered
// by descending count (ties lexicographic) so rebuilds are bitwise
// reproducible, and precomputes keep probabilities and the noise table.
template <typename DocRange>
Vocabulary build_vocabulary(const DocRange &docs, std::uint64_t min_count, double subsample_t) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (subsample_t < 0.0) throw ConfigError("subsample_t must be >= 0");
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto &doc : docs)
        for (const auto &tok : doc.tokens) ++freq[tok];

    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(freq.size());
    for (auto &kv : freq)
        if (kv.second >= min_count) kept.emplace_back(kv.first, kv.second);
    if (kept.empty()) throw ConfigError("corpus too small: no word reaches min_count");
    std::sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.words.reserve(kept.size());
    v.counts.reserve(kept.size());
    for (auto &kv : kept) {
        v.words.push_back(std::move(kv.first));
        v.counts.push_back(kv.second);
        v.total_tokens += kv.second;
    }
    v.keep_prob.resize(v.size());
    std::vector<double> noise(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (subsample_t > 0.0) {
            double f = static_cast<double>(v.counts[i]) / static_cast<double>(v.total_tokens);
            v.keep_prob[i] = std::min(1.0, std::sqrt(subsample_t / f) + subsample_t / f);
        } else {
            v.keep_prob[i] = 1.0;
        }
        noise[i] = std::pow(static_cast<double>(v.counts[i]), 0.75);
    }
    v.noise_table = AliasTable(noise);
    v.rebuild_index();
    return v;
}

struct LabeledDataset {
    std::vector<NormalizedDocument> documents;
    std::string name;
    std::uint64_t positive_count = 0;
    std::uint64_t negative_count = 0;
    std::uint64_t dropped_empty = 0;  // lines whose text normalized to nothing
};

// TSV, one review per line: label TAB text; label in {pos,neg,1,0}.
inline LabeledDataset load_labeled_dataset(const std::string &path, const NormalizationRules &rules,
                                           std::string name = "") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("dataset file not found: " + path);
    LabeledDataset ds;
    ds.name = name.empty() ? path : std::move(name);
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t next_id = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!utf8::is_valid(line)) throw ParseError("dataset line is not valid UTF-8", line_no);
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("missing TAB separator", line_no);
        std::string label = line.substr(0, tab);
        Polarity pol;
        if (label == "pos" || label == "1")
            pol = Polarity::positive;
        else if (label == "neg" || label == "0")
            pol = Polarity::negative;
        else
            throw ParseError("unknown label '" + label + "'", line_no);
        NormalizedDocument doc;
        doc.tokens = tokenize(normalize(line.substr(tab + 1), rules), rules);
        if (doc.tokens.empty()) {
            ++ds.dropped_empty;
            continue;
        }
        doc.doc_id = next_id++;
        doc.label = pol;
        if (pol == Polarity::positive)
            ++ds.positive_count;
        else
            ++ds.negative_count;
        ds.documents.push_back(std::move(doc));
    }
    return ds;
}

inline void save_labeled_dataset(const LabeledDataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    for (const auto &doc : ds.documents) {
        out << (doc.label == Polarity::positive ? "pos" : "neg") << '\t';
        for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
            if (i) out << ' ';
            out << doc.tokens[i];
        }
        out << '\n';
    }
}

struct DatasetStats {
    std::uint64_t word_count = 0;
    std::uint64_t unique_word_count = 0;
    std::uint64_t positive = 0;
    std::uint64_t negative = 0;
};

inline DatasetStats dataset_stats(const LabeledDataset &ds) {
    DatasetStats s;
    std::unordered_map<std::string, bool> seen;
    for (const auto &doc : ds.documents) {
        s.word_count += doc.tokens.size();
        for (const auto &t : doc.tokens) seen.emplace(t, true);
        if (doc.label == Polarity::positive)
            ++s.positive;
        else
            ++s.negative;
    }
    s.unique_word_count = seen.size();
    return s;
}

// Background-corpus reader: one normalized document per line (the output of
// the `normalize` CLI). Empty lines are skipped.
inline std::vector<NormalizedDocument> load_corpus_file(const std::string &path,
                                                        std::uint64_t first_doc_id = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("corpus file not found: " + path);
    std::vector<NormalizedDocument> docs;
    std::string line;
    NormalizationRules no_rules;  // text is already normalized; plain split
    no_rules.stopwords.clear();
    std::uint64_t id = first_doc_id;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        NormalizedDocument doc;
        doc.doc_id = id++;
        doc.tokens = tokenize(line, no_rules);
        if (doc.tokens.empty()) continue;
        docs.push_back(std::move(doc));
    }
    return docs;
}

} // namespace pvec

#endif
