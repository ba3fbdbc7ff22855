// Shared test fixture: a two-topic corpus over disjoint 50-word vocabularies.
// Words are two-letter Arabic strings that are fixed points of normalization,
// so the same corpus works through the full pipeline (TSV -> normalize ->
// vocabulary -> training).
#ifndef PVEC_TESTS_SYNTHETIC_HPP
#define PVEC_TESTS_SYNTHETIC_HPP

#include <fstream>
#include <string>
#include <vector>

#include "pvec/common.hpp"
#include "pvec/corpus.hpp"

namespace pvec_tests {

inline std::vector<std::string> topic_vocabulary(bool topic_a) {
    static const std::vector<std::string> first_a = {"ب", "ت", "ث", "ج",
                                                     "ح"};  // b t th j H
    static const std::vector<std::string> first_b = {"س", "ش", "ص", "ض",
                                                     "ط"};  // s sh S D T
    static const std::vector<std::string> second = {"د", "ذ", "ر", "ز",
                                                    "و", "ف", "ق", "ك",
                                                    "ل", "م"};  // d dh r z w f q k l m
    const auto &first = topic_a ? first_a : first_b;
    std::vector<std::string> words;
    for (const auto &f : first)
        for (const auto &s : second) words.push_back(f + s);
    return words;  // 50 words
}

// 1000 documents per topic by default, 20-40 tokens each, topic A labeled
// positive.
inline pvec::LabeledDataset make_synthetic_dataset(std::uint64_t seed = 42,
                                                   std::size_t docs_per_topic = 1000) {
    const auto vocab_a = topic_vocabulary(true);
    const auto vocab_b = topic_vocabulary(false);
    pvec::Rng rng(seed);
    pvec::LabeledDataset ds;
    ds.name = "synthetic";
    std::uint64_t id = 0;
    for (std::size_t d = 0; d < docs_per_topic * 2; ++d) {
        const bool topic_a = d % 2 == 0;
        const auto &vocab = topic_a ? vocab_a : vocab_b;
        pvec::NormalizedDocument doc;
        doc.doc_id = id++;
        doc.label = topic_a ? pvec::Polarity::positive : pvec::Polarity::negative;
        const std::size_t len = 20 + static_cast<std::size_t>(rng.bounded(21));
        for (std::size_t t = 0; t < len; ++t)
            doc.tokens.push_back(vocab[static_cast<std::size_t>(rng.bounded(vocab.size()))]);
        if (topic_a)
            ++ds.positive_count;
        else
            ++ds.negative_count;
        ds.documents.push_back(std::move(doc));
    }
    return ds;
}

inline void write_dataset_tsv(const pvec::LabeledDataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    for (const auto &doc : ds.documents) {
        out << (doc.label == pvec::Polarity::positive ? "pos" : "neg") << '\t';
        for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
            if (i) out << ' ';
            out << doc.tokens[i];
        }
        out << '\n';
    }
}

} // namespace pvec_tests

#endif
