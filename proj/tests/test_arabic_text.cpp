#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "pvec/arabic_text.hpp"
#include "pvec/utf8.hpp"

#include "golden_arabic.hpp"

using namespace pvec;

namespace {

} // namespace

TEST_CASE("normalize golden suite") {
    NormalizationRules rules;
    for (const auto &g : pvec_tests::golden_pairs) {
        INFO("input: " << g.input);
        CHECK(normalize(g.input, rules) == g.expected);
    }
}

TEST_CASE("normalize is idempotent and closed over Arabic letters + space") {
    NormalizationRules rules;
    Rng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const std::string s = pvec_tests::random_unicode_string(rng);
        const std::string once = normalize(s, rules);
        CHECK(normalize(once, rules) == once);
        for (char32_t cp : utf8::decode(once)) {
            const bool ok = cp == U' ' || (cp >= 0x0621 && cp <= 0x064A);
            if (!ok) {
                INFO("input: " << s << " output cp: " << static_cast<std::uint32_t>(cp));
                CHECK(ok);
            }
        }
    }
}

TEST_CASE("normalize is deterministic") {
    NormalizationRules rules;
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::string s = pvec_tests::random_unicode_string(rng);
        CHECK(normalize(s, rules) == normalize(s, rules));
    }
}

TEST_CASE("no output token contains a run of r identical letters") {
    NormalizationRules rules;
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const std::string out = normalize(pvec_tests::random_unicode_string(rng), rules);
        const auto cps = utf8::decode(out);
        std::size_t run = 1;
        for (std::size_t j = 1; j < cps.size(); ++j) {
            run = cps[j] == cps[j - 1] ? run + 1 : 1;
            CHECK(run < rules.run_threshold);
        }
    }
}

TEST_CASE("run threshold is configurable") {
    NormalizationRules rules;
    rules.run_threshold = 4;
    CHECK(normalize("ههه", rules) == "ههه");
    CHECK(normalize("هههه", rules) == "ه");
}

TEST_CASE("unify flags can be switched off") {
    NormalizationRules rules;
    rules.unify_ya = false;
    rules.unify_teh_marbuta = false;
    CHECK(normalize("مصطفى", rules) == "مصطفى");
    CHECK(normalize("مدرسة", rules) == "مدرسة");
}

TEST_CASE("tokenize splits on whitespace and drops stop words") {
    NormalizationRules rules;
    CHECK(tokenize("احمد جميل", rules) == std::vector<std::string>{"احمد", "جميل"});
    CHECK(tokenize("", rules).empty());
    rules.stopwords = {"من"};
    CHECK(tokenize("من جميل", rules) == std::vector<std::string>{"جميل"});
}

TEST_CASE("load_stopwords reads, normalizes and deduplicates") {
    const std::string path = "tmp_stopwords.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "من\nفي\n";
    }
    auto sw = load_stopwords(path);
    CHECK(sw == std::unordered_set<std::string>{"من", "في"});

    {
        std::ofstream out(path, std::ios::binary);
        out << "# comment\nمن\n";
    }
    CHECK(load_stopwords(path) == std::unordered_set<std::string>{"من"});

    {
        std::ofstream out(path, std::ios::binary);
        out << "أن\n";
    }
    CHECK(load_stopwords(path) == std::unordered_set<std::string>{"ان"});

    // every stop word is a fixed point of normalization
    NormalizationRules rules;
    for (const auto &w : load_stopwords(path)) CHECK(normalize(w, rules) == w);
}

TEST_CASE("load_stopwords error paths") {
    CHECK_THROWS_AS(load_stopwords("does_not_exist.txt"), ConfigError);
    const std::string path = "tmp_stopwords_bad.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "\xC3\x28\n";  // invalid UTF-8
    }
    CHECK_THROWS_AS(load_stopwords(path), IoError);
}
