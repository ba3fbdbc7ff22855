#ifndef PVEC_ARABIC_TEXT_HPP
#define PVEC_ARABIC_TEXT_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pvec/common.hpp"
#include "pvec/utf8.hpp"

namespace pvec {

enum class Polarity : std::uint8_t { negative = 0, positive = 1 };

struct NormalizationRules {
    bool strip_diacritics = true;   // U+064B..U+065F, U+0670
    bool strip_tatweel = true;      // U+0640
    bool unify_alef = true;         // آ أ إ -> ا
    bool unify_ya = true;           // ى -> ي
    bool unify_teh_marbuta = true;  // ة -> ه
    bool collapse_runs = true;
    std::uint32_t run_threshold = 3;  // runs of >= run_threshold identical letters collapse to 1
    bool drop_non_arabic = true;
    std::unordered_set<std::string> stopwords;  // already-normalized forms
};

struct NormalizedDocument {
    std::uint64_t doc_id = 0;
    std::vector<std::string> tokens;
    std::optional<Polarity> label;
};

namespace detail {

inline constexpr char32_t arabic_lo = 0x0621;
inline constexpr char32_t arabic_hi = 0x064A;

inline bool is_arabic_letter(char32_t cp) { return cp >= arabic_lo && cp <= arabic_hi; }

inline bool is_diacritic(char32_t cp) {
    return (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670;
}

} // namespace detail

// Canonical order: character mappings, diacritic/tatweel strip, non-Arabic
// deletion, run collapse, whitespace squeeze. The order is part of the
// contract; it makes the whole map idempotent.
inline std::string normalize(std::string_view text, const NormalizationRules &rules) {
    std::u32string cps = utf8::decode(text);
    std::u32string kept;
    kept.reserve(cps.size());
    for (char32_t cp : cps) {
        if (rules.unify_alef && (cp == 0x0622 || cp == 0x0623 || cp == 0x0625)) cp = 0x0627;
        if (rules.unify_ya && cp == 0x0649) cp = 0x064A;
        if (rules.unify_teh_marbuta && cp == 0x0629) cp = 0x0647;
        if (rules.strip_diacritics && detail::is_diacritic(cp)) continue;
        if (rules.strip_tatweel && cp == 0x0640) continue;
        if (rules.drop_non_arabic && !detail::is_arabic_letter(cp)) {
            // deletion must still separate words
            cp = U' ';
        }
        kept.push_back(cp);
    }
    if (rules.collapse_runs && rules.run_threshold >= 2) {
        std::u32string collapsed;
        collapsed.reserve(kept.size());
        std::size_t i = 0;
        while (i < kept.size()) {
            std::size_t j = i;
            while (j < kept.size() && kept[j] == kept[i]) ++j;
            std::size_t run = j - i;
            if (detail::is_arabic_letter(kept[i]) && run >= rules.run_threshold)
                collapsed.push_back(kept[i]);
            else
                collapsed.append(kept, i, run);
            i = j;
        }
        kept.swap(collapsed);
    }
    // squeeze whitespace to single spaces, trim ends
    std::u32string squeezed;
    squeezed.reserve(kept.size());
    bool pending_space = false;
    for (char32_t cp : kept) {
        bool ws = cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v';
        if (ws) {
            pending_space = !squeezed.empty();
        } else {
            if (pending_space) squeezed.push_back(U' ');
            pending_space = false;
            squeezed.push_back(cp);
        }
    }
    return utf8::encode(squeezed);
}

// Whitespace split of normalize() output, dropping stop words.
inline std::vector<std::string> tokenize(std::string_view normalized, const NormalizationRules &rules) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < normalized.size()) {
        while (i < normalized.size() && normalized[i] == ' ') ++i;
        std::size_t j = i;
        while (j < normalized.size() && normalized[j] != ' ') ++j;
        if (j > i) {
            std::string tok(normalized.substr(i, j - i));
            if (!rules.stopwords.contains(tok)) tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

// One word per line, '#' lines are comments. Words are normalized before
// insertion so matching happens post-normalization.
inline std::unordered_set<std::string> load_stopwords(const std::string &path,
                                                      const NormalizationRules &rules = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("stop-word file not found: " + path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!utf8::is_valid(line)) throw IoError("stop-word file is not valid UTF-8: " + path);
        if (line.empty() || line[0] == '#') continue;
        std::string w = normalize(line, rules);
        if (!w.empty()) out.insert(std::move(w));
    }
    return out;
}

} // namespace pvec

#endif
