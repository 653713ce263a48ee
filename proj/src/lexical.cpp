#include "chartnl/lexical.hpp"

#include "chartnl/csv.hpp"
#include "chartnl/resources.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace chartnl {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> s;
        for (const auto& line : resource_lines("stopwords_en.txt")) s.insert(to_lower_ascii(trim(line)));
        return s;
    }();
    return words;
}

const std::unordered_map<std::string, std::string>& irregular() {
    static const std::unordered_map<std::string, std::string> table = [] {
        std::unordered_map<std::string, std::string> t;
        for (const auto& line : resource_lines("lemma_irregular.tsv")) {
            auto parts = split(line, '\t');
            if (parts.size() != 2) continue;
            std::string lemma(trim(parts[1]));
            t[std::string(trim(parts[0]))] = lemma;
            t[lemma] = lemma;
        }
        return t;
    }();
    return table;
}

bool is_consonant(const std::string& w, std::size_t i) {
    switch (w[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u': return false;
        case 'y': return i == 0 || !is_consonant(w, i - 1);
        default: return true;
    }
}

// Number of vowel-consonant sequences in w (the classic stemmer "measure").
int measure(const std::string& w) {
    int m = 0;
    std::size_t i = 0;
    const std::size_t n = w.size();
    while (i < n && is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !is_consonant(w, i)) ++i;
        if (i >= n) break;
        while (i < n && is_consonant(w, i)) ++i;
        ++m;
    }
    return m;
}

bool has_vowel(const std::string& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

bool ends_double_consonant(const std::string& w) {
    const std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// consonant-vowel-consonant ending, last consonant not w, x or y.
bool ends_cvc(const std::string& w) {
    const std::size_t n = w.size();
    if (n < 3) return false;
    if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
    const char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool is_ascii_alpha(const std::string& w) {
    return std::all_of(w.begin(), w.end(), [](unsigned char c) { return c >= 'a' && c <= 'z'; });
}

bool is_vowel_at(const std::string& w, std::size_t i) { return !is_consonant(w, i); }

// Stem endings that usually lost a silent e before -ed/-ing:
// increas(e), clos(e), produc(e), mov(e), merg(e), valu(e), featur(e), compar(e), requir(e).
bool needs_silent_e(const std::string& s) {
    const std::size_t n = s.size();
    if (n < 3) return false;
    const char last = s[n - 1];
    const char prev = s[n - 2];
    switch (last) {
        case 's':
            if (!is_vowel_at(s, n - 2)) return false;
            // bias, focus, revis keep their bare form.
            return !(is_consonant(s, n - 3) && (prev == 'a' || prev == 'i' || prev == 'u'));
        case 'c': return is_vowel_at(s, n - 2) || prev == 'n';
        case 'v': return true;
        case 'z': return is_vowel_at(s, n - 2);
        case 'g': return prev == 'r' || prev == 'd';
        case 'u': return true;
        case 'r': return (prev == 'u' || prev == 'a' || prev == 'i') && is_consonant(s, n - 3);
        default: return false;
    }
}

std::string fix_stem(std::string stem) {
    if (stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz")) return stem + "e";
    if (ends_double_consonant(stem)) {
        const char c = stem.back();
        if (c != 'l' && c != 's' && c != 'z') stem.pop_back();
        return stem;
    }
    if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
    if (measure(stem) >= 1 && needs_silent_e(stem)) return stem + "e";
    return stem;
}

std::string apply_rules(const std::string& w) {
    if (w.size() <= 3 || !is_ascii_alpha(w)) return w;
    if (w.ends_with("sses")) return w.substr(0, w.size() - 2);
    if (w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
    if (w.ends_with("xes") || w.ends_with("ches") || w.ends_with("shes")) return w.substr(0, w.size() - 2);
    if (w.size() > 5 && w.ends_with("uses") && is_consonant(w, w.size() - 5)) return w.substr(0, w.size() - 2);
    if (w.ends_with("eed")) {
        std::string stem = w.substr(0, w.size() - 3);
        return measure(stem) > 0 ? stem + "ee" : w;
    }
    if (w.ends_with("ed")) {
        std::string stem = w.substr(0, w.size() - 2);
        return has_vowel(stem) ? fix_stem(stem) : w;
    }
    if (w.ends_with("ing")) {
        std::string stem = w.substr(0, w.size() - 3);
        return has_vowel(stem) && stem.size() >= 2 ? fix_stem(stem) : w;
    }
    if (w.ends_with("s") && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is"))
        return w.substr(0, w.size() - 1);
    return w;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_char(c) && c != '_') {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

bool is_stopword(std::string_view token) { return stopwords().contains(std::string(token)); }

std::string lemmatize(std::string_view token) {
    std::string w(token);
    for (int guard = 0; guard < 16; ++guard) {
        if (auto it = irregular().find(w); it != irregular().end()) return it->second;
        std::string next = apply_rules(w);
        if (next == w) return w;
        w = std::move(next);
    }
    return w;
}

std::vector<std::string> normalize_text(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (is_stopword(tok)) continue;
        std::string lemma = lemmatize(tok);
        if (lemma.empty() || is_stopword(lemma)) continue;
        out.push_back(std::move(lemma));
    }
    return out;
}

std::vector<std::vector<std::string>> normalize_tokens(const std::vector<std::string>& texts, unsigned threads) {
    std::vector<std::vector<std::string>> out(texts.size());
    stopwords();
    irregular();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (texts.size() < 256 || threads == 1) {
        for (std::size_t i = 0; i < texts.size(); ++i) out[i] = normalize_text(texts[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < texts.size(); i = next++) out[i] = normalize_text(texts[i]);
        });
    pool.clear();
    return out;
}

LexiconStats lexicon_stats(const std::vector<std::vector<std::string>>& token_lists) {
    LexiconStats s;
    for (const auto& list : token_lists)
        for (const auto& t : list) {
            ++s.frequency[t];
            ++s.total_tokens;
        }
    s.unique_tokens = s.frequency.size();
    return s;
}

VocabDiff vocab_diff(const LexiconStats& a, const LexiconStats& b) {
    VocabDiff d;
    for (const auto& [t, n] : a.frequency) (b.frequency.contains(t) ? d.shared : d.only_in_a).push_back(t);
    for (const auto& [t, n] : b.frequency)
        if (!a.frequency.contains(t)) d.only_in_b.push_back(t);
    return d;
}

std::string lexicon_csv(const LexiconStats& s) {
    std::vector<std::pair<std::string, std::size_t>> rows(s.frequency.begin(), s.frequency.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    std::vector<CsvRow> body;
    for (const auto& [t, n] : rows) body.push_back({t, std::to_string(n)});
    return write_csv({"token", "count"}, body);
}

}  // namespace chartnl
