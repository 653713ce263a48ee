#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

/// Splits on non-word characters (bytes >= 0x80 count as word characters)
/// and lowercases ASCII letters.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

/// Irregular-form lookup, then suffix rules (plural -s/-es/-ies, -ed/-ing with
/// doubled-consonant undo and silent-e restore) repeated until nothing changes.
std::string lemmatize(std::string_view token);

/// Tokenize, drop stopwords, lemmatize, and drop lemmas that are stopwords.
std::vector<std::string> normalize_text(std::string_view text);
std::vector<std::vector<std::string>> normalize_tokens(const std::vector<std::string>& texts, unsigned threads = 0);

struct LexiconStats {
    std::size_t total_tokens = 0;
    std::size_t unique_tokens = 0;
    std::map<std::string, std::size_t> frequency;

    friend bool operator==(const LexiconStats&, const LexiconStats&) = default;
};

LexiconStats lexicon_stats(const std::vector<std::vector<std::string>>& token_lists);

struct VocabDiff {
    std::vector<std::string> only_in_a;
    std::vector<std::string> only_in_b;
    std::vector<std::string> shared;
};

VocabDiff vocab_diff(const LexiconStats& a, const LexiconStats& b);

/// `token,count` rows, most frequent first, ties alphabetical.
std::string lexicon_csv(const LexiconStats& s);

}  // namespace chartnl
