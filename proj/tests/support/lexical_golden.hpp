#pragma once

#include <string>
#include <utility>
#include <vector>

namespace testing_support {

using Tokens = std::vector<std::string>;

/// Sentences with lemma lists worked out by hand from the stopword list, the
/// irregular table and the suffix rules.
inline const std::vector<std::pair<std::string, Tokens>>& lexical_golden() {
    static const std::vector<std::pair<std::string, Tokens>> cases = {
        {"The charts are showing trends", {"chart", "show", "trend"}},
        {"the a an of", {}},
        {"Fabricate a line diagram", {"fabricate", "line", "diagram"}},
        {"Sales increased steadily between 2010 and 2020.", {"sale", "increase", "steadily", "2010", "2020"}},
        {"Which regions recorded the highest values?", {"region", "record", "highest", "value"}},
        {"Boxes and matches were moved quickly", {"box", "match", "move", "quickly"}},
        {"Plotting stopped after the bars were sorted by size", {"plot", "stop", "bar", "sort", "size"}},
        {"The mice ran through 3 categories", {"mouse", "run", "3", "category"}},
        {"Focused analyses compared features", {"focus", "analysis", "compare", "feature"}},
        {"Users are choosing colors for the axes", {"user", "choose", "color", "axis"}},
    };
    return cases;
}

/// Random sentence over a vocabulary of inflected words, stopwords, numbers,
/// punctuation and a non-ASCII word.
template <typename Rng>
std::string random_sentence(Rng& rng) {
    static const std::vector<std::string> words = {
        "The", "charts", "showing", "increased", "values", "of", "regions", "sorted", "boxes", "plotted",
        "mice", "2019", "axes", "are", "was", "highest", "trend", "categories", "labelled", "Data",
        "x-axis", "don't", "caf\xc3\xa9", "matches", "running", "stopped", "compared", "features", "size", "?"};
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 14);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s;
}

}  // namespace testing_support
