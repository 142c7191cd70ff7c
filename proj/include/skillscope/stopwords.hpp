#pragma once

#include <string_view>
#include <unordered_set>

namespace skillscope {

// Fixed English stopword list: the Snowball list plus the 26 single letters
// (single letters show up as fragments of possessives after punctuation
// splitting, e.g. "master's" -> "master", "s"). The same list is shipped as
// data/stopwords_en.txt; a test keeps the two in sync.
inline const std::unordered_set<std::string_view>& standard_stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m",
        "n", "o", "p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z",
        "about", "above", "after", "again", "against", "all", "am", "an", "and",
        "any", "are", "as", "at", "be", "because", "been", "before", "being",
        "below", "between", "both", "but", "by", "cannot", "could", "did", "do",
        "does", "doing", "down", "during", "each", "few", "for", "from",
        "further", "had", "has", "have", "having", "he", "her", "here", "hers",
        "herself", "him", "himself", "his", "how", "if", "in", "into", "is",
        "it", "its", "itself", "me", "more", "most", "my", "myself", "no",
        "nor", "not", "of", "off", "on", "once", "only", "or", "other",
        "ought", "our", "ours", "ourselves", "out", "over", "own", "same",
        "she", "should", "so", "some", "such", "than", "that", "the", "their",
        "theirs", "them", "themselves", "then", "there", "these", "they",
        "this", "those", "through", "to", "too", "under", "until", "up",
        "very", "was", "we", "were", "what", "when", "where", "which", "while",
        "who", "whom", "why", "with", "would", "you", "your", "yours",
        "yourself", "yourselves",
    };
    return words;
}

}  // namespace skillscope
