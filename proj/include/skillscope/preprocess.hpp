#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "skillscope/common.hpp"
#include "skillscope/csv.hpp"
#include "skillscope/stopwords.hpp"

#include <json.hpp>

namespace skillscope {

constexpr char kJoinChar = '_';

struct MergePhrase {
    std::vector<std::string> words;  // >= 2 lowercase words
    std::string joined;              // output token, no whitespace
};

struct PreprocessConfig {
    std::vector<MergePhrase> merge_phrases;            // applied longest-match-first
    std::map<std::string, std::string> singular_map;   // plural -> singular
    std::unordered_set<std::string> delete_words;      // exact tokens to drop
    bool use_standard_stopwords = true;
    bool strip_numbers = true;
    bool lowercase = true;
    std::uint32_t min_doc_freq = 1;

    void validate() const {
        for (const auto& mp : merge_phrases) {
            if (mp.words.size() < 2)
                throw DataError("merge phrase '" + mp.joined + "' has fewer than 2 words");
            if (mp.joined.find_first_of(" \t\r\n") != std::string::npos)
                throw DataError("merged token '" + mp.joined + "' contains whitespace");
            if (mp.joined.empty()) throw DataError("merge phrase with empty output token");
            if (singular_map.count(mp.joined))
                throw DataError("singular_map key '" + mp.joined + "' collides with a merge output");
        }
        for (const auto& w : delete_words)
            if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos)
                throw DataError("delete_words entries must be single tokens, got '" + w + "'");
        if (min_doc_freq < 1) throw DataError("min_doc_freq must be >= 1");
    }
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& phrase) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : phrase) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

inline std::string join_with(const std::vector<std::string>& words, char sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(sep);
        out += words[i];
    }
    return out;
}

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == kJoinChar;
}

// digits but no letters: "101", "3", "1_2"
inline bool is_numeric_token(const std::string& tok) {
    bool has_digit = false;
    for (char c : tok) {
        if (std::isalpha(static_cast<unsigned char>(c))) return false;
        if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
    }
    return has_digit;
}

}  // namespace detail

inline MergePhrase make_merge_phrase(const std::string& phrase) {
    MergePhrase mp;
    mp.words = detail::split_words(phrase);
    mp.joined = detail::join_with(mp.words, kJoinChar);
    return mp;
}

/// Rule-based tokenization: lowercase, split on anything that is not a
/// letter/digit/join character, merge declared phrases (longest match first,
/// before any deletion so that phrases built from stopwords still merge),
/// strip numeric tokens, map plurals to singulars, then drop deleted words
/// and, if enabled, standard stopwords.
inline std::vector<std::string> tokenize(const std::string& text, const PreprocessConfig& config) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char c : text)
        lowered.push_back(config.lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);

    std::vector<std::string> words;
    std::string cur;
    for (char c : lowered) {
        if (detail::is_word_char(c)) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));

    // phrase merging over the word stream, longest candidate first at each position
    std::vector<const MergePhrase*> by_length;
    by_length.reserve(config.merge_phrases.size());
    for (const auto& mp : config.merge_phrases) by_length.push_back(&mp);
    std::stable_sort(by_length.begin(), by_length.end(),
                     [](const MergePhrase* a, const MergePhrase* b) { return a->words.size() > b->words.size(); });

    std::vector<std::string> merged;
    merged.reserve(words.size());
    for (std::size_t pos = 0; pos < words.size();) {
        const MergePhrase* hit = nullptr;
        for (const MergePhrase* mp : by_length) {
            if (pos + mp->words.size() > words.size()) continue;
            bool match = true;
            for (std::size_t k = 0; k < mp->words.size(); ++k) {
                if (words[pos + k] != mp->words[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                hit = mp;
                break;
            }
        }
        if (hit) {
            merged.push_back(hit->joined);
            pos += hit->words.size();
        } else {
            merged.push_back(std::move(words[pos]));
            ++pos;
        }
    }

    std::vector<std::string> out;
    out.reserve(merged.size());
    for (auto& tok : merged) {
        if (config.strip_numbers && detail::is_numeric_token(tok)) continue;
        auto it = config.singular_map.find(tok);
        if (it != config.singular_map.end()) tok = it->second;
        if (config.delete_words.count(tok)) continue;
        if (config.use_standard_stopwords && standard_stopwords().count(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

class Vocabulary {
public:
    Vocabulary() = default;

    std::uint32_t size() const { return static_cast<std::uint32_t>(terms_.size()); }
    const std::string& term(std::uint32_t id) const { return terms_.at(id); }
    std::uint32_t doc_freq(std::uint32_t id) const { return doc_freq_.at(id); }
    std::uint64_t total_count() const { return total_count_; }
    const std::vector<std::string>& terms() const { return terms_; }

    bool contains(const std::string& term) const { return term_to_id_.count(term) != 0; }
    std::uint32_t id(const std::string& term) const {
        auto it = term_to_id_.find(term);
        if (it == term_to_id_.end()) throw DataError("term not in vocabulary: " + term);
        return it->second;
    }
    std::int64_t find(const std::string& term) const {
        auto it = term_to_id_.find(term);
        return it == term_to_id_.end() ? -1 : static_cast<std::int64_t>(it->second);
    }

    // Used by the model serializer to tie a model to the vocabulary it was fit on.
    std::string digest() const {
        std::uint64_t h = fnv1a("vocab");
        for (std::uint32_t i = 0; i < size(); ++i) {
            h = fnv1a(terms_[i], h);
            h = fnv1a("\t" + std::to_string(doc_freq_[i]) + "\n", h);
        }
        return hex_digest(h);
    }

    std::string to_tsv() const {
        std::string out;
        for (std::uint32_t i = 0; i < size(); ++i)
            out += terms_[i] + "\t" + std::to_string(i) + "\t" + std::to_string(doc_freq_[i]) + "\n";
        return out;
    }

    static Vocabulary from_tsv(const std::string& text) {
        Vocabulary v;
        for (const auto& line : split_lines(text)) {
            if (line.empty()) continue;
            auto t1 = line.find('\t');
            auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos)
                throw DataError("vocabulary tsv: malformed line '" + line + "'");
            std::string term = line.substr(0, t1);
            std::uint32_t id = static_cast<std::uint32_t>(std::stoul(line.substr(t1 + 1, t2 - t1 - 1)));
            std::uint32_t df = static_cast<std::uint32_t>(std::stoul(line.substr(t2 + 1)));
            if (id != v.terms_.size()) throw DataError("vocabulary tsv: ids must be dense and in order");
            v.terms_.push_back(term);
            v.doc_freq_.push_back(df);
            v.term_to_id_[v.terms_.back()] = id;
        }
        if (v.terms_.empty()) throw DataError("vocabulary tsv: no terms");
        return v;
    }

    friend Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>&, std::uint32_t);

private:
    std::vector<std::string> terms_;        // id -> term, lexicographic
    std::vector<std::uint32_t> doc_freq_;   // id -> document frequency
    std::unordered_map<std::string, std::uint32_t> term_to_id_;
    std::uint64_t total_count_ = 0;
};

/// Terms get ids in lexicographic order; terms below min_doc_freq are dropped.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::uint32_t min_doc_freq) {
    bool any_tokens = false;
    std::map<std::string, std::uint32_t> df;  // ordered -> lexicographic ids for free
    std::map<std::string, std::uint64_t> tf;
    for (const auto& tokens : docs) {
        if (tokens.empty()) continue;
        any_tokens = true;
        std::unordered_set<std::string> seen;
        for (const auto& tok : tokens) {
            ++tf[tok];
            if (seen.insert(tok).second) ++df[tok];
        }
    }
    if (!any_tokens) throw DataError("build_vocabulary: no tokens in any document");

    Vocabulary v;
    for (const auto& [term, freq] : df) {
        if (freq < min_doc_freq) continue;
        v.term_to_id_[term] = static_cast<std::uint32_t>(v.terms_.size());
        v.terms_.push_back(term);
        v.doc_freq_.push_back(freq);
        v.total_count_ += tf[term];
    }
    if (v.terms_.empty()) throw DataError("build_vocabulary: every term fell below min_doc_freq");
    return v;
}

struct BowEntry {
    std::uint32_t term_id = 0;
    std::uint32_t count = 0;
};

struct BowDocument {
    std::string doc_id;
    std::vector<BowEntry> entries;  // term ids strictly increasing
    std::uint64_t total = 0;        // N_d

    bool empty() const { return entries.empty(); }
};

/// Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped silently.
/// A document that ends up empty is legal here and excluded later by
/// build_bow_corpus with a warning.
inline BowDocument to_bow(const std::string& doc_id, const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    BowDocument bow;
    bow.doc_id = doc_id;
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& tok : tokens) {
        auto id = vocab.find(tok);
        if (id >= 0) ++counts[static_cast<std::uint32_t>(id)];
    }
    for (const auto& [id, c] : counts) {
        bow.entries.push_back({id, c});
        bow.total += c;
    }
    return bow;
}

struct BowCorpus {
    std::vector<BowDocument> documents;  // only non-empty documents, corpus order
    std::vector<Warning> flagged_empty;  // documents excluded because N_d = 0
};

inline BowCorpus build_bow_corpus(const std::vector<std::string>& doc_ids,
                                  const std::vector<std::vector<std::string>>& token_lists,
                                  const Vocabulary& vocab) {
    if (doc_ids.size() != token_lists.size()) throw DataError("build_bow_corpus: ids/token lists misaligned");
    BowCorpus corpus;
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
        BowDocument bow = to_bow(doc_ids[d], token_lists[d], vocab);
        if (bow.empty()) {
            corpus.flagged_empty.push_back({d, "document '" + doc_ids[d] + "' has no in-vocabulary tokens, excluded"});
        } else {
            corpus.documents.push_back(std::move(bow));
        }
    }
    return corpus;
}

struct TermCount {
    std::string term;
    std::uint64_t count = 0;
};

/// Corpus-wide term counts ("term frequency" table), descending, ties broken
/// lexicographically.
inline std::vector<TermCount> term_frequency_table(const std::vector<BowDocument>& docs, const Vocabulary& vocab) {
    if (docs.empty()) throw DataError("term_frequency_table: empty corpus");
    std::vector<std::uint64_t> counts(vocab.size(), 0);
    for (const auto& doc : docs)
        for (const auto& e : doc.entries) counts.at(e.term_id) += e.count;
    std::vector<TermCount> table;
    table.reserve(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) table.push_back({vocab.term(i), counts[i]});
    std::sort(table.begin(), table.end(), [](const TermCount& a, const TermCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.term < b.term;
    });
    return table;
}

// --- bow corpus file: one line per document, "doc_id term_id:count ..." ---

inline std::string bow_to_text(const std::vector<BowDocument>& docs) {
    std::string out;
    for (const auto& doc : docs) {
        if (doc.doc_id.find_first_of(" \t:\r\n") != std::string::npos)
            throw DataError("bow file: doc id '" + doc.doc_id + "' contains whitespace or ':'");
        out += doc.doc_id;
        for (const auto& e : doc.entries)
            out += " " + std::to_string(e.term_id) + ":" + std::to_string(e.count);
        out += "\n";
    }
    return out;
}

inline std::vector<BowDocument> bow_from_text(const std::string& text) {
    std::vector<BowDocument> docs;
    for (const auto& line : split_lines(text)) {
        if (line.empty()) continue;
        BowDocument doc;
        std::size_t pos = line.find(' ');
        doc.doc_id = line.substr(0, pos);
        if (doc.doc_id.empty()) throw DataError("bow file: line without doc id");
        std::uint32_t prev_id = 0;
        bool first = true;
        while (pos != std::string::npos) {
            std::size_t next = line.find(' ', pos + 1);
            std::string item = line.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
            if (!item.empty()) {
                auto colon = item.find(':');
                if (colon == std::string::npos) throw DataError("bow file: malformed entry '" + item + "'");
                std::uint32_t id = static_cast<std::uint32_t>(std::stoul(item.substr(0, colon)));
                std::uint32_t count = static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)));
                if (count == 0) throw DataError("bow file: zero count entry");
                if (!first && id <= prev_id) throw DataError("bow file: term ids must be strictly increasing");
                prev_id = id;
                first = false;
                doc.entries.push_back({id, count});
                doc.total += count;
            }
            pos = next;
        }
        if (doc.entries.empty()) throw DataError("bow file: empty document '" + doc.doc_id + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

// --- config file (JSON) ---

inline PreprocessConfig preprocess_config_from_json(const nlohmann::json& j) {
    PreprocessConfig cfg;
    if (j.contains("merge_phrases")) {
        for (const auto& item : j.at("merge_phrases")) {
            if (item.is_string()) {
                cfg.merge_phrases.push_back(make_merge_phrase(item.get<std::string>()));
            } else {
                MergePhrase mp;
                mp.words = detail::split_words(item.at("phrase").get<std::string>());
                mp.joined = item.at("token").get<std::string>();
                cfg.merge_phrases.push_back(std::move(mp));
            }
        }
    }
    if (j.contains("singular_map"))
        for (const auto& [k, v] : j.at("singular_map").items()) cfg.singular_map[k] = v.get<std::string>();
    if (j.contains("delete_words"))
        for (const auto& w : j.at("delete_words")) cfg.delete_words.insert(w.get<std::string>());
    if (j.contains("use_standard_stopwords")) cfg.use_standard_stopwords = j.at("use_standard_stopwords").get<bool>();
    if (j.contains("strip_numbers")) cfg.strip_numbers = j.at("strip_numbers").get<bool>();
    if (j.contains("lowercase")) cfg.lowercase = j.at("lowercase").get<bool>();
    if (j.contains("min_doc_freq")) {
        auto v = j.at("min_doc_freq").get<std::int64_t>();
        if (v < 1) throw DataError("min_doc_freq must be >= 1");
        cfg.min_doc_freq = static_cast<std::uint32_t>(v);
    }
    cfg.validate();
    return cfg;
}

inline PreprocessConfig load_preprocess_config(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(csv::read_file(path), nullptr, false);
    if (j.is_discarded()) throw DataError("preprocess config is not valid JSON: " + path);
    return preprocess_config_from_json(j);
}

}  // namespace skillscope
