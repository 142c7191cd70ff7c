#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skillscope/common.hpp"
#include "skillscope/ctm.hpp"
#include "skillscope/preprocess.hpp"

namespace skillscope {

struct CoherenceResult {
    std::vector<double> per_topic;
    double mean = 0.0;
};

namespace coherence_detail {

// doc-presence bitmask per term, one bit per document
inline std::vector<std::uint64_t> presence_mask(const std::vector<BowDocument>& corpus, std::uint32_t term_id) {
    std::vector<std::uint64_t> mask((corpus.size() + 63) / 64, 0);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (const auto& e : corpus[d].entries) {
            if (e.term_id == term_id) {
                mask[d / 64] |= (std::uint64_t{1} << (d % 64));
                break;
            }
            if (e.term_id > term_id) break;  // entries sorted by term id
        }
    }
    return mask;
}

inline std::size_t popcount(const std::vector<std::uint64_t>& mask) {
    std::size_t n = 0;
    for (auto w : mask) n += static_cast<std::size_t>(__builtin_popcountll(w));
    return n;
}

inline std::size_t intersection_count(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(__builtin_popcountll(a[i] & b[i]));
    return n;
}

}  // namespace coherence_detail

/// UMass coherence: for each ordered pair of a topic's top words (the later
/// word against every earlier one), log[(D(w_i, w_j) + 1) / D(w_j)] with
/// document frequencies taken from the scoring corpus itself.
inline CoherenceResult umass_coherence(const std::vector<std::vector<std::string>>& top_words,
                                       const std::vector<BowDocument>& corpus, const Vocabulary& vocab,
                                       std::size_t top_n) {
    if (top_n < 2) throw DataError("umass_coherence: top_n must be >= 2");
    if (corpus.empty()) throw DataError("umass_coherence: empty corpus");

    CoherenceResult result;
    result.per_topic.reserve(top_words.size());
    double sum = 0.0;
    for (const auto& words : top_words) {
        std::size_t n = std::min(top_n, words.size());
        std::vector<std::vector<std::uint64_t>> masks(n);
        std::vector<std::size_t> df(n);
        for (std::size_t i = 0; i < n; ++i) {
            masks[i] = coherence_detail::presence_mask(corpus, vocab.id(words[i]));
            df[i] = coherence_detail::popcount(masks[i]);
            if (df[i] == 0) throw DataError("umass_coherence: top word '" + words[i] + "' appears in no document");
        }
        double score = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                std::size_t co = coherence_detail::intersection_count(masks[i], masks[j]);
                score += std::log(static_cast<double>(co + 1) / static_cast<double>(df[j]));
            }
        }
        result.per_topic.push_back(score);
        sum += score;
    }
    result.mean = top_words.empty() ? 0.0 : sum / static_cast<double>(top_words.size());
    return result;
}

struct CoherenceEntry {
    int k = 0;
    double mean_coherence = 0.0;
    std::vector<double> per_topic;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
};

struct CoherenceCurve {
    std::vector<CoherenceEntry> entries;  // k strictly increasing
    int k_min = 0;
    int k_max = 0;
};

/// Fits one CTM per K in [k_min, k_max] (seed offset by K) and scores each
/// topic's top-10 words by UMass coherence. A failed fit flags its entry and
/// the scan continues.
inline CoherenceCurve scan_k(const std::vector<BowDocument>& corpus, const Vocabulary& vocab, int k_min, int k_max,
                             const ModelConfig& base_config, const FitOptions& options = {},
                             const std::function<void(const CoherenceEntry&)>& on_entry = {}) {
    if (k_min < 2 || k_min >= k_max || k_max > static_cast<int>(vocab.size()))
        throw DataError("scan_k: need 2 <= k_min < k_max <= vocabulary size");
    CoherenceCurve curve;
    curve.k_min = k_min;
    curve.k_max = k_max;
    for (int k = k_min; k <= k_max; ++k) {
        CoherenceEntry entry;
        entry.k = k;
        entry.seed = base_config.seed + static_cast<std::uint64_t>(k);
        try {
            ModelConfig config = base_config;
            config.k = k;
            config.seed = entry.seed;
            CtmModel model = fit_ctm(corpus, vocab, config, options);
            int top_n = std::min(10, model.v);
            auto tops = topic_top_words(model, vocab, top_n);
            std::vector<std::vector<std::string>> words(tops.size());
            for (std::size_t i = 0; i < tops.size(); ++i)
                for (const auto& t : tops[i]) words[i].push_back(t.term);
            auto coh = umass_coherence(words, corpus, vocab, static_cast<std::size_t>(top_n));
            entry.mean_coherence = coh.mean;
            entry.per_topic = coh.per_topic;
            entry.ok = true;
        } catch (const std::exception& e) {
            entry.ok = false;
            entry.error = e.what();
        }
        if (on_entry) on_entry(entry);
        curve.entries.push_back(std::move(entry));
    }
    return curve;
}

inline std::string scan_csv(const CoherenceCurve& curve) {
    std::string out = "k,mean_coherence,seed,status\n";
    for (const auto& e : curve.entries) {
        out += std::to_string(e.k) + ",";
        out += e.ok ? format_double(e.mean_coherence) : std::string("nan");
        out += "," + std::to_string(e.seed) + ",";
        out += e.ok ? "ok" : "failed";
        out += "\n";
    }
    return out;
}

inline CoherenceCurve scan_from_csv(const std::string& text) {
    CoherenceCurve curve;
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "k,mean_coherence,seed,status")
        throw DataError("scan csv: bad header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            auto comma = lines[i].find(',', start);
            cells.push_back(lines[i].substr(start, comma == std::string::npos ? comma : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 4) throw DataError("scan csv: malformed line " + std::to_string(i + 1));
        CoherenceEntry e;
        e.k = std::stoi(cells[0]);
        e.ok = cells[3] == "ok";
        e.mean_coherence = e.ok ? std::stod(cells[1]) : 0.0;
        e.seed = std::stoull(cells[2]);
        curve.entries.push_back(std::move(e));
    }
    if (!curve.entries.empty()) {
        curve.k_min = curve.entries.front().k;
        curve.k_max = curve.entries.back().k;
    }
    return curve;
}

struct ElbowResult {
    int k_elbow = 0;
    int k_argmax = 0;
};

/// k_argmax: K with the best mean score (smaller K on ties). k_elbow: K
/// maximizing |s(K-1) - 2 s(K) + s(K+1)| after 3-point moving-average
/// smoothing (edge windows truncated), restricted to the improving segment
/// up to the argmax; ties again go to the smaller K.
inline ElbowResult detect_elbow(const CoherenceCurve& curve) {
    std::vector<const CoherenceEntry*> ok;
    for (const auto& e : curve.entries)
        if (e.ok) ok.push_back(&e);
    const std::size_t n = ok.size();
    if (n < 4) throw DataError("detect_elbow: need at least 4 successful scan points");

    ElbowResult result;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto* e : ok) {
        if (e->mean_coherence > best) {
            best = e->mean_coherence;
            result.k_argmax = e->k;
        }
    }

    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = ok[i]->mean_coherence;
        double cnt = 1.0;
        if (i > 0) {
            acc += ok[i - 1]->mean_coherence;
            cnt += 1.0;
        }
        if (i + 1 < n) {
            acc += ok[i + 1]->mean_coherence;
            cnt += 1.0;
        }
        smooth[i] = acc / cnt;
    }

    auto pick = [&](bool restrict_to_improving) {
        double best_mag = -1.0;
        int best_k = 0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (restrict_to_improving && ok[i]->k > result.k_argmax) continue;
            double d = smooth[i - 1] - 2.0 * smooth[i] + smooth[i + 1];
            double mag = std::abs(d);
            if (mag > best_mag) {
                best_mag = mag;
                best_k = ok[i]->k;
            }
        }
        return best_k;
    };
    int k_elbow = pick(true);
    if (k_elbow == 0) k_elbow = pick(false);
    result.k_elbow = k_elbow;
    return result;
}

}  // namespace skillscope
