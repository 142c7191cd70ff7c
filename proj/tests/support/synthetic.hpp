#pragma once

// Seeded generator for corpora with known ground truth. This is the oracle
// for the recovery tests: it samples documents from explicit (beta, mu, sigma)
// and never touches the fitting code.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "skillscope/math.hpp"
#include "skillscope/preprocess.hpp"
#include "skillscope/rng.hpp"

namespace skillscope::testing {

inline std::string padded_name(const char* prefix, int i, int width = 4) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
    return buf;
}

// vocabulary of v terms named t0000..; zero padding keeps lexicographic ids
// aligned with the numeric order
inline Vocabulary make_vocab(int v) {
    std::vector<std::string> tokens;
    tokens.reserve(v);
    for (int w = 0; w < v; ++w) tokens.push_back(padded_name("t", w));
    return build_vocabulary({tokens}, 1);
}

struct SyntheticCtm {
    MatrixXd beta;   // true topic-word rows
    VectorXd mu;
    MatrixXd sigma;
    Vocabulary vocab;
    std::vector<BowDocument> corpus;
};

// Block-structured topics: topic i puts Zipf-decaying mass on its own slice of
// the vocabulary plus a uniform floor, so topics are distinct but overlapping.
inline MatrixXd block_topics(int k, int v) {
    MatrixXd beta(k, v);
    for (int i = 0; i < k; ++i) {
        int begin = v * i / k;
        int end = v * (i + 1) / k;
        for (int w = 0; w < v; ++w) beta(i, w) = 0.05 / static_cast<double>(v);
        for (int w = begin; w < end; ++w) beta(i, w) += 1.0 / static_cast<double>(1 + w - begin);
        beta.row(i) /= beta.row(i).sum();
    }
    return beta;
}

inline SyntheticCtm generate_ctm_corpus(int k, int v, int docs, int mean_doc_len, const MatrixXd& sigma,
                                        std::uint64_t seed) {
    SyntheticCtm data;
    data.beta = block_topics(k, v);
    data.mu = VectorXd::Zero(k);
    data.sigma = sigma;
    data.vocab = make_vocab(v);

    Eigen::LLT<MatrixXd> llt(sigma);
    MatrixXd chol = llt.matrixL();
    std::vector<VectorXd> topic_rows(k);  // contiguous copies for sampling
    for (int i = 0; i < k; ++i) topic_rows[i] = data.beta.row(i).transpose();
    Rng rng(seed);
    for (int d = 0; d < docs; ++d) {
        VectorXd z(k);
        for (int i = 0; i < k; ++i) z(i) = rng.normal();
        VectorXd eta = data.mu + chol * z;
        VectorXd theta = softmax(eta);

        int len = mean_doc_len / 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(mean_doc_len) + 1));
        if (len < 1) len = 1;
        std::map<std::uint32_t, std::uint32_t> counts;
        for (int n = 0; n < len; ++n) {
            std::size_t topic = rng.discrete(std::span<const double>(theta.data(), static_cast<std::size_t>(k)));
            const VectorXd& row = topic_rows[topic];
            std::size_t word = rng.discrete(std::span<const double>(row.data(), static_cast<std::size_t>(v)));
            ++counts[static_cast<std::uint32_t>(word)];
        }
        BowDocument bow;
        bow.doc_id = padded_name("d", d);
        for (const auto& [id, c] : counts) {
            bow.entries.push_back({id, c});
            bow.total += c;
        }
        data.corpus.push_back(std::move(bow));
    }
    return data;
}

// greedy max-cosine assignment of fitted rows to true rows; returns the mean
// of the matched cosines, and the permutation true row -> fitted row
inline double greedy_matched_cosine(const MatrixXd& true_beta, const MatrixXd& fitted_beta,
                                    std::vector<int>* assignment_out = nullptr) {
    const int k = static_cast<int>(true_beta.rows());
    MatrixXd cos(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double denom = true_beta.row(i).norm() * fitted_beta.row(j).norm();
            cos(i, j) = denom > 0 ? true_beta.row(i).dot(fitted_beta.row(j)) / denom : 0.0;
        }
    }
    std::vector<bool> used_true(k, false), used_fit(k, false);
    std::vector<int> assignment(k, -1);
    double total = 0.0;
    for (int pick = 0; pick < k; ++pick) {
        double best = -2.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < k; ++i) {
            if (used_true[i]) continue;
            for (int j = 0; j < k; ++j) {
                if (used_fit[j]) continue;
                if (cos(i, j) > best) {
                    best = cos(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        used_true[bi] = used_fit[bj] = true;
        assignment[bi] = bj;
        total += best;
    }
    if (assignment_out) *assignment_out = assignment;
    return total / static_cast<double>(k);
}

// random small corpus for property tests; every doc non-empty
inline std::vector<BowDocument> random_corpus(Rng& rng, int docs, int v, int max_distinct, int max_count) {
    std::vector<BowDocument> corpus;
    for (int d = 0; d < docs; ++d) {
        BowDocument bow;
        bow.doc_id = padded_name("r", d);
        int distinct = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_distinct)));
        std::map<std::uint32_t, std::uint32_t> counts;
        for (int u = 0; u < distinct; ++u) {
            std::uint32_t id = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(v)));
            std::uint32_t c = 1 + static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(max_count)));
            counts[id] += c;
        }
        for (const auto& [id, c] : counts) {
            bow.entries.push_back({id, c});
            bow.total += c;
        }
        corpus.push_back(std::move(bow));
    }
    return corpus;
}

}  // namespace skillscope::testing
