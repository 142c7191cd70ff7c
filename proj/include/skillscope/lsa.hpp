#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "skillscope/math.hpp"
#include "skillscope/preprocess.hpp"

#include <json.hpp>

namespace skillscope {

struct LsaModel {
    int k = 0;
    int v = 0;
    VectorXd singular_values;  // length k, non-increasing
    MatrixXd loadings;         // k x V, unit-norm rows (right singular vectors)
    std::string vocab_digest;
};

inline MatrixXd term_frequency_matrix(const std::vector<BowDocument>& corpus, const Vocabulary& vocab) {
    MatrixXd a = MatrixXd::Zero(static_cast<int>(corpus.size()), static_cast<int>(vocab.size()));
    for (std::size_t d = 0; d < corpus.size(); ++d)
        for (const auto& e : corpus[d].entries) a(static_cast<int>(d), e.term_id) = static_cast<double>(e.count);
    return a;
}

/// Truncated SVD of the document-term count matrix. Dense decomposition:
/// corpora at this scale are a few thousand rows at most, and a direct solve
/// keeps the result deterministic.
inline LsaModel fit_lsa(const std::vector<BowDocument>& corpus, const Vocabulary& vocab, int k) {
    const int d = static_cast<int>(corpus.size());
    const int v = static_cast<int>(vocab.size());
    if (d == 0) throw DataError("fit_lsa: empty corpus");
    if (k < 1 || k > std::min(d, v))
        throw DataError("fit_lsa: k must satisfy 1 <= k <= min(documents, vocabulary) = " +
                        std::to_string(std::min(d, v)));

    MatrixXd a = term_frequency_matrix(corpus, vocab);
    Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinV);

    LsaModel model;
    model.k = k;
    model.v = v;
    model.vocab_digest = vocab.digest();
    model.singular_values = svd.singularValues().head(k);
    model.loadings.resize(k, v);
    for (int j = 0; j < k; ++j) {
        VectorXd row = svd.matrixV().col(j);
        // sign convention: the largest-magnitude entry (first index on ties) is positive
        int arg = 0;
        double best = -1.0;
        for (int w = 0; w < v; ++w) {
            double m = std::abs(row(w));
            if (m > best) {
                best = m;
                arg = w;
            }
        }
        if (row(arg) < 0.0) row = -row;
        model.loadings.row(j) = row.transpose();
    }
    return model;
}

struct LsaTerm {
    std::string term;
    double loading = 0.0;
};

/// Top-n terms per component by absolute loading, ties broken lexicographically.
inline std::vector<std::vector<LsaTerm>> lsa_top_terms(const LsaModel& model, const Vocabulary& vocab, int n) {
    if (n < 1 || n > model.v) throw DataError("lsa_top_terms: n out of range");
    std::vector<std::vector<LsaTerm>> out;
    out.reserve(model.k);
    for (int j = 0; j < model.k; ++j) {
        std::vector<int> idx(model.v);
        for (int w = 0; w < model.v; ++w) idx[w] = w;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            double ma = std::abs(model.loadings(j, a));
            double mb = std::abs(model.loadings(j, b));
            if (ma != mb) return ma > mb;
            return vocab.term(a) < vocab.term(b);
        });
        std::vector<LsaTerm> comp;
        comp.reserve(n);
        for (int r = 0; r < n; ++r) comp.push_back({vocab.term(idx[r]), model.loadings(j, idx[r])});
        out.push_back(std::move(comp));
    }
    return out;
}

inline nlohmann::json lsa_to_json(const LsaModel& model) {
    nlohmann::json j;
    j["model"] = "lsa";
    j["k"] = model.k;
    j["v"] = model.v;
    j["vocab_digest"] = model.vocab_digest;
    j["singular_values"] =
        std::vector<double>(model.singular_values.data(), model.singular_values.data() + model.k);
    std::vector<double> loadings;
    loadings.reserve(static_cast<std::size_t>(model.k) * model.v);
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) loadings.push_back(model.loadings(i, w));
    j["loadings"] = loadings;
    return j;
}

inline LsaModel lsa_from_json(const nlohmann::json& j) {
    if (j.value("model", "") != std::string("lsa")) throw DataError("model file is not an lsa model");
    LsaModel model;
    model.k = j.at("k").get<int>();
    model.v = j.at("v").get<int>();
    model.vocab_digest = j.value("vocab_digest", "");
    auto sv = j.at("singular_values").get<std::vector<double>>();
    auto loadings = j.at("loadings").get<std::vector<double>>();
    if (sv.size() != static_cast<std::size_t>(model.k) ||
        loadings.size() != static_cast<std::size_t>(model.k) * model.v)
        throw DataError("lsa model file: dimension mismatch");
    model.singular_values = Eigen::Map<VectorXd>(sv.data(), model.k);
    model.loadings.resize(model.k, model.v);
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) model.loadings(i, w) = loadings[static_cast<std::size_t>(i) * model.v + w];
    return model;
}

}  // namespace skillscope
