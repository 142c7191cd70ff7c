#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skillscope/math.hpp"
#include "skillscope/model_config.hpp"
#include "skillscope/parallel.hpp"
#include "skillscope/preprocess.hpp"
#include "skillscope/rng.hpp"

#include <json.hpp>

namespace skillscope {

struct LdaDiagnostics {
    double final_elbo = 0.0;
    int em_iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> elbo_trace;
};

struct LdaModel {
    int k = 0;
    int v = 0;
    MatrixXd beta;    // K x V, rows on the simplex
    VectorXd alpha;   // Dirichlet parameter, > 0
    LdaDiagnostics diagnostics;
    std::string vocab_digest;
};

struct LdaOptions {
    double alpha = 0.0;        // symmetric value; <= 0 means the 1/K default
    bool update_alpha = false; // Newton update of the symmetric alpha (off by default)
    int threads = 0;
};

namespace lda_detail {

struct DocResult {
    double bound = 0.0;
    double elog_theta_sum = 0.0;  // sum_i E[log theta_i], for the alpha update
};

// Coordinate ascent on (phi, gamma) for one document; gamma is carried across
// EM iterations so every E-step starts from the previous optimum.
inline DocResult infer_lda_doc(const MatrixXd& log_beta, const VectorXd& alpha, const BowDocument& doc,
                               VectorXd& gamma, MatrixXd& phi, const ModelConfig& config) {
    const int k = static_cast<int>(alpha.size());
    const int terms = static_cast<int>(doc.entries.size());
    double alpha_sum = alpha.sum();
    double prev_bound = -std::numeric_limits<double>::infinity();
    double bound = prev_bound;

    VectorXd elog(k);
    for (int sweep = 0; sweep < config.inner_max_iters; ++sweep) {
        double dg_sum = digamma(gamma.sum());
        for (int i = 0; i < k; ++i) elog(i) = digamma(gamma(i)) - dg_sum;

        VectorXd gamma_new = alpha;
        for (int u = 0; u < terms; ++u) {
            const auto& e = doc.entries[u];
            double m = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < k; ++i) {
                phi(u, i) = elog(i) + log_beta(i, e.term_id);
                m = std::max(m, phi(u, i));
            }
            double z = 0.0;
            for (int i = 0; i < k; ++i) {
                phi(u, i) = std::exp(phi(u, i) - m);
                z += phi(u, i);
            }
            for (int i = 0; i < k; ++i) {
                phi(u, i) /= z;
                gamma_new(i) += static_cast<double>(e.count) * phi(u, i);
            }
        }
        gamma = gamma_new;

        // bound with the refreshed gamma
        double gsum = gamma.sum();
        dg_sum = digamma(gsum);
        bound = std::lgamma(alpha_sum) - std::lgamma(gsum);
        for (int i = 0; i < k; ++i) {
            elog(i) = digamma(gamma(i)) - dg_sum;
            bound += -std::lgamma(alpha(i)) + (alpha(i) - 1.0) * elog(i);
            bound += std::lgamma(gamma(i)) - (gamma(i) - 1.0) * elog(i);
        }
        for (int u = 0; u < terms; ++u) {
            const auto& e = doc.entries[u];
            double c = static_cast<double>(e.count);
            for (int i = 0; i < k; ++i) {
                double p = phi(u, i);
                if (p > 0.0) bound += c * p * (elog(i) + log_beta(i, e.term_id) - std::log(p));
            }
        }
        if (sweep > 0 && bound - prev_bound < config.inner_tol * std::max(1.0, std::abs(prev_bound))) break;
        prev_bound = bound;
    }
    DocResult r;
    r.bound = bound;
    double dg_sum = digamma(gamma.sum());
    for (int i = 0; i < k; ++i) r.elog_theta_sum += digamma(gamma(i)) - dg_sum;
    return r;
}

// Symmetric alpha Newton step in log space (keeps alpha > 0).
inline double update_symmetric_alpha(double alpha, int k, std::size_t docs, double elog_sum) {
    double d = static_cast<double>(docs);
    for (int iter = 0; iter < 100; ++iter) {
        double x = std::log(alpha);
        double grad = d * k * (digamma(k * alpha) - digamma(alpha)) + elog_sum;
        double hess = d * k * k * trigamma(k * alpha) - d * k * trigamma(alpha);
        double step = grad * alpha / (hess * alpha * alpha + grad * alpha);  // Newton in log alpha
        if (!std::isfinite(step)) break;
        x -= step;
        double next = std::exp(x);
        if (!std::isfinite(next) || next <= 1e-10) break;
        if (std::abs(next - alpha) < 1e-10 * alpha) {
            alpha = next;
            break;
        }
        alpha = next;
    }
    return alpha;
}

}  // namespace lda_detail

/// Variational EM for LDA over bag-of-words documents. Used both as a
/// baseline and as a warm start for the correlated model.
inline LdaModel fit_lda(const std::vector<BowDocument>& corpus, const Vocabulary& vocab, const ModelConfig& config,
                        const LdaOptions& options = {}) {
    config.validate();
    const int k = config.k;
    const int v = static_cast<int>(vocab.size());
    if (corpus.empty()) throw DataError("fit_lda: empty corpus");
    if (corpus.size() < 2) throw DataError("fit_lda: need at least 2 documents");
    if (k > v) throw NumericError("fit_lda: k exceeds vocabulary size");
    for (const auto& doc : corpus) {
        if (doc.total == 0) throw DataError("fit_lda: document '" + doc.doc_id + "' is empty");
        for (const auto& e : doc.entries)
            if (e.term_id >= static_cast<std::uint32_t>(v))
                throw DataError("fit_lda: term id out of vocabulary range in '" + doc.doc_id + "'");
    }

    const std::size_t d = corpus.size();
    LdaModel model;
    model.k = k;
    model.v = v;
    model.vocab_digest = vocab.digest();
    model.diagnostics.seed = config.seed;

    Rng rng(config.seed);
    model.beta = random_topic_matrix(k, v, rng);
    double alpha0 = options.alpha > 0.0 ? options.alpha : 1.0 / static_cast<double>(k);
    model.alpha = VectorXd::Constant(k, alpha0);

    // warm-started per-document gamma
    std::vector<VectorXd> gammas(d);
    for (std::size_t i = 0; i < d; ++i)
        gammas[i] = model.alpha.array() + static_cast<double>(corpus[i].total) / static_cast<double>(k);

    struct BlockStats {
        MatrixXd beta_stat;
        double bound = 0.0;
        double elog_sum = 0.0;
    };

    double prev_elbo = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= config.max_em_iters; ++iter) {
        MatrixXd log_beta = model.beta.array().log();

        std::vector<BlockStats> blocks(kEStepBlocks);
        run_blocks(kEStepBlocks, options.threads, [&](std::size_t b) {
            auto [begin, end] = block_range(d, b, kEStepBlocks);
            BlockStats& bs = blocks[b];
            bs.beta_stat = MatrixXd::Zero(k, v);
            MatrixXd phi;
            for (std::size_t idx = begin; idx < end; ++idx) {
                const BowDocument& doc = corpus[idx];
                phi.resize(static_cast<int>(doc.entries.size()), k);
                auto res = lda_detail::infer_lda_doc(log_beta, model.alpha, doc, gammas[idx], phi, config);
                bs.bound += res.bound;
                bs.elog_sum += res.elog_theta_sum;
                for (std::size_t u = 0; u < doc.entries.size(); ++u) {
                    const auto& e = doc.entries[u];
                    for (int i = 0; i < k; ++i)
                        bs.beta_stat(i, e.term_id) += static_cast<double>(e.count) * phi(static_cast<int>(u), i);
                }
            }
        });

        MatrixXd beta_stat = MatrixXd::Zero(k, v);
        double elbo = 0.0;
        double elog_sum = 0.0;
        for (const auto& bs : blocks) {
            beta_stat += bs.beta_stat;
            elbo += bs.bound;
            elog_sum += bs.elog_sum;
        }
        if (!std::isfinite(elbo))
            throw NumericError("fit_lda: non-finite ELBO at EM iteration " + std::to_string(iter));
        model.diagnostics.elbo_trace.push_back(elbo);
        model.diagnostics.final_elbo = elbo;
        model.diagnostics.em_iterations = iter;

        normalize_topic_rows(beta_stat);
        model.beta = beta_stat;
        if (options.update_alpha) {
            double a = lda_detail::update_symmetric_alpha(model.alpha(0), k, d, elog_sum);
            model.alpha = VectorXd::Constant(k, a);
        }

        if (iter > 1 && std::abs(elbo - prev_elbo) < config.em_rel_tol * std::abs(prev_elbo)) break;
        prev_elbo = elbo;
    }
    return model;
}

inline nlohmann::json lda_to_json(const LdaModel& model) {
    nlohmann::json j;
    j["model"] = "lda";
    j["k"] = model.k;
    j["v"] = model.v;
    j["seed"] = model.diagnostics.seed;
    j["vocab_digest"] = model.vocab_digest;
    j["alpha"] = std::vector<double>(model.alpha.data(), model.alpha.data() + model.k);
    std::vector<double> beta;
    beta.reserve(static_cast<std::size_t>(model.k) * model.v);
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) beta.push_back(model.beta(i, w));
    j["beta"] = beta;
    j["diagnostics"] = {{"final_elbo", model.diagnostics.final_elbo},
                        {"em_iterations", model.diagnostics.em_iterations}};
    return j;
}

inline LdaModel lda_from_json(const nlohmann::json& j) {
    if (j.value("model", "") != std::string("lda")) throw DataError("model file is not an lda model");
    LdaModel model;
    model.k = j.at("k").get<int>();
    model.v = j.at("v").get<int>();
    model.diagnostics.seed = j.at("seed").get<std::uint64_t>();
    model.vocab_digest = j.value("vocab_digest", "");
    auto alpha = j.at("alpha").get<std::vector<double>>();
    auto beta = j.at("beta").get<std::vector<double>>();
    if (alpha.size() != static_cast<std::size_t>(model.k) ||
        beta.size() != static_cast<std::size_t>(model.k) * model.v)
        throw DataError("lda model file: dimension mismatch");
    model.alpha = Eigen::Map<VectorXd>(alpha.data(), model.k);
    model.beta.resize(model.k, model.v);
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) model.beta(i, w) = beta[static_cast<std::size_t>(i) * model.v + w];
    if (j.contains("diagnostics")) {
        model.diagnostics.final_elbo = j["diagnostics"].value("final_elbo", 0.0);
        model.diagnostics.em_iterations = j["diagnostics"].value("em_iterations", 0);
    }
    return model;
}

}  // namespace skillscope
