#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "skillscope/lda.hpp"
#include "skillscope/math.hpp"
#include "skillscope/model_config.hpp"
#include "skillscope/parallel.hpp"
#include "skillscope/preprocess.hpp"
#include "skillscope/rng.hpp"

#include <json.hpp>

namespace skillscope {

struct CtmDiagnostics {
    double final_elbo = 0.0;
    int em_iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> elbo_trace;  // total bound after each E-step
};

// Fitted correlated topic model: topic-word rows beta, and a Gaussian
// (mu, sigma) over topic log-proportions whose off-diagonal structure carries
// the topic correlations.
struct CtmModel {
    int k = 0;
    int v = 0;
    MatrixXd beta;   // K x V, rows on the simplex
    VectorXd mu;     // length K
    MatrixXd sigma;  // K x K, symmetric positive definite
    CtmDiagnostics diagnostics;
    std::string vocab_digest;
};

// Per-document variational parameters. phi has one row per distinct term of
// the document, aligned with BowDocument::entries.
struct VariationalState {
    VectorXd lambda;
    VectorXd nu2;
    MatrixXd phi;
    double zeta = 1.0;
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<double> sweep_bounds;  // bound after every full sweep
};

struct DocumentTopicMatrix {
    std::vector<std::string> doc_ids;
    MatrixXd theta;  // D x K, rows on the simplex
};

// Quantities derived from a fixed model, shared across documents in an E-step.
struct CtmGeometry {
    VectorXd mu;
    MatrixXd precision;    // sigma^{-1}
    double logdet_sigma = 0.0;
    MatrixXd log_beta;

    static CtmGeometry from(const CtmModel& model) {
        CtmGeometry g;
        g.mu = model.mu;
        Eigen::LLT<MatrixXd> llt(model.sigma);
        if (llt.info() != Eigen::Success)
            throw NumericError("ctm: covariance is not positive definite");
        g.precision = llt.solve(MatrixXd::Identity(model.k, model.k));
        g.logdet_sigma = 0.0;
        for (int i = 0; i < model.k; ++i) g.logdet_sigma += 2.0 * std::log(llt.matrixL()(i, i));
        g.log_beta = model.beta.array().log();
        return g;
    }
};

struct BoundParts {
    double prior_cross = 0.0;  // E[log p(eta | mu, sigma)]
    double topic_alloc = 0.0;  // sum_n E[log p(z_n | eta)] via the zeta bound
    double word_loglik = 0.0;  // sum_n E[log p(w_n | z_n, beta)]
    double eta_entropy = 0.0;
    double z_entropy = 0.0;

    double total() const { return prior_cross + topic_alloc + word_loglik + eta_entropy + z_entropy; }
};

inline double zeta_from(const VectorXd& lambda, const VectorXd& nu2) {
    return (lambda.array() + 0.5 * nu2.array()).exp().sum();
}

inline VariationalState init_state(const BowDocument& doc, int k) {
    VariationalState s;
    s.lambda = VectorXd::Zero(k);
    s.nu2 = VectorXd::Ones(k);
    s.phi = MatrixXd::Constant(static_cast<int>(doc.entries.size()), k, 1.0 / static_cast<double>(k));
    s.zeta = zeta_from(s.lambda, s.nu2);
    return s;
}

inline BoundParts bound_parts(const CtmGeometry& g, const BowDocument& doc, const VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    const double n = static_cast<double>(doc.total);
    BoundParts parts;

    VectorXd diff = state.lambda - g.mu;
    parts.prior_cross = -0.5 * g.logdet_sigma - 0.5 * k * std::log(2.0 * M_PI) -
                        0.5 * (g.precision.diagonal().dot(state.nu2) + diff.dot(g.precision * diff));

    double exp_sum = (state.lambda.array() + 0.5 * state.nu2.array()).exp().sum();
    double alloc = -n * (exp_sum / state.zeta - 1.0 + std::log(state.zeta));
    for (std::size_t u = 0; u < doc.entries.size(); ++u) {
        const auto& e = doc.entries[u];
        double c = static_cast<double>(e.count);
        for (int i = 0; i < k; ++i) {
            double p = state.phi(static_cast<int>(u), i);
            if (p > 0.0) {
                alloc += c * p * state.lambda(i);
                parts.word_loglik += c * p * g.log_beta(i, e.term_id);
                parts.z_entropy -= c * p * std::log(p);
            }
        }
    }
    parts.topic_alloc = alloc;
    parts.eta_entropy = 0.5 * (state.nu2.array().log() + std::log(2.0 * M_PI) + 1.0).sum();
    return parts;
}

inline double document_bound(const CtmGeometry& g, const BowDocument& doc, const VariationalState& state) {
    return bound_parts(g, doc, state).total();
}

// d(bound)/d(lambda) = -sigma^{-1}(lambda - mu) + sum_w c_w phi_w - (N/zeta) exp(lambda + nu2/2)
inline VectorXd bound_grad_lambda(const CtmGeometry& g, const BowDocument& doc, const VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    VectorXd s = VectorXd::Zero(k);
    for (std::size_t u = 0; u < doc.entries.size(); ++u)
        s += static_cast<double>(doc.entries[u].count) * state.phi.row(static_cast<int>(u)).transpose();
    VectorXd expv = (state.lambda.array() + 0.5 * state.nu2.array()).exp();
    return -g.precision * (state.lambda - g.mu) + s -
           (static_cast<double>(doc.total) / state.zeta) * expv;
}

// d(bound)/d(nu2_i) = -precision_ii/2 - (N/2zeta) exp(lambda_i + nu2_i/2) + 1/(2 nu2_i)
inline VectorXd bound_grad_nu2(const CtmGeometry& g, const BowDocument& doc, const VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    const double n = static_cast<double>(doc.total);
    VectorXd grad(k);
    for (int i = 0; i < k; ++i) {
        grad(i) = -0.5 * g.precision(i, i) -
                  (n / (2.0 * state.zeta)) * std::exp(state.lambda(i) + 0.5 * state.nu2(i)) +
                  0.5 / state.nu2(i);
    }
    return grad;
}

namespace ctm_detail {

// phi_{w,i} proportional to exp(lambda_i) * beta_{i,w}, normalized per term
inline void update_phi(const CtmGeometry& g, const BowDocument& doc, VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    for (std::size_t u = 0; u < doc.entries.size(); ++u) {
        const int row = static_cast<int>(u);
        double m = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            state.phi(row, i) = state.lambda(i) + g.log_beta(i, doc.entries[u].term_id);
            m = std::max(m, state.phi(row, i));
        }
        double z = 0.0;
        for (int i = 0; i < k; ++i) {
            state.phi(row, i) = std::exp(state.phi(row, i) - m);
            z += state.phi(row, i);
        }
        state.phi.row(row) /= z;
    }
}

// Maximizes the lambda part of the bound at fixed (phi, zeta, nu2) by
// Polak-Ribiere conjugate gradient with a backtracking line search. Only
// improving steps are accepted, which is what makes the sweep monotone.
inline void maximize_lambda(const CtmGeometry& g, const VectorXd& phi_counts, double n_total,
                            VariationalState& state) {
    const double n_over_zeta = n_total / state.zeta;
    auto fval = [&](const VectorXd& lam) {
        VectorXd diff = lam - g.mu;
        double exp_sum = (lam.array() + 0.5 * state.nu2.array()).exp().sum();
        return -0.5 * diff.dot(g.precision * diff) + phi_counts.dot(lam) - n_over_zeta * exp_sum;
    };
    auto grad = [&](const VectorXd& lam) -> VectorXd {
        VectorXd expv = (lam.array() + 0.5 * state.nu2.array()).exp();
        return -g.precision * (lam - g.mu) + phi_counts - n_over_zeta * expv;
    };

    VectorXd lam = state.lambda;
    double f = fval(lam);
    VectorXd gv = grad(lam);
    VectorXd dir = gv;
    const int max_iters = 100;
    for (int it = 0; it < max_iters; ++it) {
        if (gv.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + n_total)) break;
        double slope = dir.dot(gv);
        if (slope <= 0.0) {  // restart on a non-ascent direction
            dir = gv;
            slope = gv.squaredNorm();
            if (slope == 0.0) break;
        }
        double step = 1.0;
        bool accepted = false;
        VectorXd cand;
        double fc = f;
        for (int ls = 0; ls < 60; ++ls) {
            cand = lam + step * dir;
            fc = fval(cand);
            if (std::isfinite(fc) && fc >= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        VectorXd gn = grad(cand);
        double denom = gv.squaredNorm();
        double beta_pr = denom > 0.0 ? std::max(0.0, gn.dot(gn - gv) / denom) : 0.0;
        dir = gn + beta_pr * dir;
        double gain = fc - f;
        lam = cand;
        gv = gn;
        f = fc;
        if (gain < 1e-12 * (1.0 + std::abs(f))) break;
    }
    state.lambda = lam;
}

// Per-coordinate Newton in log space for nu2_i; the objective
//   -a v - B exp(v/2) + log(v)/2,  a = precision_ii/2, B = (N/zeta) exp(lambda_i)
// is strictly concave in log v, so safeguarded Newton converges globally.
inline void maximize_nu2(const CtmGeometry& g, double n_total, VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    for (int i = 0; i < k; ++i) {
        const double a = 0.5 * g.precision(i, i);
        const double b = (n_total / state.zeta) * std::exp(state.lambda(i));
        auto gfun = [&](double v) { return -a * v - b * std::exp(0.5 * v) + 0.5 * std::log(v); };
        double x = std::log(state.nu2(i));
        double gx = gfun(std::exp(x));
        for (int iter = 0; iter < 50; ++iter) {
            double v = std::exp(x);
            double ev = std::exp(0.5 * v);
            double hp = -a * v - 0.5 * b * v * ev + 0.5;           // d(g)/d(log v)
            if (std::abs(hp) < 1e-13) break;
            double hpp = -a * v - 0.5 * b * v * ev * (1.0 + 0.5 * v);  // always < 0
            double delta = -hp / hpp;
            if (!std::isfinite(delta)) delta = hp > 0.0 ? 0.5 : -0.5;
            delta = std::clamp(delta, -4.0, 4.0);
            double step = 1.0;
            bool accepted = false;
            double xn = x, gn = gx;
            for (int ls = 0; ls < 60; ++ls) {
                xn = x + step * delta;
                gn = gfun(std::exp(xn));
                if (std::isfinite(gn) && gn >= gx + 1e-4 * step * delta * hp) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            double gain = gn - gx;
            x = xn;
            gx = gn;
            if (gain < 1e-14 * (1.0 + std::abs(gx))) break;
        }
        state.nu2(i) = std::exp(x);
    }
}

// Full coordinate-ascent sweeps (zeta, phi, lambda, nu2) until the bound
// stalls. The state is taken as the starting point, so the caller can warm
// start across EM iterations.
inline void run_inference(const CtmGeometry& g, const BowDocument& doc, const ModelConfig& config,
                          VariationalState& state) {
    const int k = static_cast<int>(g.mu.size());
    const double n = static_cast<double>(doc.total);
    double prev = document_bound(g, doc, state);
    state.sweep_bounds.clear();
    state.sweep_bounds.push_back(prev);
    for (int sweep = 0; sweep < config.inner_max_iters; ++sweep) {
        state.zeta = zeta_from(state.lambda, state.nu2);
        update_phi(g, doc, state);
        VectorXd phi_counts = VectorXd::Zero(k);
        for (std::size_t u = 0; u < doc.entries.size(); ++u)
            phi_counts += static_cast<double>(doc.entries[u].count) * state.phi.row(static_cast<int>(u)).transpose();
        maximize_lambda(g, phi_counts, n, state);
        maximize_nu2(g, n, state);
        double bound = document_bound(g, doc, state);
        if (!std::isfinite(bound))
            throw NumericError("ctm inference: non-finite bound for document '" + doc.doc_id + "'");
        state.sweep_bounds.push_back(bound);
        double gain = bound - prev;
        prev = bound;
        if (gain < config.inner_tol * std::max(1.0, std::abs(bound))) break;
    }
    state.bound = prev;
}

inline void check_document(const BowDocument& doc, int v) {
    if (doc.total == 0) throw DataError("ctm: document '" + doc.doc_id + "' is empty");
    for (const auto& e : doc.entries)
        if (e.term_id >= static_cast<std::uint32_t>(v))
            throw DataError("ctm: term id out of vocabulary range in '" + doc.doc_id + "'");
}

}  // namespace ctm_detail

/// Variational posterior for one document under a fitted model, from a cold
/// start (lambda = 0, nu2 = 1).
inline VariationalState infer_document(const CtmModel& model, const BowDocument& doc, const ModelConfig& config) {
    ctm_detail::check_document(doc, model.v);
    CtmGeometry g = CtmGeometry::from(model);
    VariationalState state = init_state(doc, model.k);
    ctm_detail::run_inference(g, doc, config, state);
    return state;
}

/// Sum of per-document bounds; the objective the EM loop reports.
inline double elbo(const CtmModel& model, const std::vector<BowDocument>& corpus,
                   const std::vector<VariationalState>& states) {
    if (corpus.size() != states.size()) throw DataError("elbo: corpus and states are misaligned");
    CtmGeometry g = CtmGeometry::from(model);
    double total = 0.0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (states[d].phi.rows() != static_cast<int>(corpus[d].entries.size()))
            throw DataError("elbo: state " + std::to_string(d) + " does not match its document");
        ctm_detail::check_document(corpus[d], model.v);
        total += document_bound(g, corpus[d], states[d]);
    }
    if (!std::isfinite(total)) throw NumericError("elbo: non-finite bound");
    return total;
}

/// Variational EM for the correlated topic model.
///
/// E-step: per-document coordinate ascent (warm started between iterations).
/// M-step: beta rows from responsibility-weighted counts; mu, sigma from the
/// moments of the variational Gaussians, with a small ridge on sigma.
inline CtmModel fit_ctm(const std::vector<BowDocument>& corpus, const Vocabulary& vocab, const ModelConfig& config,
                        const FitOptions& options = {}) {
    config.validate();
    const int k = config.k;
    const int v = static_cast<int>(vocab.size());
    if (corpus.empty()) throw DataError("fit_ctm: empty corpus");
    if (corpus.size() < 2) throw DataError("fit_ctm: need at least 2 documents");
    if (k > v) throw DataError("fit_ctm: k exceeds vocabulary size");
    for (const auto& doc : corpus) ctm_detail::check_document(doc, v);

    const std::size_t d = corpus.size();
    CtmModel model;
    model.k = k;
    model.v = v;
    model.vocab_digest = vocab.digest();
    model.diagnostics.seed = config.seed;
    model.mu = VectorXd::Zero(k);
    model.sigma = MatrixXd::Identity(k, k);
    if (config.init == InitMode::FromLda) {
        model.beta = fit_lda(corpus, vocab, config, LdaOptions{0.0, false, options.threads}).beta;
    } else {
        Rng rng(config.seed);
        model.beta = random_topic_matrix(k, v, rng);
    }

    // warm-started variational means and variances, one per document
    std::vector<VectorXd> lambdas(d, VectorXd::Zero(k));
    std::vector<VectorXd> nu2s(d, VectorXd::Ones(k));

    struct BlockStats {
        MatrixXd beta_stat;
        VectorXd lambda_sum;
        VectorXd nu2_sum;
        MatrixXd outer_sum;
        double bound = 0.0;
    };

    double prev_elbo = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= config.max_em_iters; ++iter) {
        CtmGeometry geom = CtmGeometry::from(model);

        std::vector<BlockStats> blocks(kEStepBlocks);
        run_blocks(kEStepBlocks, options.threads, [&](std::size_t bidx) {
            auto [begin, end] = block_range(d, bidx, kEStepBlocks);
            BlockStats& bs = blocks[bidx];
            bs.beta_stat = MatrixXd::Zero(k, v);
            bs.lambda_sum = VectorXd::Zero(k);
            bs.nu2_sum = VectorXd::Zero(k);
            bs.outer_sum = MatrixXd::Zero(k, k);
            VariationalState state;
            for (std::size_t idx = begin; idx < end; ++idx) {
                const BowDocument& doc = corpus[idx];
                state.lambda = lambdas[idx];
                state.nu2 = nu2s[idx];
                state.phi.resize(static_cast<int>(doc.entries.size()), k);
                state.phi.setConstant(1.0 / static_cast<double>(k));
                state.zeta = zeta_from(state.lambda, state.nu2);
                ctm_detail::run_inference(geom, doc, config, state);
                lambdas[idx] = state.lambda;
                nu2s[idx] = state.nu2;
                bs.bound += state.bound;
                bs.lambda_sum += state.lambda;
                bs.nu2_sum += state.nu2;
                bs.outer_sum.noalias() += state.lambda * state.lambda.transpose();
                for (std::size_t u = 0; u < doc.entries.size(); ++u) {
                    const auto& e = doc.entries[u];
                    for (int i = 0; i < k; ++i)
                        bs.beta_stat(i, e.term_id) += static_cast<double>(e.count) * state.phi(static_cast<int>(u), i);
                }
            }
        });

        MatrixXd beta_stat = MatrixXd::Zero(k, v);
        VectorXd lambda_sum = VectorXd::Zero(k);
        VectorXd nu2_sum = VectorXd::Zero(k);
        MatrixXd outer_sum = MatrixXd::Zero(k, k);
        double total_bound = 0.0;
        for (const auto& bs : blocks) {
            beta_stat += bs.beta_stat;
            lambda_sum += bs.lambda_sum;
            nu2_sum += bs.nu2_sum;
            outer_sum += bs.outer_sum;
            total_bound += bs.bound;
        }
        if (!std::isfinite(total_bound))
            throw NumericError("fit_ctm: non-finite ELBO at EM iteration " + std::to_string(iter));
        model.diagnostics.elbo_trace.push_back(total_bound);
        model.diagnostics.final_elbo = total_bound;
        model.diagnostics.em_iterations = iter;

        normalize_topic_rows(beta_stat);
        model.beta = beta_stat;
        double dn = static_cast<double>(d);
        model.mu = lambda_sum / dn;
        MatrixXd sigma = outer_sum / dn - model.mu * model.mu.transpose();
        sigma.diagonal() += nu2_sum / dn;
        MatrixXd sym = 0.5 * (sigma + sigma.transpose());
        sym.diagonal().array() += config.covariance_ridge;
        model.sigma = sym;

        if (iter > 1 && std::abs(total_bound - prev_elbo) < config.em_rel_tol * std::abs(prev_elbo)) break;
        prev_elbo = total_bound;
    }
    return model;
}

/// Posterior topic shares per document: softmax of the variational mean.
inline DocumentTopicMatrix document_posteriors(const CtmModel& model, const std::vector<BowDocument>& corpus,
                                               const ModelConfig& config, const FitOptions& options = {}) {
    DocumentTopicMatrix out;
    out.doc_ids.reserve(corpus.size());
    for (const auto& doc : corpus) {
        ctm_detail::check_document(doc, model.v);
        out.doc_ids.push_back(doc.doc_id);
    }
    out.theta.resize(static_cast<int>(corpus.size()), model.k);
    CtmGeometry geom = CtmGeometry::from(model);
    run_blocks(kEStepBlocks, options.threads, [&](std::size_t bidx) {
        auto [begin, end] = block_range(corpus.size(), bidx, kEStepBlocks);
        for (std::size_t idx = begin; idx < end; ++idx) {
            VariationalState state = init_state(corpus[idx], model.k);
            ctm_detail::run_inference(geom, corpus[idx], config, state);
            out.theta.row(static_cast<int>(idx)) = softmax(state.lambda).transpose();
        }
    });
    return out;
}

struct TopicTerm {
    std::string term;
    double weight = 0.0;
};

/// Highest-weight terms per row of a topic-word matrix; ties broken
/// lexicographically.
inline std::vector<std::vector<TopicTerm>> top_terms_by_weight(const MatrixXd& weights, const Vocabulary& vocab,
                                                               int n) {
    const int k = static_cast<int>(weights.rows());
    const int v = static_cast<int>(weights.cols());
    if (n < 1 || n > v) throw DataError("top terms: n out of range");
    std::vector<std::vector<TopicTerm>> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        std::vector<int> idx(v);
        for (int w = 0; w < v; ++w) idx[w] = w;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (weights(i, a) != weights(i, b)) return weights(i, a) > weights(i, b);
            return vocab.term(a) < vocab.term(b);
        });
        std::vector<TopicTerm> topic;
        topic.reserve(n);
        for (int r = 0; r < n; ++r) topic.push_back({vocab.term(idx[r]), weights(i, idx[r])});
        out.push_back(std::move(topic));
    }
    return out;
}

inline std::vector<std::vector<TopicTerm>> topic_top_words(const CtmModel& model, const Vocabulary& vocab, int n) {
    return top_terms_by_weight(model.beta, vocab, n);
}

inline std::string top_words_tsv(const std::vector<std::vector<TopicTerm>>& topics) {
    std::string out = "topic\trank\tterm\tweight\n";
    for (std::size_t i = 0; i < topics.size(); ++i)
        for (std::size_t r = 0; r < topics[i].size(); ++r)
            out += std::to_string(i) + "\t" + std::to_string(r + 1) + "\t" + topics[i][r].term + "\t" +
                   format_double(topics[i][r].weight) + "\n";
    return out;
}

// --- model (de)serialization: one JSON document, row-major matrices ---

inline nlohmann::json ctm_to_json(const CtmModel& model) {
    nlohmann::json j;
    j["model"] = "ctm";
    j["k"] = model.k;
    j["v"] = model.v;
    j["seed"] = model.diagnostics.seed;
    j["vocab_digest"] = model.vocab_digest;
    j["mu"] = std::vector<double>(model.mu.data(), model.mu.data() + model.k);
    std::vector<double> sigma;
    sigma.reserve(static_cast<std::size_t>(model.k) * model.k);
    for (int i = 0; i < model.k; ++i)
        for (int c = 0; c < model.k; ++c) sigma.push_back(model.sigma(i, c));
    j["sigma"] = sigma;
    std::vector<double> beta;
    beta.reserve(static_cast<std::size_t>(model.k) * model.v);
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) beta.push_back(model.beta(i, w));
    j["beta"] = beta;
    j["diagnostics"] = {{"final_elbo", model.diagnostics.final_elbo},
                        {"em_iterations", model.diagnostics.em_iterations}};
    return j;
}

inline CtmModel ctm_from_json(const nlohmann::json& j) {
    if (j.value("model", "") != std::string("ctm")) throw DataError("model file is not a ctm model");
    CtmModel model;
    model.k = j.at("k").get<int>();
    model.v = j.at("v").get<int>();
    model.diagnostics.seed = j.at("seed").get<std::uint64_t>();
    model.vocab_digest = j.value("vocab_digest", "");
    auto mu = j.at("mu").get<std::vector<double>>();
    auto sigma = j.at("sigma").get<std::vector<double>>();
    auto beta = j.at("beta").get<std::vector<double>>();
    if (mu.size() != static_cast<std::size_t>(model.k) ||
        sigma.size() != static_cast<std::size_t>(model.k) * model.k ||
        beta.size() != static_cast<std::size_t>(model.k) * model.v)
        throw DataError("ctm model file: dimension mismatch");
    model.mu = Eigen::Map<VectorXd>(mu.data(), model.k);
    model.sigma.resize(model.k, model.k);
    model.beta.resize(model.k, model.v);
    for (int i = 0; i < model.k; ++i)
        for (int c = 0; c < model.k; ++c) model.sigma(i, c) = sigma[static_cast<std::size_t>(i) * model.k + c];
    for (int i = 0; i < model.k; ++i)
        for (int w = 0; w < model.v; ++w) model.beta(i, w) = beta[static_cast<std::size_t>(i) * model.v + w];
    if (j.contains("diagnostics")) {
        model.diagnostics.final_elbo = j["diagnostics"].value("final_elbo", 0.0);
        model.diagnostics.em_iterations = j["diagnostics"].value("em_iterations", 0);
    }
    return model;
}

}  // namespace skillscope
