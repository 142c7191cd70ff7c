#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "skillscope/common.hpp"
#include "skillscope/rng.hpp"

namespace skillscope {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// digamma via upward recurrence + asymptotic series (x > 0)
inline double digamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    return r + std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
}

inline double trigamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r += 1.0 / (x * x);
        x += 1.0;
    }
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    return r + inv * (1.0 + 0.5 * inv +
                      inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
}

inline VectorXd softmax(const VectorXd& x) {
    double m = x.maxCoeff();
    VectorXd e = (x.array() - m).exp();
    return e / e.sum();
}

// Seeded "smoothed random counts" initialization for topic-word matrices:
// uniform draws plus a 1/V pseudo-count, rows normalized.
inline MatrixXd random_topic_matrix(int k, int v, Rng& rng) {
    MatrixXd beta(k, v);
    for (int i = 0; i < k; ++i) {
        double row_sum = 0.0;
        for (int w = 0; w < v; ++w) {
            double c = rng.uniform() + 1.0 / static_cast<double>(v);
            beta(i, w) = c;
            row_sum += c;
        }
        beta.row(i) /= row_sum;
    }
    return beta;
}

// Row-normalize accumulated counts with a tiny floor so that log(beta) stays finite.
inline void normalize_topic_rows(MatrixXd& stats, double floor = 1e-12) {
    for (int i = 0; i < stats.rows(); ++i) {
        stats.row(i) = stats.row(i).array() + floor;
        stats.row(i) /= stats.row(i).sum();
    }
}

}  // namespace skillscope
