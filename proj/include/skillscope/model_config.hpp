#pragma once

#include <cstdint>
#include <string>

#include "skillscope/common.hpp"

namespace skillscope {

enum class InitMode { SeededRandom, FromLda };

struct ModelConfig {
    int k = 7;                        // topic count, >= 2
    std::uint64_t seed = 42;
    int max_em_iters = 100;
    double em_rel_tol = 1e-5;         // relative ELBO change stopping rule
    int inner_max_iters = 50;         // per-document coordinate ascent sweeps
    double inner_tol = 1e-6;
    double covariance_ridge = 1e-6;   // epsilon added to Sigma each M-step
    InitMode init = InitMode::SeededRandom;

    void validate() const {
        if (k < 2) throw DataError("model config: k must be >= 2");
        if (max_em_iters < 1 || inner_max_iters < 1) throw DataError("model config: iteration caps must be >= 1");
        if (em_rel_tol <= 0 || inner_tol <= 0) throw DataError("model config: tolerances must be > 0");
        if (covariance_ridge <= 0) throw DataError("model config: covariance ridge must be > 0");
    }
};

// Runtime knobs that do not change the fitted numbers. The E-step is split
// into a fixed number of document blocks merged in block order, so results
// are bitwise identical for any thread count.
struct FitOptions {
    int threads = 0;  // 0 = hardware concurrency
};

}  // namespace skillscope
