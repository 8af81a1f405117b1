#pragma once

#include <cstdint>
#include <vector>

#include "hcd/model.hpp"

namespace hcd {

// Epoch-frozen forward state. Makes the loss under a single-coordinate
// perturbation an O(n) evaluation instead of a full O(n*m*p) pass.
struct PreactivationCache {
    Matrix z;                       // m x n, z(r,s) = w_r . X_s
    std::vector<double> preds;      // n, frozen predictions
    std::vector<double> residuals;  // n, preds[s] - y[s]
    double base_loss = 0.0;         // 0.5 * sum residuals^2

    // Analytic footprint, 8 bytes per stored double: z + preds + residuals
    // + base_loss.
    std::uint64_t analytic_bytes() const {
        return 8u * (z.rows() * z.cols() + 2u * preds.size() + 1u);
    }
};

PreactivationCache build_cache(const NetworkParams& params, const Dataset& data);

// Loss of the network with w(r,j) shifted by delta and everything else
// frozen at the cached state. Pure O(n) read of the cache.
double perturbed_loss(const PreactivationCache& cache, const NetworkParams& params,
                      const Dataset& data, std::size_t r, std::size_t j, double delta);

} // namespace hcd
