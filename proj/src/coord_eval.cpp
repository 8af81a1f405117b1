#include "hcd/coord_eval.hpp"

#include <stdexcept>
#include <string>

namespace hcd {

PreactivationCache build_cache(const NetworkParams& params, const Dataset& data) {
    if (params.p() != data.p())
        throw std::invalid_argument("build_cache: params/data feature dimension mismatch");

    const std::size_t n = data.n();
    const std::size_t m = params.m();
    const std::size_t p = params.p();
    const double scale = params.scale();

    PreactivationCache cache;
    cache.z = Matrix(m, n);
    cache.preds.resize(n);
    cache.residuals.resize(n);

    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double* x = data.features.row_ptr(s);
        double sum = 0.0;  // same accumulation order as forward()
        for (std::size_t r = 0; r < m; ++r) {
            const double z = dot(params.w.row_ptr(r), x, p);
            cache.z(r, s) = z;
            if (z > 0.0) sum += params.a[r] * z;
        }
        cache.preds[s] = scale * sum;
        cache.residuals[s] = cache.preds[s] - data.labels[s];
        total += cache.residuals[s] * cache.residuals[s];
    }
    cache.base_loss = 0.5 * total;
    return cache;
}

double perturbed_loss(const PreactivationCache& cache, const NetworkParams& params,
                      const Dataset& data, std::size_t r, std::size_t j, double delta) {
    if (r >= params.m())
        throw std::invalid_argument("perturbed_loss: neuron index " + std::to_string(r) +
                                    " out of range");
    if (j >= params.p())
        throw std::invalid_argument("perturbed_loss: feature index " + std::to_string(j) +
                                    " out of range");

    const std::size_t n = data.n();
    const double coeff = params.a[r] * params.scale();
    const double* zrow = cache.z.row_ptr(r);

    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double z_old = zrow[s];
        const double z_new = z_old + delta * data.features(s, j);
        const double relu_old = z_old > 0.0 ? z_old : 0.0;
        const double relu_new = z_new > 0.0 ? z_new : 0.0;
        const double residual = cache.residuals[s] + coeff * (relu_new - relu_old);
        total += residual * residual;
    }
    return 0.5 * total;
}

} // namespace hcd
