#include "hcd/coord_eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hcd;

namespace {

// Full O(n*m*p) rebuild with one coordinate edited: the reference the
// incremental evaluator must agree with.
double rebuilt_loss(const NetworkParams& params, const Dataset& data, std::size_t r,
                    std::size_t j, double delta) {
    NetworkParams edited = params;
    edited.w(r, j) += delta;
    return loss(edited, data);
}

} // namespace

TEST(BuildCache, ZeroWeights) {
    NetworkParams params = init_params(3, 4, RngSeed{1});
    params.w = Matrix(3, 4, 0.0);
    const Dataset data = generate_dataset(5, 4, RngSeed{2});
    const PreactivationCache cache = build_cache(params, data);

    for (std::size_t i = 0; i < cache.z.size(); ++i) EXPECT_EQ(cache.z.data()[i], 0.0);
    for (double pred : cache.preds) EXPECT_EQ(pred, 0.0);
    double want = 0.0;
    for (double y : data.labels) want += y * y;
    EXPECT_NEAR(cache.base_loss, 0.5 * want, 1e-12 * (1.0 + want));
}

TEST(BuildCache, BaseLossMatchesModelLoss) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const NetworkParams params = init_params(6, 5, RngSeed{seed});
        const Dataset data = generate_dataset(4, 5, RngSeed{seed + 100});
        const PreactivationCache cache = build_cache(params, data);
        const double want = loss(params, data);
        EXPECT_NEAR(cache.base_loss, want, 1e-12 * (1.0 + want));
    }
}

TEST(BuildCache, SingleEntryIsDotProduct) {
    NetworkParams params;
    params.w = Matrix(1, 3);
    params.w(0, 0) = 0.25;
    params.w(0, 1) = -1.5;
    params.w(0, 2) = 2.0;
    params.a = {0.7};
    Dataset data;
    data.features = Matrix(1, 3);
    data.features(0, 0) = 0.6;
    data.features(0, 1) = 0.8;
    data.features(0, 2) = 0.0;
    data.labels = {0.3};
    const PreactivationCache cache = build_cache(params, data);
    EXPECT_DOUBLE_EQ(cache.z(0, 0), 0.25 * 0.6 + (-1.5) * 0.8 + 2.0 * 0.0);
}

TEST(BuildCache, PredsConsistentWithPreactivations) {
    const NetworkParams params = init_params(7, 6, RngSeed{5});
    const Dataset data = generate_dataset(5, 6, RngSeed{6});
    const PreactivationCache cache = build_cache(params, data);
    for (std::size_t s = 0; s < data.n(); ++s) {
        double sum = 0.0;
        for (std::size_t r = 0; r < params.m(); ++r) {
            const double z = cache.z(r, s);
            if (z > 0.0) sum += params.a[r] * z;
        }
        const double want = params.scale() * sum;
        EXPECT_NEAR(cache.preds[s], want, 1e-12 * (1.0 + std::abs(want)));
    }
}

TEST(BuildCache, RejectsDimensionMismatch) {
    const NetworkParams params = init_params(2, 3, RngSeed{1});
    const Dataset data = generate_dataset(2, 4, RngSeed{2});
    EXPECT_THROW(build_cache(params, data), std::invalid_argument);
}

TEST(PerturbedLoss, ZeroDeltaIsBaseLossBitwise) {
    const NetworkParams params = init_params(5, 4, RngSeed{7});
    const Dataset data = generate_dataset(6, 4, RngSeed{8});
    const PreactivationCache cache = build_cache(params, data);
    for (std::size_t r = 0; r < params.m(); ++r)
        for (std::size_t j = 0; j < params.p(); ++j)
            EXPECT_EQ(perturbed_loss(cache, params, data, r, j, 0.0), cache.base_loss);
}

TEST(PerturbedLoss, DeadColumnLeavesLossUnchanged) {
    // Rows (+-1, 0) are unit norm and give a feature column that is all zero.
    NetworkParams params = init_params(3, 2, RngSeed{9});
    Dataset data;
    data.features = Matrix(2, 2, 0.0);
    data.features(0, 0) = 1.0;
    data.features(1, 0) = -1.0;
    data.labels = {0.4, -1.2};
    const PreactivationCache cache = build_cache(params, data);
    for (double delta : {-3.0, -0.5, 0.25, 10.0})
        EXPECT_EQ(perturbed_loss(cache, params, data, 1, 1, delta), cache.base_loss);
}

TEST(PerturbedLoss, MatchesFullRebuild) {
    std::mt19937_64 pick(12345);
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const NetworkParams params = init_params(4, 5, RngSeed{seed});
        const Dataset data = generate_dataset(3, 5, RngSeed{seed + 300});
        const PreactivationCache cache = build_cache(params, data);
        for (int k = 0; k < 5; ++k) {
            const std::size_t r = pick() % params.m();
            const std::size_t j = pick() % params.p();
            const double delta =
                (static_cast<double>(pick() % 2000) - 1000.0) / 250.0;  // [-4, 4)
            const double fast = perturbed_loss(cache, params, data, r, j, delta);
            const double full = rebuilt_loss(params, data, r, j, delta);
            EXPECT_LE(std::abs(fast - full), 1e-10 * (1.0 + full))
                << "r=" << r << " j=" << j << " delta=" << delta;
            ++checked;
        }
    }
    EXPECT_EQ(checked, 200);
}

TEST(PerturbedLoss, DoesNotMutateCache) {
    const NetworkParams params = init_params(4, 4, RngSeed{10});
    const Dataset data = generate_dataset(4, 4, RngSeed{11});
    const PreactivationCache cache = build_cache(params, data);
    const PreactivationCache snapshot = cache;
    for (std::size_t r = 0; r < params.m(); ++r)
        for (std::size_t j = 0; j < params.p(); ++j)
            for (double delta : {-1.0, 0.5, 2.0})
                perturbed_loss(cache, params, data, r, j, delta);
    EXPECT_TRUE(cache.z == snapshot.z);
    EXPECT_EQ(cache.preds, snapshot.preds);
    EXPECT_EQ(cache.residuals, snapshot.residuals);
    EXPECT_EQ(cache.base_loss, snapshot.base_loss);
}

TEST(PerturbedLoss, RejectsOutOfRangeIndices) {
    const NetworkParams params = init_params(2, 3, RngSeed{1});
    const Dataset data = generate_dataset(2, 3, RngSeed{2});
    const PreactivationCache cache = build_cache(params, data);
    EXPECT_THROW(perturbed_loss(cache, params, data, 2, 0, 0.1), std::invalid_argument);
    EXPECT_THROW(perturbed_loss(cache, params, data, 0, 3, 0.1), std::invalid_argument);
}

TEST(PreactivationCache, AnalyticBytesFormula) {
    const NetworkParams params = init_params(5, 3, RngSeed{1});
    const Dataset data = generate_dataset(4, 3, RngSeed{2});
    const PreactivationCache cache = build_cache(params, data);
    EXPECT_EQ(cache.analytic_bytes(), 8u * (5u * 4u + 2u * 4u + 1u));
}
