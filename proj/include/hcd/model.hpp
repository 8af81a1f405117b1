#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hcd/matrix.hpp"

namespace hcd {

struct RngSeed {
    std::uint64_t value = 42;
};

// n samples on the unit (p-1)-sphere with scalar labels.
struct Dataset {
    Matrix features;             // n x p, each row has unit Euclidean norm
    std::vector<double> labels;  // n entries

    std::size_t n() const { return features.rows(); }
    std::size_t p() const { return features.cols(); }
};

// Two-layer ReLU network: f(x) = (1/sqrt(m)) * sum_r a[r] * max(w_r . x, 0).
// Only the first layer w is ever trained; a stays at its initial draw.
struct NetworkParams {
    Matrix w;               // m x p first-layer weights
    std::vector<double> a;  // m output weights

    std::size_t m() const { return w.rows(); }
    std::size_t p() const { return w.cols(); }
    double scale() const;  // 1/sqrt(m), always recomputed
};

// Features: i.i.d. uniform draws on the unit sphere (normalized standard
// Gaussian vectors). Labels: i.i.d. standard Gaussian. Deterministic in seed.
Dataset generate_dataset(std::size_t n, std::size_t p, RngSeed seed);

// w entries ~ N(0,1), a entries ~ Uniform[-1,1], deterministic in seed.
NetworkParams init_params(std::size_t m, std::size_t p, RngSeed seed);

double forward(const NetworkParams& params, std::span<const double> x);

// Squared-error loss: 0.5 * sum_i (f(X_i) - y_i)^2.
double loss(const NetworkParams& params, const Dataset& data);

// d(loss)/dw, m x p. The ReLU subgradient at exactly zero preactivation is 0.
Matrix gradient(const NetworkParams& params, const Dataset& data);

// Plain-text dataset format: header "n p", n feature rows, n label lines,
// 17 significant digits. Round-trips exactly.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace hcd
