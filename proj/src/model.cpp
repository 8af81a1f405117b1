#include "hcd/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace hcd {
namespace {

// Distinct draw streams for data and parameters even when the user supplies
// a single seed.
constexpr std::uint64_t kDatasetStream = 0x8f1c9d2b74a3e501ull;
constexpr std::uint64_t kParamsStream = 0x3b97f42c15d8a6e9ull;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Draws are realized with explicit mappings (not std distributions, whose
// algorithms are implementation-defined) so a seed pins the exact sequence.
class RandomSource {
public:
    RandomSource(RngSeed seed, std::uint64_t stream) : engine_(splitmix64(seed.value ^ stream)) {}

    double uniform_unit() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform_sym() {  // [-1, 1)
        return 2.0 * uniform_unit() - 1.0;
    }

    double gaussian() {  // Box-Muller, pairs cached
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform_unit();  // (0, 1], keeps log finite
        const double u2 = uniform_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

void require_compatible(const NetworkParams& params, const Dataset& data) {
    if (params.p() != data.p())
        throw std::invalid_argument("params/data feature dimension mismatch: " +
                                    std::to_string(params.p()) + " vs " + std::to_string(data.p()));
    if (data.labels.size() != data.n())
        throw std::invalid_argument("dataset has " + std::to_string(data.labels.size()) +
                                    " labels for " + std::to_string(data.n()) + " samples");
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double NetworkParams::scale() const {
    return 1.0 / std::sqrt(static_cast<double>(m()));
}

Dataset generate_dataset(std::size_t n, std::size_t p, RngSeed seed) {
    if (n == 0) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (p == 0) throw std::invalid_argument("generate_dataset: p must be >= 1");

    RandomSource rng(seed, kDatasetStream);
    Dataset data;
    data.features = Matrix(n, p);
    data.labels.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        double* row = data.features.row_ptr(i);
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                row[j] = rng.gaussian();
                norm_sq += row[j] * row[j];
            }
        } while (norm_sq == 0.0);
        const double norm = std::sqrt(norm_sq);
        for (std::size_t j = 0; j < p; ++j) row[j] /= norm;
    }
    for (std::size_t i = 0; i < n; ++i) data.labels[i] = rng.gaussian();
    return data;
}

NetworkParams init_params(std::size_t m, std::size_t p, RngSeed seed) {
    if (m == 0) throw std::invalid_argument("init_params: m must be >= 1");
    if (p == 0) throw std::invalid_argument("init_params: p must be >= 1");

    RandomSource rng(seed, kParamsStream);
    NetworkParams params;
    params.w = Matrix(m, p);
    params.a.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        double* row = params.w.row_ptr(r);
        for (std::size_t j = 0; j < p; ++j) row[j] = rng.gaussian();
    }
    for (std::size_t r = 0; r < m; ++r) params.a[r] = rng.uniform_sym();
    return params;
}

double forward(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.p())
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                    " features, params expect " + std::to_string(params.p()));
    const std::size_t m = params.m();
    double sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double z = dot(params.w.row_ptr(r), x.data(), x.size());
        if (z > 0.0) sum += params.a[r] * z;
    }
    return params.scale() * sum;
}

double loss(const NetworkParams& params, const Dataset& data) {
    require_compatible(params, data);
    double total = 0.0;
    for (std::size_t s = 0; s < data.n(); ++s) {
        const double residual =
            forward(params, std::span<const double>(data.features.row_ptr(s), data.p())) -
            data.labels[s];
        total += residual * residual;
    }
    return 0.5 * total;
}

Matrix gradient(const NetworkParams& params, const Dataset& data) {
    require_compatible(params, data);
    const std::size_t n = data.n();
    const std::size_t m = params.m();
    const std::size_t p = params.p();
    const double scale = params.scale();

    // One pass for preactivations and residuals, one accumulation pass.
    Matrix z(m, n);
    std::vector<double> residuals(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double* x = data.features.row_ptr(s);
        double pred = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double zr = dot(params.w.row_ptr(r), x, p);
            z(r, s) = zr;
            if (zr > 0.0) pred += params.a[r] * zr;
        }
        residuals[s] = scale * pred - data.labels[s];
    }

    Matrix grad(m, p);
    for (std::size_t r = 0; r < m; ++r) {
        double* grow = grad.row_ptr(r);
        const double coeff_r = params.a[r] * scale;
        for (std::size_t s = 0; s < n; ++s) {
            if (!(z(r, s) > 0.0)) continue;  // subgradient 0 at z == 0
            const double c = residuals[s] * coeff_r;
            const double* x = data.features.row_ptr(s);
            for (std::size_t j = 0; j < p; ++j) grow[j] += c * x[j];
        }
    }
    return grad;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << data.n() << ' ' << data.p() << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double* row = data.features.row_ptr(i);
        for (std::size_t j = 0; j < data.p(); ++j) {
            if (j) out << ' ';
            out << format_real(row[j]);
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < data.n(); ++i) out << format_real(data.labels[i]) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::size_t n = 0, p = 0;
    if (!(in >> n >> p) || n == 0 || p == 0)
        throw std::runtime_error(path.string() + ": malformed header, expected \"n p\"");

    Dataset data;
    data.features = Matrix(n, p);
    data.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = data.features.row_ptr(i);
        for (std::size_t j = 0; j < p; ++j) {
            if (!(in >> row[j]) || !std::isfinite(row[j]))
                throw std::runtime_error(path.string() + ": bad feature value at row " +
                                         std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> data.labels[i]) || !std::isfinite(data.labels[i]))
            throw std::runtime_error(path.string() + ": bad label value at index " +
                                     std::to_string(i));
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double* row = data.features.row_ptr(i);
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < p; ++j) norm_sq += row[j] * row[j];
        if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-12)
            throw std::runtime_error(path.string() + ": feature row " + std::to_string(i) +
                                     " is not unit norm");
    }
    return data;
}

} // namespace hcd
