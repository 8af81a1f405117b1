#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hcd/model.hpp"
#include "hcd/optimizers.hpp"

namespace hcd {

enum class Optimizer { GD, Hybrid };

// How elapsed_s is filled in. Deterministic mode charges an analytic cost
// model (operation counts at a nominal 1e9 units/s), so repeated runs emit
// byte-identical artifacts; wall mode records the monotonic clock around
// optimizer calls only.
enum class TimingMode { Deterministic, Wallclock };

struct ExperimentConfig {
    Optimizer optimizer = Optimizer::Hybrid;
    std::size_t n = 10;
    std::size_t p = 1000;
    std::size_t m = 100;
    double dw = 0.5;
    std::optional<double> alpha;  // default 1/(m*p), see below
    std::optional<double> lr;     // default 1/n
    std::size_t epochs = 100;
    RngSeed seed{42};
    bool parallel = true;
    TimingMode timing = TimingMode::Deterministic;
    std::filesystem::path output_dir = ".";

    // The Jacobi step averages the per-coordinate minimizers, so the blend
    // is damped by the number of coordinates updated simultaneously. This
    // contracts residuals by about (1 - 1/n) per epoch; anything much
    // larger lets the simultaneous targets overshoot and diverge.
    double alpha_or_default() const {
        return alpha ? *alpha : 1.0 / static_cast<double>(m * p);
    }
    double lr_or_default() const { return lr ? *lr : 1.0 / static_cast<double>(n); }
};

// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig& config);

struct EpochMetrics {
    std::uint64_t epoch = 0;
    double loss = 0.0;
    double ln_loss = 0.0;   // -inf when loss == 0
    double elapsed_s = 0.0; // cumulative since training start
    std::uint64_t grad_updates = 0;
    std::uint64_t ls_updates = 0;
    std::uint64_t nochange_updates = 0;
    std::uint64_t ls_probes = 0;
    std::uint64_t cache_bytes = 0;

    bool operator==(const EpochMetrics&) const = default;
};

struct Divergence {
    std::size_t epoch = 0;
    std::string message;
};

struct RunResult {
    std::vector<EpochMetrics> metrics;  // epoch 0 anchor + one row per epoch
    std::optional<Divergence> divergence;
};

// Generates data and params from the seed and trains for config.epochs.
// Row 0 anchors the pre-training loss. Pure compute, writes nothing.
RunResult run_experiment(const ExperimentConfig& config);

// Same, but on a caller-supplied dataset (n, p are taken from it).
RunResult run_experiment(const ExperimentConfig& config, const Dataset& data);

// CSV schema:
// epoch,loss,ln_loss,elapsed_s,grad_updates,ls_updates,nochange_updates,ls_probes,cache_bytes
// Reals at 17 significant digits; byte-deterministic for identical metrics.
void emit_csv(const std::vector<EpochMetrics>& metrics, const std::filesystem::path& path);
std::vector<EpochMetrics> load_metrics_csv(const std::filesystem::path& path);

enum class Axis { Epoch, ElapsedSeconds };

struct Curve {
    std::string label;
    std::vector<EpochMetrics> metrics;
};

// Static SVG line chart of ln_loss against the chosen axis, one polyline
// per curve. Deterministic bytes for identical input.
void emit_plot(const std::vector<Curve>& curves, Axis x_axis, const std::filesystem::path& path);

// {optimizer}_m{m}_dw{dw}_seed{seed}.csv
std::string run_csv_name(Optimizer optimizer, std::size_t m, double dw, RngSeed seed);

struct SuiteRun {
    std::string label;
    ExperimentConfig config;
    RunResult result;
};

struct SuiteResult {
    std::vector<SuiteRun> runs;
    std::vector<std::filesystem::path> csv_files;
    std::vector<std::filesystem::path> svg_files;
};

// For each m: GD and hybrid on the same seed and dataset. Per-run CSVs plus
// combined epoch- and time-axis plots. Failed runs are recorded and the
// rest continue.
SuiteResult compare_suite(const ExperimentConfig& base, const std::vector<std::size_t>& m_values);

// Hybrid once per dw on identical data, CSVs plus combined plots.
SuiteResult sweep_dw(const ExperimentConfig& base, const std::vector<double>& dw_values);

} // namespace hcd
