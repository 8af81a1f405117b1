#include "hcd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hcd {
namespace {

constexpr const char* kCsvHeader =
    "epoch,loss,ln_loss,elapsed_s,grad_updates,ls_updates,nochange_updates,ls_probes,cache_bytes";

// Nominal rate for the deterministic cost model: 1e9 work units per second.
// One unit is roughly one multiply-add. Keeps emitted artifacts
// byte-reproducible while preserving the relative cost structure.
constexpr double kSecondsPerUnit = 1e-9;

std::uint64_t gd_epoch_units(std::size_t n, std::size_t m, std::size_t p) {
    return 2ull * n * m * p + static_cast<std::uint64_t>(m) * p;
}

std::uint64_t hybrid_epoch_units(std::size_t n, std::size_t m, std::size_t p,
                                 std::uint64_t probes) {
    return 3ull * n * m * p + 2ull * n * probes + static_cast<std::uint64_t>(m) * p;
}

std::uint64_t hybrid_cache_bytes(std::size_t n, std::size_t m) {
    return 8ull * (static_cast<std::uint64_t>(m) * n + 2ull * n + 1ull);
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_real(const std::string& field, const std::filesystem::path& path, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
        throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                 ": bad real value '" + field + "'");
    return v;
}

std::uint64_t parse_count(const std::string& field, const std::filesystem::path& path,
                          std::size_t line) {
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0')
        throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                 ": bad count value '" + field + "'");
    return v;
}

std::string format_dw(double dw) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", dw);
    return buf;
}

EpochMetrics make_metrics(std::uint64_t epoch, double loss_value, double elapsed_s,
                          const EpochStats& stats, std::uint64_t cache_bytes) {
    EpochMetrics row;
    row.epoch = epoch;
    row.loss = loss_value;
    row.ln_loss = std::log(loss_value);
    row.elapsed_s = elapsed_s;
    row.grad_updates = stats.grad_updates;
    row.ls_updates = stats.ls_updates;
    row.nochange_updates = stats.nochange_updates;
    row.ls_probes = stats.ls_probes;
    row.cache_bytes = cache_bytes;
    return row;
}

} // namespace

void validate(const ExperimentConfig& config) {
    if (config.n == 0) throw std::invalid_argument("n must be >= 1");
    if (config.p == 0) throw std::invalid_argument("p must be >= 1");
    if (config.m == 0) throw std::invalid_argument("m must be >= 1");
    if (config.epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (!(config.dw > 0.0)) throw std::invalid_argument("dw must be > 0");
    const double alpha = config.alpha_or_default();
    if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(config.lr_or_default() > 0.0)) throw std::invalid_argument("lr must be > 0");
}

RunResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    return run_experiment(config, generate_dataset(config.n, config.p, config.seed));
}

RunResult run_experiment(const ExperimentConfig& config, const Dataset& data) {
    validate(config);
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t m = config.m;

    NetworkParams params = init_params(m, p, config.seed);

    HybridConfig hybrid;
    hybrid.dw = config.dw;
    hybrid.alpha = config.alpha ? *config.alpha : 1.0 / static_cast<double>(m * p);
    hybrid.parallel = config.parallel;
    GdConfig gd;
    gd.lr = config.lr ? *config.lr : 1.0 / static_cast<double>(n);

    RunResult result;
    result.metrics.push_back(make_metrics(0, loss(params, data), 0.0, EpochStats{}, 0));

    double elapsed_s = 0.0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochStats stats;
        try {
            const auto start = std::chrono::steady_clock::now();
            if (config.optimizer == Optimizer::Hybrid) {
                auto [next, s] = hybrid_epoch(params, data, hybrid);
                params = std::move(next);
                stats = s;
            } else {
                auto [next, s] = gd_epoch(params, data, gd);
                params = std::move(next);
                stats = s;
            }
            const auto stop = std::chrono::steady_clock::now();

            if (config.timing == TimingMode::Wallclock) {
                elapsed_s += std::chrono::duration<double>(stop - start).count();
            } else {
                const std::uint64_t units = config.optimizer == Optimizer::Hybrid
                                                ? hybrid_epoch_units(n, m, p, stats.ls_probes)
                                                : gd_epoch_units(n, m, p);
                elapsed_s += static_cast<double>(units) * kSecondsPerUnit;
            }
        } catch (const DivergedError& err) {
            result.divergence = Divergence{epoch, err.what()};
            break;
        }

        const std::uint64_t bytes =
            config.optimizer == Optimizer::Hybrid ? hybrid_cache_bytes(n, m) : 0;
        result.metrics.push_back(make_metrics(epoch, stats.loss, elapsed_s, stats, bytes));
    }
    return result;
}

void emit_csv(const std::vector<EpochMetrics>& metrics, const std::filesystem::path& path) {
    if (metrics.empty()) throw std::invalid_argument("emit_csv: empty metrics sequence");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << kCsvHeader << '\n';
    for (const EpochMetrics& row : metrics) {
        out << row.epoch << ',' << format_real(row.loss) << ',' << format_real(row.ln_loss) << ','
            << format_real(row.elapsed_s) << ',' << row.grad_updates << ',' << row.ls_updates
            << ',' << row.nochange_updates << ',' << row.ls_probes << ',' << row.cache_bytes
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<EpochMetrics> load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error(path.string() + ": unexpected CSV header");

    std::vector<EpochMetrics> metrics;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 9)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 9 fields, got " + std::to_string(fields.size()));
        EpochMetrics row;
        row.epoch = parse_count(fields[0], path, lineno);
        row.loss = parse_real(fields[1], path, lineno);
        row.ln_loss = parse_real(fields[2], path, lineno);
        row.elapsed_s = parse_real(fields[3], path, lineno);
        row.grad_updates = parse_count(fields[4], path, lineno);
        row.ls_updates = parse_count(fields[5], path, lineno);
        row.nochange_updates = parse_count(fields[6], path, lineno);
        row.ls_probes = parse_count(fields[7], path, lineno);
        row.cache_bytes = parse_count(fields[8], path, lineno);
        metrics.push_back(row);
    }
    if (metrics.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return metrics;
}

std::string run_csv_name(Optimizer optimizer, std::size_t m, double dw, RngSeed seed) {
    std::string name = optimizer == Optimizer::Hybrid ? "hybrid" : "gd";
    name += "_m" + std::to_string(m);
    name += "_dw" + format_dw(dw);
    name += "_seed" + std::to_string(seed.value);
    name += ".csv";
    return name;
}

namespace {

void emit_suite_artifacts(SuiteResult& suite, const ExperimentConfig& base,
                          const std::string& suite_name) {
    std::filesystem::create_directories(base.output_dir);
    std::vector<Curve> curves;
    for (const SuiteRun& run : suite.runs) {
        const std::filesystem::path csv =
            base.output_dir /
            run_csv_name(run.config.optimizer, run.config.m, run.config.dw, run.config.seed);
        emit_csv(run.result.metrics, csv);
        suite.csv_files.push_back(csv);
        curves.push_back(Curve{run.label, run.result.metrics});
    }
    const std::filesystem::path epoch_svg = base.output_dir / (suite_name + "_epoch.svg");
    const std::filesystem::path time_svg = base.output_dir / (suite_name + "_time.svg");
    emit_plot(curves, Axis::Epoch, epoch_svg);
    emit_plot(curves, Axis::ElapsedSeconds, time_svg);
    suite.svg_files.push_back(epoch_svg);
    suite.svg_files.push_back(time_svg);
}

} // namespace

SuiteResult compare_suite(const ExperimentConfig& base, const std::vector<std::size_t>& m_values) {
    if (m_values.empty()) throw std::invalid_argument("compare_suite: empty m list");
    validate(base);
    const Dataset data = generate_dataset(base.n, base.p, base.seed);

    SuiteResult suite;
    for (std::size_t m : m_values) {
        for (Optimizer opt : {Optimizer::GD, Optimizer::Hybrid}) {
            ExperimentConfig config = base;
            config.m = m;
            config.optimizer = opt;
            const std::string label =
                std::string(opt == Optimizer::Hybrid ? "hybrid" : "gd") + " m=" + std::to_string(m);
            suite.runs.push_back(SuiteRun{label, config, run_experiment(config, data)});
        }
    }
    emit_suite_artifacts(suite, base, "compare");
    return suite;
}

SuiteResult sweep_dw(const ExperimentConfig& base, const std::vector<double>& dw_values) {
    if (dw_values.empty()) throw std::invalid_argument("sweep_dw: empty dw list");
    for (double dw : dw_values)
        if (!(dw > 0.0)) throw std::invalid_argument("sweep_dw: dw values must be > 0");
    validate(base);
    const Dataset data = generate_dataset(base.n, base.p, base.seed);

    SuiteResult suite;
    for (double dw : dw_values) {
        ExperimentConfig config = base;
        config.optimizer = Optimizer::Hybrid;
        config.dw = dw;
        suite.runs.push_back(
            SuiteRun{"dw=" + format_dw(dw), config, run_experiment(config, data)});
    }
    emit_suite_artifacts(suite, base, "sweep_dw");
    return suite;
}

} // namespace hcd
