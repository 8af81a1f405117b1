#include "hcd/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace hcd {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 1;
constexpr int kExitUsage = 2;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

Optimizer parse_optimizer(const std::string& value) {
    if (value == "gd") return Optimizer::GD;
    if (value == "hybrid") return Optimizer::Hybrid;
    throw std::invalid_argument("optimizer must be 'gd' or 'hybrid', got '" + value + "'");
}

TimingMode parse_timing(const std::string& value) {
    if (value == "deterministic") return TimingMode::Deterministic;
    if (value == "wall") return TimingMode::Wallclock;
    throw std::invalid_argument("timing must be 'deterministic' or 'wall', got '" + value + "'");
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument(key + " must be true/false");
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    T out{};
    std::size_t consumed = 0;
    try {
        if constexpr (std::is_floating_point_v<T>) {
            out = std::stod(value, &consumed);
        } else {
            // stoull accepts and wraps negative input; reject it up front.
            if (value.find('-') != std::string::npos) throw std::out_of_range(key);
            const unsigned long long v = std::stoull(value, &consumed);
            out = static_cast<T>(v);
            if (static_cast<unsigned long long>(out) != v) throw std::out_of_range(key);
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
    }
    if (consumed != value.size())
        throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
    return out;
}

// Flag state shared by train/compare/sweep-dw. std::optional marks what the
// user actually passed, so flags can override a config file.
struct SharedFlags {
    std::optional<std::size_t> n, p, m, epochs;
    std::optional<double> dw, alpha, lr;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, config_file, timing;
    bool parallel_on = false;
    bool parallel_off = false;

    void register_on(CLI::App* cmd) {
        cmd->add_option("--n", n, "Sample count (default 10)");
        cmd->add_option("--p", p, "Feature dimension (default 1000)");
        cmd->add_option("--m", m, "Neuron count (default 100)");
        cmd->add_option("--dw", dw, "Gradient threshold and line-search step (default 0.5)");
        cmd->add_option("--alpha", alpha, "Jacobi blend coefficient (default 1/(m*p))");
        cmd->add_option("--lr", lr, "GD learning rate (default 1/n)");
        cmd->add_option("--epochs", epochs, "Epoch budget (default 100)");
        cmd->add_option("--seed", seed, "RNG seed (default 42)");
        cmd->add_flag("--parallel", parallel_on, "Compute coordinate targets in parallel (default)");
        cmd->add_flag("--no-parallel", parallel_off, "Force sequential coordinate targets");
        cmd->add_option("--out-dir", out_dir, "Output directory (default .)");
        cmd->add_option("--config", config_file, "Config file (key = value lines)");
        cmd->add_option("--timing", timing,
                        "elapsed_s source: 'deterministic' (reproducible cost model, default) "
                        "or 'wall' (monotonic clock)");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (config_file) cfg = load_config(*config_file);
        if (n) cfg.n = *n;
        if (p) cfg.p = *p;
        if (m) cfg.m = *m;
        if (dw) cfg.dw = *dw;
        if (alpha) cfg.alpha = *alpha;
        if (lr) cfg.lr = *lr;
        if (epochs) cfg.epochs = *epochs;
        if (seed) cfg.seed = RngSeed{*seed};
        if (parallel_on && parallel_off)
            throw std::invalid_argument("--parallel and --no-parallel are mutually exclusive");
        if (parallel_on) cfg.parallel = true;
        if (parallel_off) cfg.parallel = false;
        if (out_dir) cfg.output_dir = *out_dir;
        if (timing) cfg.timing = parse_timing(*timing);
        return cfg;
    }
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::string current;
    for (char c : csv) {
        if (c == ',') {
            items.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    items.push_back(current);
    return items;
}

int report_divergences(const SuiteResult& suite) {
    int status = kExitOk;
    for (const SuiteRun& run : suite.runs) {
        if (run.result.divergence) {
            std::cerr << "error: run '" << run.label << "' diverged at epoch "
                      << run.result.divergence->epoch << ": " << run.result.divergence->message
                      << "\n";
            status = kExitDiverged;
        }
    }
    return status;
}

int run_gen_data(std::size_t n, std::size_t p, std::uint64_t seed, const std::string& out) {
    const Dataset data = generate_dataset(n, p, RngSeed{seed});
    save_dataset(data, out);
    std::cout << "wrote " << out << " (" << n << " samples, " << p << " features)\n";
    return kExitOk;
}

int run_train(const SharedFlags& flags, const std::string& optimizer,
              const std::optional<std::string>& data_file, bool n_given, bool p_given) {
    ExperimentConfig cfg = flags.resolve();
    cfg.optimizer = parse_optimizer(optimizer);

    std::optional<Dataset> data;
    if (data_file) {
        data = load_dataset(*data_file);
        if (n_given && cfg.n != data->n())
            throw std::invalid_argument("--n disagrees with --data (" + std::to_string(cfg.n) +
                                        " vs " + std::to_string(data->n()) + ")");
        if (p_given && cfg.p != data->p())
            throw std::invalid_argument("--p disagrees with --data (" + std::to_string(cfg.p) +
                                        " vs " + std::to_string(data->p()) + ")");
        cfg.n = data->n();
        cfg.p = data->p();
    }
    validate(cfg);

    const RunResult result = data ? run_experiment(cfg, *data) : run_experiment(cfg);

    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path csv =
        cfg.output_dir / run_csv_name(cfg.optimizer, cfg.m, cfg.dw, cfg.seed);
    emit_csv(result.metrics, csv);
    const std::string label = cfg.optimizer == Optimizer::Hybrid ? "hybrid" : "gd";
    const std::vector<Curve> curves{{label, result.metrics}};
    emit_plot(curves, Axis::Epoch, cfg.output_dir / "train_epoch.svg");
    emit_plot(curves, Axis::ElapsedSeconds, cfg.output_dir / "train_time.svg");

    if (result.divergence) {
        std::cerr << "error: diverged at epoch " << result.divergence->epoch << ": "
                  << result.divergence->message << "\n";
        return kExitDiverged;
    }
    const EpochMetrics& last = result.metrics.back();
    std::cout << "wrote " << csv.string() << "; final loss " << last.loss << " after "
              << last.epoch << " epochs\n";
    return kExitOk;
}

int run_compare(const SharedFlags& flags, const std::string& m_list) {
    ExperimentConfig cfg = flags.resolve();
    std::vector<std::size_t> m_values;
    for (const std::string& item : split_list(m_list))
        m_values.push_back(parse_number<std::size_t>(trim(item), "--m-list"));
    const SuiteResult suite = compare_suite(cfg, m_values);
    std::cout << "wrote " << suite.csv_files.size() << " CSV files and " << suite.svg_files.size()
              << " SVG files to " << cfg.output_dir.string() << "\n";
    return report_divergences(suite);
}

int run_sweep(const SharedFlags& flags, const std::string& dw_list) {
    ExperimentConfig cfg = flags.resolve();
    std::vector<double> dw_values;
    for (const std::string& item : split_list(dw_list))
        dw_values.push_back(parse_number<double>(trim(item), "--dw-list"));
    const SuiteResult suite = sweep_dw(cfg, dw_values);
    std::cout << "wrote " << suite.csv_files.size() << " CSV files and " << suite.svg_files.size()
              << " SVG files to " << cfg.output_dir.string() << "\n";
    return report_divergences(suite);
}

int run_plot(const std::vector<std::string>& inputs, const std::string& axis,
             const std::string& out) {
    Axis x_axis;
    if (axis == "epoch") {
        x_axis = Axis::Epoch;
    } else if (axis == "time") {
        x_axis = Axis::ElapsedSeconds;
    } else {
        throw std::invalid_argument("--x must be 'epoch' or 'time', got '" + axis + "'");
    }
    std::vector<Curve> curves;
    for (const std::string& input : inputs) {
        const std::filesystem::path path(input);
        curves.push_back(Curve{path.stem().string(), load_metrics_csv(path)});
    }
    emit_plot(curves, x_axis, out);
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

} // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());

    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");

        if (key == "optimizer") {
            cfg.optimizer = parse_optimizer(value);
        } else if (key == "n") {
            cfg.n = parse_number<std::size_t>(value, key);
        } else if (key == "p") {
            cfg.p = parse_number<std::size_t>(value, key);
        } else if (key == "m") {
            cfg.m = parse_number<std::size_t>(value, key);
        } else if (key == "dw") {
            cfg.dw = parse_number<double>(value, key);
        } else if (key == "alpha") {
            cfg.alpha = parse_number<double>(value, key);
        } else if (key == "lr") {
            cfg.lr = parse_number<double>(value, key);
        } else if (key == "epochs") {
            cfg.epochs = parse_number<std::size_t>(value, key);
        } else if (key == "seed") {
            cfg.seed = RngSeed{parse_number<std::uint64_t>(value, key)};
        } else if (key == "parallel") {
            cfg.parallel = parse_bool(value, key);
        } else if (key == "out_dir") {
            cfg.output_dir = value;
        } else if (key == "timing") {
            cfg.timing = parse_timing(value);
        } else {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    validate(cfg);
    return cfg;
}

int parse_and_dispatch(int argc, const char* const* argv) {
    CLI::App app{"Hybrid Jacobi coordinate-descent trainer and benchmark for two-layer "
                 "ReLU regression"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset file");
    std::size_t gen_n = 10, gen_p = 1000;
    std::uint64_t gen_seed = 42;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Sample count (default 10)");
    gen->add_option("--p", gen_p, "Feature dimension (default 1000)");
    gen->add_option("--seed", gen_seed, "RNG seed (default 42)");
    gen->add_option("--out", gen_out, "Output path")->required();

    // train
    auto* train = app.add_subcommand("train", "Train one optimizer and emit CSV + SVG");
    SharedFlags train_flags;
    std::string train_optimizer;
    std::optional<std::string> train_data;
    train->add_option("--optimizer", train_optimizer, "gd | hybrid")->required();
    train_flags.register_on(train);
    train->add_option("--data", train_data, "Load dataset from file instead of generating");

    // compare
    auto* compare = app.add_subcommand("compare", "Run GD and hybrid across an m sweep");
    SharedFlags compare_flags;
    std::string compare_m_list = "100,500,1000";
    compare->add_option("--m-list", compare_m_list, "Comma-separated m values (default 100,500,1000)");
    compare_flags.register_on(compare);

    // sweep-dw
    auto* sweep = app.add_subcommand("sweep-dw", "Run hybrid across a dw sweep");
    SharedFlags sweep_flags;
    std::string sweep_dw_list = "0.1,0.5,1.0";
    sweep->add_option("--dw-list", sweep_dw_list, "Comma-separated dw values (default 0.1,0.5,1.0)");
    sweep_flags.register_on(sweep);

    // plot
    auto* plot = app.add_subcommand("plot", "Plot ln-loss curves from metric CSVs");
    std::vector<std::string> plot_inputs;
    std::string plot_axis = "epoch";
    std::string plot_out;
    plot->add_option("--inputs", plot_inputs, "Metric CSV files")->required()->expected(1, -1);
    plot->add_option("--x", plot_axis, "X axis: epoch | time (default epoch)");
    plot->add_option("--out", plot_out, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen_data(gen_n, gen_p, gen_seed, gen_out);
        if (train->parsed())
            return run_train(train_flags, train_optimizer, train_data,
                             train->count("--n") > 0, train->count("--p") > 0);
        if (compare->parsed()) return run_compare(compare_flags, compare_m_list);
        if (sweep->parsed()) return run_sweep(sweep_flags, sweep_dw_list);
        if (plot->parsed()) return run_plot(plot_inputs, plot_axis, plot_out);
    } catch (const DivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace hcd
