#include "hcd/optimizers.hpp"

#include <cmath>
#include <string>
#include <thread>
#include <vector>

namespace hcd {
namespace {

void validate(const HybridConfig& config) {
    if (!(config.dw > 0.0)) throw std::invalid_argument("dw must be > 0");
    if (!(config.alpha > 0.0) || config.alpha > 1.0)
        throw std::invalid_argument("alpha must be in (0, 1]");
    if (config.max_probes < 2) throw std::invalid_argument("max_probes must be >= 2");
}

bool all_finite(const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(m.data()[i])) return false;
    return true;
}

void check_indices(const NetworkParams& params, std::size_t r, std::size_t j) {
    if (r >= params.m())
        throw std::invalid_argument("neuron index " + std::to_string(r) + " out of range");
    if (j >= params.p())
        throw std::invalid_argument("feature index " + std::to_string(j) + " out of range");
}

EpochStats collect_stats(const EpochPlan& plan) {
    EpochStats stats;
    for (std::size_t i = 0; i < plan.rule.size(); ++i) {
        switch (plan.rule[i]) {
            case UpdateRule::Gradient: ++stats.grad_updates; break;
            case UpdateRule::LineSearch: ++stats.ls_updates; break;
            case UpdateRule::NoChange: ++stats.nochange_updates; break;
        }
        stats.ls_probes += plan.probes[i];
        stats.probe_cap_hits += plan.cap_hit[i];
    }
    return stats;
}

} // namespace

CoordinateTarget line_search(const PreactivationCache& cache, const NetworkParams& params,
                             const Dataset& data, std::size_t r, std::size_t j,
                             double dw, std::uint64_t max_probes) {
    check_indices(params, r, j);
    const double current = params.w(r, j);
    const double loss_up = perturbed_loss(cache, params, data, r, j, +dw);
    const double loss_down = perturbed_loss(cache, params, data, r, j, -dw);
    std::uint32_t probes = 2;

    // Equal probes: move on to the next weight.
    if (loss_up == loss_down) return {current, UpdateRule::NoChange, probes, false};

    const double direction = loss_up < loss_down ? 1.0 : -1.0;
    double best = loss_up < loss_down ? loss_up : loss_down;

    // Neither probe improves on the frozen loss: stay put.
    if (!(best < cache.base_loss)) return {current, UpdateRule::NoChange, probes, false};

    // Walk outward in increments of dw while strictly improving.
    std::uint64_t steps = 1;
    bool capped = false;
    for (;;) {
        if (probes >= max_probes) {
            capped = true;
            break;
        }
        const double next =
            perturbed_loss(cache, params, data, r, j, direction * static_cast<double>(steps + 1) * dw);
        ++probes;
        if (next < best) {
            best = next;
            ++steps;
        } else {
            break;
        }
    }

    const double value = current + direction * static_cast<double>(steps) * dw;
    return {value, UpdateRule::LineSearch, probes, capped};
}

CoordinateTarget coordinate_target(const PreactivationCache& cache, const NetworkParams& params,
                                   const Dataset& data, double grad_entry,
                                   std::size_t r, std::size_t j, const HybridConfig& config) {
    check_indices(params, r, j);
    if (std::abs(grad_entry) >= config.dw)
        return {params.w(r, j) - grad_entry, UpdateRule::Gradient, 0, false};
    return line_search(cache, params, data, r, j, config.dw, config.max_probes);
}

EpochPlan plan_epoch(const PreactivationCache& cache, const Matrix& grad,
                     const NetworkParams& params, const Dataset& data,
                     const HybridConfig& config) {
    validate(config);
    const std::size_t m = params.m();
    const std::size_t p = params.p();

    EpochPlan plan;
    plan.target = Matrix(m, p);
    plan.rule.resize(m * p);
    plan.probes.resize(m * p);
    plan.cap_hit.resize(m * p);

    auto run_rows = [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t r = row_begin; r < row_end; ++r) {
            for (std::size_t j = 0; j < p; ++j) {
                const CoordinateTarget t =
                    coordinate_target(cache, params, data, grad(r, j), r, j, config);
                plan.target(r, j) = t.value;
                plan.rule[r * p + j] = t.rule;
                plan.probes[r * p + j] = t.probes_used;
                plan.cap_hit[r * p + j] = t.probe_cap_hit ? 1 : 0;
            }
        }
    };

    const unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = config.parallel && hw > 1 ? std::min<std::size_t>(hw, m) : 1;
    if (workers <= 1) {
        run_rows(0, m);
        return plan;
    }

    // Each task owns a disjoint row range of the frozen state; results are
    // bit-identical to the sequential pass.
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (m + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(m, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_rows, begin, end);
    }
    pool.clear();  // join
    return plan;
}

std::pair<NetworkParams, EpochStats> hybrid_epoch(const NetworkParams& params,
                                                  const Dataset& data,
                                                  const HybridConfig& config) {
    validate(config);
    const PreactivationCache cache = build_cache(params, data);
    const Matrix grad = gradient(params, data);
    const EpochPlan plan = plan_epoch(cache, grad, params, data, config);

    NetworkParams next = params;
    const std::size_t m = params.m();
    const std::size_t p = params.p();
    for (std::size_t r = 0; r < m; ++r) {
        double* row = next.w.row_ptr(r);
        const double* target_row = plan.target.row_ptr(r);
        for (std::size_t j = 0; j < p; ++j)
            row[j] += config.alpha * (target_row[j] - row[j]);
    }

    EpochStats stats = collect_stats(plan);
    stats.loss = loss(next, data);
    if (!std::isfinite(stats.loss) || !all_finite(next.w))
        throw DivergedError("hybrid epoch produced non-finite loss or weights");
    return {std::move(next), stats};
}

std::pair<NetworkParams, EpochStats> gd_epoch(const NetworkParams& params,
                                              const Dataset& data,
                                              const GdConfig& config) {
    if (!(config.lr > 0.0)) throw std::invalid_argument("lr must be > 0");
    const Matrix grad = gradient(params, data);

    NetworkParams next = params;
    const std::size_t m = params.m();
    const std::size_t p = params.p();
    for (std::size_t r = 0; r < m; ++r) {
        double* row = next.w.row_ptr(r);
        const double* grow = grad.row_ptr(r);
        for (std::size_t j = 0; j < p; ++j) row[j] -= config.lr * grow[j];
    }

    EpochStats stats;
    stats.loss = loss(next, data);
    if (!std::isfinite(stats.loss) || !all_finite(next.w))
        throw DivergedError("gd epoch produced non-finite loss or weights");
    return {std::move(next), stats};
}

} // namespace hcd
