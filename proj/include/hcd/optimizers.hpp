#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hcd/coord_eval.hpp"
#include "hcd/model.hpp"

namespace hcd {

struct HybridConfig {
    double dw = 0.5;                  // gradient threshold and line-search increment
    double alpha = 1.0;               // Jacobi blend, (0, 1]; the harness damps
                                      // this to 1/(m*p) by default
    std::uint64_t max_probes = 10000; // per-coordinate probe budget per epoch
    bool parallel = true;
};

struct GdConfig {
    double lr = 0.1;
};

enum class UpdateRule : std::uint8_t { Gradient, LineSearch, NoChange };

struct CoordinateTarget {
    double value = 0.0;            // proposed coordinate value
    UpdateRule rule = UpdateRule::NoChange;
    std::uint32_t probes_used = 0; // 0 for Gradient, >= 2 otherwise
    bool probe_cap_hit = false;    // budget exhausted while still improving
};

struct EpochStats {
    double loss = 0.0;  // after the epoch's update
    std::uint64_t grad_updates = 0;
    std::uint64_t ls_updates = 0;
    std::uint64_t nochange_updates = 0;
    std::uint64_t ls_probes = 0;       // all perturbed-loss evaluations
    std::uint64_t probe_cap_hits = 0;  // coordinates that exhausted max_probes
};

// Thrown when an epoch produces non-finite parameters or loss.
class DivergedError : public std::runtime_error {
public:
    explicit DivergedError(const std::string& what) : std::runtime_error(what) {}
};

// Per-coordinate targets computed from one frozen state (Jacobi semantics).
struct EpochPlan {
    Matrix target;                          // m x p target values
    std::vector<UpdateRule> rule;           // m*p, row-major
    std::vector<std::uint32_t> probes;      // m*p, row-major
    std::vector<std::uint8_t> cap_hit;      // m*p, row-major
};

// Walk along coordinate (r, j) in steps of dw, starting from two probes at
// +/- dw, continuing in the better direction while the loss strictly
// improves. Equal first probes or no improvement over the frozen loss keep
// the coordinate unchanged.
CoordinateTarget line_search(const PreactivationCache& cache, const NetworkParams& params,
                             const Dataset& data, std::size_t r, std::size_t j,
                             double dw, std::uint64_t max_probes);

// Gradient rule when |grad_entry| >= dw (ties included), line search otherwise.
CoordinateTarget coordinate_target(const PreactivationCache& cache, const NetworkParams& params,
                                   const Dataset& data, double grad_entry,
                                   std::size_t r, std::size_t j, const HybridConfig& config);

// Targets for every (r, j), all computed from the frozen epoch-start state.
// Output is bit-identical whether run sequentially or in parallel.
EpochPlan plan_epoch(const PreactivationCache& cache, const Matrix& grad,
                     const NetworkParams& params, const Dataset& data,
                     const HybridConfig& config);

// One hybrid epoch: freeze state, compute all targets, apply the blend
// w <- w + alpha * (target - w) to every coordinate at once. a is untouched.
std::pair<NetworkParams, EpochStats> hybrid_epoch(const NetworkParams& params,
                                                  const Dataset& data,
                                                  const HybridConfig& config);

// Full-batch gradient step on w only.
std::pair<NetworkParams, EpochStats> gd_epoch(const NetworkParams& params,
                                              const Dataset& data,
                                              const GdConfig& config);

} // namespace hcd
