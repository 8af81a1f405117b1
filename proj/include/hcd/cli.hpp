#pragma once

#include <filesystem>

#include "hcd/harness.hpp"

namespace hcd {

// Flat "key = value" config file, '#' comments, one pair per line.
// Unknown keys and invariant violations are errors naming the key.
ExperimentConfig load_config(const std::filesystem::path& path);

// Subcommands: gen-data, train, compare, sweep-dw, plot.
// Returns 0 on success, 2 on usage errors, 1 on runtime divergence.
int parse_and_dispatch(int argc, const char* const* argv);

} // namespace hcd
