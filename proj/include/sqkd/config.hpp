#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqkd/protocol.hpp"

namespace sqkd::harness {

/// Configuration or parse failure; the message carries the file and, for
/// syntax errors, the line number.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::string parameter;  ///< dotted numeric path, e.g. "gamma_T" or "binning.delta"
    std::vector<double> values;
};

struct ExperimentSpec {
    std::string name = "experiment";
    protocol::SessionConfig session;
    double s_margin = 0.14;
    std::optional<SweepSpec> sweep;
    int repetitions = 1;
    std::string output_path = "experiment";
    /// True when binning.half_range was defaulted from r; sweeping r then
    /// re-derives it.
    bool half_range_defaulted = true;
};

/// Parses and fully validates a JSON experiment spec; every nested invariant
/// is enforced here, so a returned spec is runnable as-is. An empty or
/// minimal document yields the documented defaults (r = 3.35, delta = 0.125,
/// s_margin = 0.14).
ExperimentSpec load_config(const std::string& path);
ExperimentSpec parse_config(const std::string& text, const std::string& origin);

/// Applies one sweep value to the named parameter, returning the adjusted
/// session. Throws config_error for an unknown path.
protocol::SessionConfig apply_sweep_value(const ExperimentSpec& spec, double value);

}  // namespace sqkd::harness
