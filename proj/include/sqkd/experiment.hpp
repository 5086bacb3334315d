#pragma once

#include <iosfwd>
#include <vector>

#include "sqkd/config.hpp"

namespace sqkd::harness {

struct SweepPointSummary {
    double value = 0.0;  ///< swept parameter value (0 when no sweep)
    double kept_fraction = 0.0;
    double key_rate = 0.0;
    double error_rate = 0.0;
    double detection_flag_rate = 0.0;
};

struct ExperimentResult {
    std::vector<SweepPointSummary> points;
    /// Transcript of the first repetition of the first sweep point, for the
    /// simulate subcommand's per-round CSV.
    std::vector<protocol::RoundRecord> first_transcript;
};

/// Runs every (sweep point, repetition) session; all randomness derives from
/// master_seed, so the result is reproducible for any thread count.
/// Summaries average over repetitions. Infeasible parameter regimes
/// propagate as infeasible_error.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t master_seed,
                                int threads = 1);

/// Columns: value, kept_fraction, key_rate_symbols_per_round, error_rate,
/// detection_flag_rate. Floats carry 17 significant digits.
void write_summary_csv(const ExperimentResult& result, std::ostream& os);

struct TapScanRow {
    double reflectivity;
    double eve_stddev;
    double width_ratio;
    double typical_shift;
    bool eve_accurate;       ///< estimator spread within one bin
    bool disturbance_small;  ///< R < sigma * delta
};

/// Log-spaced reflectivity scan of the tap attack; a row with both flags set
/// would be a working attack point (none exists for secure parameters).
std::vector<TapScanRow> tap_scan(double r, double delta, int n_points, double R_min = 1e-4,
                                 double R_max = 1.0 - 1e-4);

void write_tap_scan_csv(const std::vector<TapScanRow>& rows, std::ostream& os);

}  // namespace sqkd::harness
