#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sqkd/channel.hpp"
#include "sqkd/gaussian.hpp"

namespace sqkd::protocol {

/// Quantization of a quadrature axis into bins of width delta spanning
/// [-half_range, +half_range); bin k covers [-half_range + k*delta,
/// -half_range + (k+1)*delta) and carries one alphabet symbol. Outcomes
/// beyond the span map to the nearest edge bin. delta < 1/2 is the secure
/// regime; wider bins are constructible for attack studies but rejected by
/// the config loader.
struct BinningScheme {
    double delta;
    double half_range;
    int n_bins;
    std::vector<std::string> alphabet;

    static BinningScheme create(double delta, double half_range);

    int bin_of(double x) const;
    double center(int bin) const { return -half_range + (bin + 0.5) * delta; }
    bool secure() const { return delta < 0.5; }

    /// How many bins a state of the given transverse width substantially
    /// overlaps (width / delta).
    double bins_overlapped(double width) const { return width / delta; }
};

struct EveNone {};
/// Full intercept: 50-50 split, X1 measured on one output and X2 on the
/// other, then a coherent state re-sent centered on the (rescaled) results.
struct EveInterceptCoherent {};
/// Full intercept: random-axis homodyne, then a squeezed state re-sent on
/// that axis centered on the outcome.
struct EveInterceptSqueezed {
    double r_eve;
};
/// Passive tap: reflectivity R diverted to Eve's homodyne, the transmitted
/// (conditioned) remainder forwarded to Bob.
struct EveBeamSplitterTap {
    double reflectivity;
};
/// Eve reads the (assumed leaked) amplifier setting, measures that
/// quadrature and re-sends a squeezed state on it. Undetectable unless the
/// amplifier axis is randomized independently of Alice's choice.
struct EveAmplifierAware {};

using EveStrategy =
    std::variant<EveNone, EveInterceptCoherent, EveInterceptSqueezed, EveBeamSplitterTap,
                 EveAmplifierAware>;

struct AmplifierConfig {
    double gain = 1.0;
    bool randomized = true;
};

struct DetectionConfig {
    double baseline_error = 3.9e-4;
    double threshold_multiplier = 3.0;
};

/// Bin grid spanning one anti-squeezed standard deviation (e^r / 2) on each
/// side, the coverage that makes the two state families indistinguishable
/// from a single measurement.
BinningScheme default_binning(double r, double delta = 0.125);

struct SessionConfig {
    double r = 3.35;
    BinningScheme binning = default_binning(3.35);
    double gamma_T = 0.0;
    std::optional<AmplifierConfig> amplifier;
    long n_rounds = 10000;
    double check_fraction = 0.25;
    DetectionConfig detection;
    EveStrategy eve = EveNone{};
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the violated invariant. Sessions
    /// with delta >= 1/2 are only accepted when explicitly allowed (attack
    /// studies of the insecure regime).
    void validate(bool allow_insecure_delta = false) const;
};

struct RoundRecord {
    Quadrature alice_axis;
    int alice_bin;
    double alice_value;  ///< bin center Alice encoded
    std::optional<Quadrature> amp_axis;
    Quadrature bob_axis;
    double bob_value;  ///< raw homodyne outcome
    std::optional<int> bob_bin;
    bool kept;
    bool used_for_check;
};

struct AlicePreparation {
    GaussianMode mode;
    Quadrature axis;
    int bin;
};

/// Uniform random axis and bin; the transmitted state is squeezed on that
/// axis and centered on the bin center.
AlicePreparation alice_prepare(const BinningScheme& binning, double r, Rng& rng);

/// Uniform random measurement axis, outcome from the Gaussian marginal.
std::pair<Quadrature, HomodyneSample> bob_measure(const GaussianMode& mode, Rng& rng);

/// One full round: preparation, optional tap, channel (bare or amplified),
/// optional intercept-resend, measurement, sift decision and binning of the
/// rescaled estimator.
RoundRecord run_round(const SessionConfig& config, Rng& rng);

/// The estimator rescaling Bob applies to a raw outcome for this link
/// (e^{gT/2}, divided by G when the amplifier boosted his axis, multiplied
/// by G when it boosted the conjugate one).
double bob_rescale_factor(const SessionConfig& config, Quadrature bob_axis,
                          std::optional<Quadrature> amp_axis);

struct SiftResult {
    std::vector<std::size_t> key_rounds;  ///< indices of kept records
    std::vector<std::size_t> discarded;
    std::vector<std::string> alice_symbols;
    std::vector<std::string> bob_symbols;
};

SiftResult sift(const std::vector<RoundRecord>& transcript, const BinningScheme& binning);

/// Mismatched-amplifier audit (only meaningful with a randomized amplifier):
/// rounds with matching preparation/measurement but the wrong amplifier axis
/// carry a hugely dispersed but correctly centered estimator; an intercepting
/// Eve changes that dispersion by orders of magnitude in either direction.
struct WrongAmpAudit {
    long rounds = 0;
    long mismatches = 0;  ///< residuals beyond 3x the predicted spread
    bool flagged = false;
    double empirical_spread = 0.0;
    double predicted_spread = 0.0;
};

struct DetectionReport {
    long checked_rounds = 0;
    long mismatches = 0;
    double observed_error_rate = 0.0;
    double expected_error_rate = 0.0;
    bool eavesdropper_flagged = false;
    std::optional<WrongAmpAudit> wrong_amp_check;
};

/// Samples check_fraction of the kept rounds (marking used_for_check),
/// compares symbols, and flags when the observed error rate exceeds
/// threshold_multiplier x baseline with one-sided binomial significance
/// 0.01. With a randomized amplifier the wrong-axis audit runs as well.
DetectionReport detect(std::vector<RoundRecord>& transcript, const SessionConfig& config,
                       Rng& rng);

/// One-sided binomial tail P(X >= k) for X ~ Binomial(n, p).
double binomial_tail(long n, double p, long k);

struct TapAttackFigures {
    double eve_estimator_stddev;  ///< sqrt((T/R + sigma^2)) / 2
    double bob_width_ratio;       ///< conditioned width / original width = 1/sqrt(T + sigma^2 R)
    double bob_center_shift;      ///< -s R / 2 + y sqrt(R) at the typical outcome y = -sqrt(R) s
};

/// Closed-form figures of merit of a beam-splitter tap of reflectivity R on
/// a squeezed state centered at s with sigma = e^{-r}.
TapAttackFigures tap_attack_analysis(double reflectivity, double r, double s);

struct SessionResult {
    std::vector<RoundRecord> transcript;
    DetectionReport report;
    double kept_fraction = 0.0;
    double key_rate = 0.0;        ///< kept-and-unchecked symbols per round
    double key_error_rate = 0.0;  ///< bin mismatches across all kept rounds
};

/// Runs n_rounds rounds with per-round rng streams derived from the config
/// seed, then the detection pass. Byte-for-byte reproducible for one seed.
SessionResult run_session(const SessionConfig& config);

/// Columns: round, alice_axis, alice_bin, amp_axis, bob_axis, bob_value,
/// bob_bin, kept, checked, mismatch. Floats carry 17 significant digits.
void write_transcript_csv(const std::vector<RoundRecord>& transcript, std::ostream& os);

}  // namespace sqkd::protocol
