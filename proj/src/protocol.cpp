#include "sqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace sqkd::protocol {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

Quadrature random_axis(Rng& rng) { return coin(rng) ? Quadrature::X1 : Quadrature::X2; }

double normal_with(Rng& rng, double mean, double var) {
    return mean + std::sqrt(var) * normal01(rng);
}

}  // namespace

BinningScheme BinningScheme::create(double delta, double half_range) {
    if (!(delta > 0.0)) fail("BinningScheme: delta must be positive");
    if (!(half_range > 0.0)) fail("BinningScheme: half_range must be positive");
    const int n = static_cast<int>(std::floor(2.0 * half_range / delta));
    if (n < 2) fail("BinningScheme: fewer than two bins");
    BinningScheme b;
    b.delta = delta;
    b.half_range = half_range;
    b.n_bins = n;
    b.alphabet.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) b.alphabet.push_back(std::to_string(k));
    return b;
}

int BinningScheme::bin_of(double x) const {
    const int k = static_cast<int>(std::floor((x + half_range) / delta));
    return std::clamp(k, 0, n_bins - 1);
}

BinningScheme default_binning(double r, double delta) {
    return BinningScheme::create(delta, std::exp(r) / 2.0);
}

void SessionConfig::validate(bool allow_insecure_delta) const {
    if (!(r >= 0.0)) fail("SessionConfig: r must be nonnegative");
    if (!(gamma_T >= 0.0)) fail("SessionConfig: gamma_T must be nonnegative");
    if (!allow_insecure_delta && !binning.secure()) fail("SessionConfig: delta must be < 1/2");
    if (binning.n_bins < 2) fail("SessionConfig: fewer than two bins");
    if (n_rounds < 1) fail("SessionConfig: n_rounds must be >= 1");
    if (!(check_fraction > 0.0 && check_fraction < 1.0))
        fail("SessionConfig: check_fraction must lie in (0, 1)");
    if (check_fraction * static_cast<double>(n_rounds) < 30.0)
        fail("SessionConfig: check_fraction * n_rounds must be >= 30");
    if (!(detection.baseline_error >= 0.0 && detection.baseline_error < 1.0))
        fail("SessionConfig: baseline_error must lie in [0, 1)");
    if (!(detection.threshold_multiplier > 1.0))
        fail("SessionConfig: threshold_multiplier must exceed 1");
    if (amplifier && !(amplifier->gain >= 1.0)) fail("SessionConfig: amplifier gain must be >= 1");
    if (std::holds_alternative<EveBeamSplitterTap>(eve)) {
        const double R = std::get<EveBeamSplitterTap>(eve).reflectivity;
        if (!(R > 0.0 && R < 1.0)) fail("SessionConfig: tap reflectivity must lie in (0, 1)");
    }
    if (std::holds_alternative<EveInterceptSqueezed>(eve) &&
        !(std::get<EveInterceptSqueezed>(eve).r_eve >= 0.0))
        fail("SessionConfig: r_eve must be nonnegative");
    if (std::holds_alternative<EveAmplifierAware>(eve) && !amplifier)
        fail("SessionConfig: amplifier-aware Eve requires an amplifier");
}

AlicePreparation alice_prepare(const BinningScheme& binning, double r, Rng& rng) {
    const Quadrature axis = random_axis(rng);
    const int bin = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(binning.n_bins)));
    return AlicePreparation{squeezed_state(axis, binning.center(bin), r), axis, bin};
}

std::pair<Quadrature, HomodyneSample> bob_measure(const GaussianMode& mode, Rng& rng) {
    const Quadrature axis = random_axis(rng);
    return {axis, sample_homodyne(mode, axis, rng)};
}

double bob_rescale_factor(const SessionConfig& config, Quadrature bob_axis,
                          std::optional<Quadrature> amp_axis) {
    double scale = std::exp(config.gamma_T / 2.0);
    if (config.amplifier && amp_axis) {
        if (*amp_axis == bob_axis)
            scale /= config.amplifier->gain;
        else
            scale *= config.amplifier->gain;
    }
    return scale;
}

RoundRecord run_round(const SessionConfig& config, Rng& rng) {
    const AlicePreparation prep = alice_prepare(config.binning, config.r, rng);
    GaussianMode mode = prep.mode;

    std::optional<Quadrature> amp_axis;
    if (config.amplifier)
        amp_axis = config.amplifier->randomized ? random_axis(rng) : prep.axis;

    // Passive tap before the fiber: Eve keeps the reflected port, Bob's state
    // is the transmitted mode conditioned on her outcome.
    if (const auto* tap = std::get_if<EveBeamSplitterTap>(&config.eve)) {
        const TwoModeGaussianState split =
            apply_beam_splitter(embed_with_vacuum(mode), 1.0 - tap->reflectivity,
                                tap->reflectivity);
        const Quadrature eve_axis = random_axis(rng);
        const int idx = TwoModeGaussianState::index(eve_axis, 2);
        const double outcome =
            normal_with(rng, split.mean[static_cast<std::size_t>(idx)], split.c(idx, idx));
        mode = condition_on_homodyne(split, 2, eve_axis, outcome);
    }

    if (config.amplifier)
        mode = amplified_link(
            mode, config.gamma_T,
            PhaseSensitiveAmplifier::create(config.amplifier->gain, *amp_axis));
    else
        mode = loss_evolve(mode, config.gamma_T);

    // Intercept-resend strategies capture the full signal at Bob's end of the
    // link and forward a fresh state.
    if (std::holds_alternative<EveInterceptSqueezed>(config.eve)) {
        const double r_eve = std::get<EveInterceptSqueezed>(config.eve).r_eve;
        const Quadrature eve_axis = random_axis(rng);
        const double m = sample_homodyne(mode, eve_axis, rng).value;
        mode = squeezed_state(eve_axis, m, r_eve);
    } else if (std::holds_alternative<EveInterceptCoherent>(config.eve)) {
        // 50-50 split, X1 read at one output and X2 at the other; the raw
        // outcomes are rescaled to unbiased estimates of the input means.
        const TwoModeGaussianState split =
            apply_beam_splitter(embed_with_vacuum(mode), 0.5, 0.5);
        const int i11 = TwoModeGaussianState::index(Quadrature::X1, 1);
        const int i22 = TwoModeGaussianState::index(Quadrature::X2, 2);
        const double raw1 =
            normal_with(rng, split.mean[static_cast<std::size_t>(i11)], split.c(i11, i11));
        const double raw2 =
            normal_with(rng, split.mean[static_cast<std::size_t>(i22)], split.c(i22, i22));
        const double x1m = raw1 / std::sqrt(0.5);
        const double x2m = -raw2 / std::sqrt(0.5);
        mode = GaussianMode::create(x1m, x2m, 0.25, 0.25);
    } else if (std::holds_alternative<EveAmplifierAware>(config.eve)) {
        const Quadrature eve_axis = *amp_axis;  // the leaked setting
        const double m = sample_homodyne(mode, eve_axis, rng).value;
        mode = squeezed_state(eve_axis, m, config.r);
    }

    const auto [bob_axis, sample] = bob_measure(mode, rng);

    RoundRecord rec;
    rec.alice_axis = prep.axis;
    rec.alice_bin = prep.bin;
    rec.alice_value = config.binning.center(prep.bin);
    rec.amp_axis = amp_axis;
    rec.bob_axis = bob_axis;
    rec.bob_value = sample.value;
    const double scale = bob_rescale_factor(config, bob_axis, amp_axis);
    rec.bob_bin = config.binning.bin_of(scale * sample.value);
    rec.kept = bob_axis == prep.axis &&
               (!config.amplifier || !config.amplifier->randomized || *amp_axis == prep.axis);
    rec.used_for_check = false;
    return rec;
}

SiftResult sift(const std::vector<RoundRecord>& transcript, const BinningScheme& binning) {
    SiftResult out;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const RoundRecord& rec = transcript[i];
        if (rec.kept) {
            out.key_rounds.push_back(i);
            out.alice_symbols.push_back(binning.alphabet[static_cast<std::size_t>(rec.alice_bin)]);
            out.bob_symbols.push_back(
                binning.alphabet[static_cast<std::size_t>(rec.bob_bin.value_or(0))]);
        } else {
            out.discarded.push_back(i);
        }
    }
    return out;
}

double binomial_tail(long n, double p, long k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // Direct sum of the pmf from k upward in log space; terms fall off fast
    // past the mean, stop when negligible.
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    double tail = 0.0;
    for (long j = k; j <= n; ++j) {
        const double lpmf = lgn - std::lgamma(static_cast<double>(j) + 1.0) -
                            std::lgamma(static_cast<double>(n - j) + 1.0) +
                            static_cast<double>(j) * lp + static_cast<double>(n - j) * lq;
        const double term = std::exp(lpmf);
        tail += term;
        if (j > static_cast<long>(p * static_cast<double>(n)) && term < tail * 1e-15) break;
    }
    return std::min(tail, 1.0);
}

DetectionReport detect(std::vector<RoundRecord>& transcript, const SessionConfig& config,
                       Rng& rng) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < transcript.size(); ++i)
        if (transcript[i].kept) kept.push_back(i);

    const long want = std::lround(config.check_fraction * static_cast<double>(kept.size()));
    if (kept.empty() || want < 1)
        throw std::runtime_error("detect: insufficient check sample (no kept rounds to compare)");
    const std::size_t n_check = static_cast<std::size_t>(want);

    // Partial Fisher-Yates: the first n_check entries become the check set.
    for (std::size_t i = 0; i < n_check; ++i) {
        const std::size_t j = i + uniform_index(rng, kept.size() - i);
        std::swap(kept[i], kept[j]);
    }

    DetectionReport report;
    report.checked_rounds = static_cast<long>(n_check);
    report.expected_error_rate = config.detection.baseline_error;
    for (std::size_t i = 0; i < n_check; ++i) {
        RoundRecord& rec = transcript[kept[i]];
        rec.used_for_check = true;
        if (rec.bob_bin.value_or(-1) != rec.alice_bin) ++report.mismatches;
    }
    report.observed_error_rate =
        static_cast<double>(report.mismatches) / static_cast<double>(n_check);

    const double threshold =
        config.detection.threshold_multiplier * config.detection.baseline_error;
    const double p_tail =
        binomial_tail(report.checked_rounds, config.detection.baseline_error, report.mismatches);
    bool flagged = report.observed_error_rate > threshold && p_tail < 0.01;

    if (config.amplifier && config.amplifier->randomized) {
        // Audit the discarded rounds with matching axes but the wrong
        // amplifier setting: their rescaled estimator is still centered on
        // Alice's value, with the large closed-form spread below. Any full
        // intercept replaces that spread by the re-sent state's own scale.
        WrongAmpAudit audit;
        double sum_sq = 0.0;
        const GaussianMode probe = squeezed_state(Quadrature::X1, 0.0, config.r);
        audit.predicted_spread = estimator_stats(EstimatorKind::AmplifiedWrongXi2, probe,
                                                 config.gamma_T, config.amplifier->gain)
                                     .stddev;
        for (const RoundRecord& rec : transcript) {
            if (rec.bob_axis != rec.alice_axis || !rec.amp_axis || *rec.amp_axis == rec.alice_axis)
                continue;
            const double scale = bob_rescale_factor(config, rec.bob_axis, rec.amp_axis);
            const double residual = scale * rec.bob_value - rec.alice_value;
            ++audit.rounds;
            sum_sq += residual * residual;
            if (std::abs(residual) > 3.0 * audit.predicted_spread) ++audit.mismatches;
        }
        if (audit.rounds >= 10) {
            audit.empirical_spread = std::sqrt(sum_sq / static_cast<double>(audit.rounds));
            const double ratio = audit.empirical_spread / audit.predicted_spread;
            audit.flagged = ratio > 2.0 || ratio < 0.5;
        }
        flagged = flagged || audit.flagged;
        report.wrong_amp_check = audit;
    }

    report.eavesdropper_flagged = flagged;
    return report;
}

TapAttackFigures tap_attack_analysis(double reflectivity, double r, double s) {
    if (!(reflectivity > 0.0 && reflectivity < 1.0))
        fail("tap_attack_analysis: reflectivity must lie in (0, 1)");
    const double T = 1.0 - reflectivity;
    const double sigma = std::exp(-r);
    TapAttackFigures f;
    f.eve_estimator_stddev = 0.5 * std::sqrt(T / reflectivity + sigma * sigma);
    f.bob_width_ratio = 1.0 / std::sqrt(T + sigma * sigma * reflectivity);
    const double y_typical = -std::sqrt(reflectivity) * s;
    f.bob_center_shift = -0.5 * s * reflectivity + y_typical * std::sqrt(reflectivity);
    return f;
}

SessionResult run_session(const SessionConfig& config) {
    SessionResult result;
    result.transcript.reserve(static_cast<std::size_t>(config.n_rounds));
    for (long i = 0; i < config.n_rounds; ++i) {
        Rng round_rng = derive_rng(config.seed, static_cast<std::uint64_t>(i));
        result.transcript.push_back(run_round(config, round_rng));
    }
    Rng detect_rng = derive_rng(config.seed, 0xd37ec7u | (1ULL << 62));
    result.report = detect(result.transcript, config, detect_rng);

    long kept = 0, key = 0, errors = 0;
    for (const RoundRecord& rec : result.transcript) {
        if (!rec.kept) continue;
        ++kept;
        if (!rec.used_for_check) ++key;
        if (rec.bob_bin.value_or(-1) != rec.alice_bin) ++errors;
    }
    const double n = static_cast<double>(config.n_rounds);
    result.kept_fraction = static_cast<double>(kept) / n;
    result.key_rate = static_cast<double>(key) / n;
    result.key_error_rate = kept > 0 ? static_cast<double>(errors) / static_cast<double>(kept) : 0.0;
    return result;
}

void write_transcript_csv(const std::vector<RoundRecord>& transcript, std::ostream& os) {
    os << "round,alice_axis,alice_bin,amp_axis,bob_axis,bob_value,bob_bin,kept,checked,mismatch\n";
    char buf[64];
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const RoundRecord& rec = transcript[i];
        const bool mismatch = rec.used_for_check && rec.bob_bin.value_or(-1) != rec.alice_bin;
        std::snprintf(buf, sizeof(buf), "%.17g", rec.bob_value);
        os << i << ',' << to_string(rec.alice_axis) << ',' << rec.alice_bin << ','
           << (rec.amp_axis ? to_string(*rec.amp_axis) : "") << ',' << to_string(rec.bob_axis)
           << ',' << buf << ',' << (rec.bob_bin ? std::to_string(*rec.bob_bin) : std::string())
           << ',' << (rec.kept ? 1 : 0) << ',' << (rec.used_for_check ? 1 : 0) << ','
           << (mismatch ? 1 : 0) << '\n';
    }
}

}  // namespace sqkd::protocol
