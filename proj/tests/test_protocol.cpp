#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sqkd/protocol.hpp"
#include "support.hpp"

using namespace sqkd;
using namespace sqkd::protocol;
using doctest::Approx;

namespace {

SessionConfig paper_session(std::uint64_t seed) {
    SessionConfig cfg;
    cfg.r = -0.5 * std::log(2.0 * 6.2e-4);
    cfg.binning = default_binning(cfg.r, 0.125);
    cfg.n_rounds = 2400;
    cfg.check_fraction = 0.25;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("BinningScheme layout and clamping") {
    const BinningScheme b = BinningScheme::create(0.125, 14.2);
    CHECK(b.n_bins == 227);
    CHECK(b.alphabet.size() == 227);
    CHECK(b.secure());
    CHECK(b.bin_of(-14.2) == 0);
    CHECK(b.bin_of(-14.2 + 0.1249) == 0);
    CHECK(b.bin_of(-14.2 + 0.1251) == 1);
    CHECK(b.bin_of(1e9) == 226);
    CHECK(b.bin_of(-1e9) == 0);
    CHECK(b.center(0) == Approx(-14.2 + 0.0625));
    for (int k = 0; k < b.n_bins; ++k) CHECK(b.bin_of(b.center(k)) == k);
    CHECK(b.bins_overlapped(14.2) == Approx(113.6));
    CHECK_FALSE(BinningScheme::create(0.6, 14.2).secure());
    CHECK_THROWS_AS(BinningScheme::create(0.125, 0.1), std::invalid_argument);  // < 2 bins
    CHECK_THROWS_AS(BinningScheme::create(-1.0, 14.2), std::invalid_argument);
}

TEST_CASE("SessionConfig validation") {
    SessionConfig cfg = paper_session(1);
    CHECK_NOTHROW(cfg.validate());

    SessionConfig wide = cfg;
    wide.binning = BinningScheme::create(0.6, 14.2);
    CHECK_THROWS_WITH_AS(wide.validate(), "SessionConfig: delta must be < 1/2",
                         std::invalid_argument);
    CHECK_NOTHROW(wide.validate(true));

    SessionConfig few = cfg;
    few.n_rounds = 40;  // 0.25 * 40 = 10 < 30
    CHECK_THROWS_AS(few.validate(), std::invalid_argument);

    SessionConfig aware = cfg;
    aware.eve = EveAmplifierAware{};
    CHECK_THROWS_AS(aware.validate(), std::invalid_argument);  // needs an amplifier
    aware.amplifier = AmplifierConfig{10.0, true};
    CHECK_NOTHROW(aware.validate());
}

TEST_CASE("alice_prepare fairness and state") {
    const BinningScheme b = BinningScheme::create(0.125, 2.0);  // 32 bins
    Rng rng = make_rng(17);
    const long n = 100000;
    long x1 = 0;
    std::vector<long> hist(static_cast<std::size_t>(b.n_bins), 0);
    for (long i = 0; i < n; ++i) {
        const AlicePreparation prep = alice_prepare(b, 1.5, rng);
        if (prep.axis == Quadrature::X1) ++x1;
        ++hist[static_cast<std::size_t>(prep.bin)];
        if (i == 0) {
            CHECK(prep.mode.variance(prep.axis) == Approx(std::exp(-3.0) / 4.0));
            CHECK(prep.mode.mean(prep.axis) == Approx(b.center(prep.bin)));
        }
    }
    const double half_sigma = std::sqrt(0.25 / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(x1) / n - 0.5) < 3.0 * half_sigma);

    const std::vector<double> uniform(static_cast<std::size_t>(b.n_bins),
                                      1.0 / static_cast<double>(b.n_bins));
    const double stat = test_support::chi2_stat(hist, uniform, n);
    CHECK(stat < test_support::chi2_crit_99(b.n_bins - 1));
}

TEST_CASE("bob_measure fairness, distribution, determinism") {
    const GaussianMode m = squeezed_state(Quadrature::X1, 0.4, 1.0);
    Rng rng = make_rng(23);
    const long n = 100000;
    long x1 = 0;
    std::vector<double> x1_samples;
    for (long i = 0; i < n; ++i) {
        const auto [axis, sample] = bob_measure(m, rng);
        if (axis == Quadrature::X1) {
            ++x1;
            x1_samples.push_back(sample.value);
        }
    }
    CHECK(std::abs(static_cast<double>(x1) / n - 0.5) < 3.0 * std::sqrt(0.25 / n));

    // Kolmogorov-Smirnov against the Gaussian marginal at the 1% level
    const double mu = m.mean1, sd = std::sqrt(m.var1);
    const double ks = test_support::ks_statistic(
        x1_samples, [&](double x) { return test_support::std_normal_cdf((x - mu) / sd); });
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(x1_samples.size())));

    Rng a = make_rng(5), b = make_rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto ra = bob_measure(m, a);
        const auto rb = bob_measure(m, b);
        CHECK(ra.first == rb.first);
        CHECK(ra.second.value == rb.second.value);
    }
}

TEST_CASE("honest lossless rounds agree on bins almost always") {
    SessionConfig cfg = paper_session(31);
    cfg.n_rounds = 20000;
    const SessionResult res = run_session(cfg);
    long kept = 0, agree = 0;
    for (const RoundRecord& rec : res.transcript) {
        if (!rec.kept) continue;
        ++kept;
        if (rec.bob_bin.value_or(-1) == rec.alice_bin) ++agree;
    }
    CHECK(kept > 9000);
    CHECK(static_cast<double>(agree) / static_cast<double>(kept) >= 1.0 - 1e-3);
    // kept fraction is the two fair coins agreeing
    CHECK(std::abs(res.kept_fraction - 0.5) < 3.0 * std::sqrt(0.25 / cfg.n_rounds));
}

TEST_CASE("randomized amplifier sift keeps only triple matches") {
    SessionConfig cfg = paper_session(37);
    cfg.gamma_T = 1.2e-3;
    cfg.amplifier = AmplifierConfig{10.0, true};
    cfg.detection.baseline_error = 4.5e-3;  // honest rate for this lossy amplified link
    cfg.n_rounds = 20000;
    const SessionResult res = run_session(cfg);
    for (const RoundRecord& rec : res.transcript) {
        const bool triple =
            rec.bob_axis == rec.alice_axis && rec.amp_axis && *rec.amp_axis == rec.alice_axis;
        CHECK(rec.kept == triple);
    }
    CHECK(std::abs(res.kept_fraction - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / cfg.n_rounds));
}

TEST_CASE("sift splits records and reports symbols") {
    SessionConfig cfg = paper_session(41);
    cfg.n_rounds = 4000;
    const SessionResult res = run_session(cfg);
    const SiftResult s = sift(res.transcript, cfg.binning);
    CHECK(s.key_rounds.size() + s.discarded.size() == res.transcript.size());
    long agree = 0;
    for (std::size_t i = 0; i < s.key_rounds.size(); ++i)
        if (s.alice_symbols[i] == s.bob_symbols[i]) ++agree;
    CHECK(static_cast<double>(agree) / static_cast<double>(s.key_rounds.size()) >= 0.999);

    std::vector<RoundRecord> none = res.transcript;
    for (auto& rec : none) rec.kept = false;
    const SiftResult empty = sift(none, cfg.binning);
    CHECK(empty.key_rounds.empty());
    CHECK(empty.alice_symbols.empty());
}

TEST_CASE("wrong-axis intercept leaves Bob's central bins uniform") {
    // force Eve onto the conjugate axis and test the kept-round bin spread:
    // uniform chi-square over the central band, clamped-Gaussian overall
    const double r = -0.5 * std::log(2.0 * 6.2e-4);
    const BinningScheme b = default_binning(r, 0.125);
    const double sigma_b = std::exp(r) / 2.0;
    Rng rng = make_rng(53);
    const long n = 60000;
    std::vector<long> hist(static_cast<std::size_t>(b.n_bins), 0);
    for (long i = 0; i < n; ++i) {
        const AlicePreparation prep = alice_prepare(b, r, rng);
        const Quadrature wrong = conjugate(prep.axis);
        const double m = sample_homodyne(prep.mode, wrong, rng).value;
        const GaussianMode resent = squeezed_state(wrong, m, r);
        const double bob = sample_homodyne(resent, prep.axis, rng).value;
        ++hist[static_cast<std::size_t>(b.bin_of(bob))];
    }

    // central band: |center| <= half_range / 4, locally flat to ~1.6%
    std::vector<long> band_counts;
    long band_total = 0;
    for (int k = 0; k < b.n_bins; ++k) {
        if (std::abs(b.center(k)) > b.half_range / 4.0) continue;
        band_counts.push_back(hist[static_cast<std::size_t>(k)]);
        band_total += hist[static_cast<std::size_t>(k)];
    }
    CHECK(band_total > 10000);
    const std::vector<double> flat(band_counts.size(), 1.0 / static_cast<double>(band_counts.size()));
    const double stat_band = test_support::chi2_stat(band_counts, flat, band_total);
    CHECK(stat_band < test_support::chi2_crit_99(static_cast<int>(band_counts.size()) - 1));

    // full range: exact binned clamped Gaussian, including edge-bin pileup
    const GaussianMode spread = GaussianMode::create(0.0, 0.0, sigma_b * sigma_b, 0.25);
    std::vector<double> probs(static_cast<std::size_t>(b.n_bins));
    for (int k = 0; k < b.n_bins; ++k) {
        double lo = -b.half_range + k * b.delta;
        double hi = lo + b.delta;
        if (k == 0) lo = -1e9;
        if (k == b.n_bins - 1) hi = 1e9;
        probs[static_cast<std::size_t>(k)] = bin_probability(spread, Quadrature::X1, lo, hi);
    }
    const double stat_full = test_support::chi2_stat(hist, probs, n);
    CHECK(stat_full < test_support::chi2_crit_99(b.n_bins - 1));
}

TEST_CASE("detect: honest pass, intercept flagged, insufficient sample") {
    SUBCASE("honest sessions stay quiet") {
        int flags = 0;
        for (int i = 0; i < 50; ++i) {
            const SessionResult res = run_session(paper_session(100 + i));
            flags += res.report.eavesdropper_flagged ? 1 : 0;
            CHECK(res.report.checked_rounds > 250);
        }
        CHECK(flags <= 2);
    }

    SUBCASE("squeezed-state intercept is flagged") {
        for (int i = 0; i < 20; ++i) {
            SessionConfig cfg = paper_session(300 + i);
            cfg.eve = EveInterceptSqueezed{cfg.r};
            const SessionResult res = run_session(cfg);
            CHECK(res.report.eavesdropper_flagged);
            CHECK(res.report.observed_error_rate > 0.3);
        }
    }

    SUBCASE("coherent intercept is flagged at delta = 1/8") {
        SessionConfig cfg = paper_session(77);
        cfg.eve = EveInterceptCoherent{};
        const SessionResult res = run_session(cfg);
        CHECK(res.report.eavesdropper_flagged);
        CHECK(res.report.observed_error_rate > 0.5);
    }

    SUBCASE("too few kept rounds to sample") {
        SessionConfig cfg = paper_session(88);
        std::vector<RoundRecord> tiny;
        Rng rng = make_rng(9);
        while (tiny.size() < 2) {
            RoundRecord rec = run_round(cfg, rng);
            rec.kept = false;
            tiny.push_back(rec);
        }
        Rng detect_rng = make_rng(10);
        CHECK_THROWS_AS(detect(tiny, cfg, detect_rng), std::runtime_error);
    }
}

TEST_CASE("wrong-amplifier audit sees through the aware eavesdropper") {
    const double honest_baseline = 4.5e-3;  // closed-form rate for this link

    SessionConfig cfg = paper_session(61);
    cfg.gamma_T = 1.2e-3;
    cfg.amplifier = AmplifierConfig{10.0, true};
    cfg.detection.baseline_error = honest_baseline;
    cfg.n_rounds = 8000;

    SUBCASE("honest channel passes the audit") {
        const SessionResult res = run_session(cfg);
        REQUIRE(res.report.wrong_amp_check.has_value());
        const WrongAmpAudit& audit = *res.report.wrong_amp_check;
        CHECK(audit.rounds > 1500);
        CHECK(audit.empirical_spread / audit.predicted_spread > 0.9);
        CHECK(audit.empirical_spread / audit.predicted_spread < 1.1);
        CHECK_FALSE(audit.flagged);
        CHECK_FALSE(res.report.eavesdropper_flagged);
    }

    SUBCASE("randomized amplifiers expose the aware eavesdropper") {
        cfg.eve = EveAmplifierAware{};
        const SessionResult res = run_session(cfg);
        REQUIRE(res.report.wrong_amp_check.has_value());
        CHECK(res.report.wrong_amp_check->flagged);
        CHECK(res.report.eavesdropper_flagged);
        // her wrong-axis re-preparations blow the dispersion up by orders
        CHECK(res.report.wrong_amp_check->empirical_spread >
              10.0 * res.report.wrong_amp_check->predicted_spread);
    }

    SUBCASE("fixed amplifier settings leave her invisible") {
        cfg.amplifier = AmplifierConfig{10.0, false};
        cfg.eve = EveAmplifierAware{};
        const SessionResult res = run_session(cfg);
        CHECK_FALSE(res.report.wrong_amp_check.has_value());
        CHECK_FALSE(res.report.eavesdropper_flagged);
    }
}

TEST_CASE("beam-splitter tap figures of merit") {
    const double r = 3.0, sigma = std::exp(-3.0);

    // R -> 1: Eve sees the squeezed quadrature itself
    const TapAttackFigures strong = tap_attack_analysis(0.9999, r, 1.0);
    CHECK(strong.eve_estimator_stddev == Approx(sigma / 2.0).epsilon(0.05));

    // R -> 0: vacuum noise swamps her estimator
    const TapAttackFigures weak = tap_attack_analysis(1e-6, r, 1.0);
    CHECK(weak.eve_estimator_stddev > 100.0);

    const double R = 0.2, T = 0.8, s = 1.3;
    const TapAttackFigures f = tap_attack_analysis(R, r, s);
    CHECK(f.eve_estimator_stddev == Approx(0.5 * std::sqrt(T / R + sigma * sigma)).epsilon(1e-12));
    CHECK(f.bob_width_ratio == Approx(1.0 / std::sqrt(T + sigma * sigma * R)).epsilon(1e-12));
    CHECK(f.bob_center_shift ==
          Approx(-0.5 * s * R - std::sqrt(R) * s * std::sqrt(R)).epsilon(1e-12));

    CHECK_THROWS_AS(tap_attack_analysis(0.0, r, s), std::invalid_argument);
}

TEST_CASE("no tap reflectivity gives information without disturbance") {
    const double r = -0.5 * std::log(2.0 * 6.2e-4);
    const double delta = 0.125;
    const double half_range = std::exp(r) / 2.0;
    for (int i = 0; i < 100; ++i) {
        const double R = std::exp(std::log(1e-4) +
                                  (std::log(1.0 - 1e-4) - std::log(1e-4)) * i / 99.0);
        const TapAttackFigures f = tap_attack_analysis(R, r, half_range);
        const bool informative = f.eve_estimator_stddev <= delta;
        const bool gentle = std::abs(f.bob_center_shift) < delta;  // worst case |s| = half_range
        CHECK_FALSE((informative && gentle));
    }
}

TEST_CASE("tap rounds mostly survive sifting but disturb when strong") {
    SessionConfig cfg = paper_session(71);
    cfg.eve = EveBeamSplitterTap{0.5};  // aggressive tap
    cfg.n_rounds = 6000;
    const SessionResult strong = run_session(cfg);
    CHECK(strong.report.eavesdropper_flagged);  // half the light diverted is visible

    cfg.eve = EveBeamSplitterTap{1e-4};  // gentle tap: invisible but uninformative
    const SessionResult weak = run_session(cfg);
    CHECK_FALSE(weak.report.eavesdropper_flagged);
}

TEST_CASE("deterministic replay: identical seed, identical transcript bytes") {
    SessionConfig cfg = paper_session(59);
    cfg.eve = EveInterceptSqueezed{cfg.r};
    const SessionResult a = run_session(cfg);
    const SessionResult b = run_session(cfg);
    std::ostringstream osa, osb;
    write_transcript_csv(a.transcript, osa);
    write_transcript_csv(b.transcript, osb);
    CHECK(osa.str() == osb.str());

    cfg.seed += 1;
    const SessionResult c = run_session(cfg);
    std::ostringstream osc;
    write_transcript_csv(c.transcript, osc);
    CHECK(osa.str() != osc.str());
}

TEST_CASE("transcript CSV format") {
    SessionConfig cfg = paper_session(67);
    cfg.n_rounds = 200;
    cfg.amplifier = AmplifierConfig{5.0, true};
    cfg.detection.baseline_error = 0.02;
    const SessionResult res = run_session(cfg);
    std::ostringstream os;
    write_transcript_csv(res.transcript, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "round,alice_axis,alice_bin,amp_axis,bob_axis,bob_value,bob_bin,kept,checked,mismatch");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 9);
        CHECK((line.find(",X1,") != std::string::npos || line.find(",X2,") != std::string::npos));
    }
    CHECK(rows == 200);
}
