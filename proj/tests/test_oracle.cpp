#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "sqkd/channel.hpp"
#include "sqkd/oracle.hpp"
#include "support.hpp"

using namespace sqkd;
using namespace sqkd::oracle;
using doctest::Approx;

TEST_CASE("build_squeezed_wavefunction moments") {
    const GridSpec1D wide{-4.0, 4.0, 512};
    const auto vac = build_squeezed_wavefunction(0.0, 0.0, wide);
    CHECK(vac.norm() == Approx(1.0).epsilon(1e-10));
    CHECK(std::abs((vac.mean()) - (0.0)) < 1e-10);
    CHECK(vac.variance() == Approx(0.25).epsilon(1e-6));

    // the ~200-photon state: grid variance matches v/2 = 3.1e-4
    const double r = -0.5 * std::log(2.0 * 6.2e-4);
    const GridSpec1D narrow{-0.5, 0.5, 512};
    const auto sq = build_squeezed_wavefunction(r, 0.0, narrow);
    CHECK(sq.variance() == Approx(3.1e-4).epsilon(1e-4));

    Rng rng = make_rng(8);
    for (int i = 0; i < 5; ++i) {
        const double rr = 1.5 * uniform01(rng);
        const double center = -1.0 + 2.0 * uniform01(rng);
        const GridSpec1D g{-6.0, 6.0, 1024};
        const auto psi = build_squeezed_wavefunction(rr, center, g);
        const GaussianMode mode = squeezed_state(Quadrature::X1, center, rr);
        CHECK(std::abs((psi.mean()) - (mode.mean1)) < 1e-8);
        CHECK(psi.variance() == Approx(mode.var1).epsilon(1e-6));
    }
}

TEST_CASE("build_squeezed_wavefunction grid guards") {
    CHECK_THROWS_AS(build_squeezed_wavefunction(0.0, 0.0, GridSpec1D{-1.0, 1.0, 512}),
                    oracle_error);  // narrower than 6 sigma
    CHECK_THROWS_AS(build_squeezed_wavefunction(3.0, 0.0, GridSpec1D{-4.0, 4.0, 128}),
                    oracle_error);  // too coarse for the squeezing
    CHECK_THROWS_AS(build_squeezed_wavefunction(0.0, 0.0, GridSpec1D{-4.0, 4.0, 100}),
                    oracle_error);  // not a power of two
    CHECK_THROWS_AS(build_squeezed_wavefunction(0.0, 0.0, GridSpec1D{-4.0, 4.0, 32}),
                    oracle_error);  // below the minimum size
}

TEST_CASE("beam splitter transform: identity, closed-form output, marginal") {
    const double r = 1.0, s = 1.5, T = 0.85, R = 0.15;
    const double sigma = std::exp(-r);
    const GridSpec1D g{-5.25, 5.25, 1024};
    const auto two =
        product_state(build_squeezed_wavefunction(r, s, g), build_squeezed_wavefunction(0.0, 0.0, g));
    CHECK(two.norm() == Approx(1.0).epsilon(1e-10));

    SUBCASE("T = 1 resamples to itself") {
        const auto same = beam_splitter_transform(two, 1.0, 0.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < same.amp.size(); ++i)
            worst = std::max(worst, std::abs(same.amp[i] - two.amp[i]));
        CHECK(worst < 1e-12);
    }

    SUBCASE("output matches the analytic product of Gaussians pointwise") {
        const auto out = beam_splitter_transform(two, T, R);
        const double pref = std::sqrt(2.0 / (M_PI * sigma));
        double worst = 0.0, peak = 0.0;
        const int n = g.n;
        for (int i = 0; i < n; i += 7) {
            for (int j = 0; j < n; j += 7) {
                const double x11 = g.x(i), x12 = g.x(j);
                const double u = (std::sqrt(T) * x11 - std::sqrt(R) * x12 - s) / sigma;
                const double w = std::sqrt(R) * x11 + std::sqrt(T) * x12;
                const double closed = pref * std::exp(-u * u) * std::exp(-w * w);
                const double got = std::abs(out.amp[static_cast<std::size_t>(i) * n + j]);
                worst = std::max(worst, std::abs(got - closed));
                peak = std::max(peak, closed);
            }
        }
        CHECK(worst < 1e-4 * peak);
    }

    SUBCASE("tap-port marginal carries -sqrt(R) s and (T + R sigma^2)/4") {
        const auto out = beam_splitter_transform(two, T, R);
        const int n = g.n;
        std::vector<double> marg(static_cast<std::size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += std::norm(out.amp[static_cast<std::size_t>(i) * n + j]);
            marg[static_cast<std::size_t>(j)] = acc;
        }
        double mass = 0.0, mean = 0.0;
        for (int j = 0; j < n; ++j) {
            mass += marg[static_cast<std::size_t>(j)];
            mean += g.x(j) * marg[static_cast<std::size_t>(j)];
        }
        mean /= mass;
        double var = 0.0;
        for (int j = 0; j < n; ++j)
            var += (g.x(j) - mean) * (g.x(j) - mean) * marg[static_cast<std::size_t>(j)];
        var /= mass;
        CHECK(mean == Approx(-std::sqrt(R) * s).epsilon(1e-5));
        CHECK(var == Approx((T + R * sigma * sigma) / 4.0).epsilon(1e-5));
    }

    CHECK_THROWS_AS(beam_splitter_transform(two, 0.9, 0.2), oracle_error);
}

TEST_CASE("collapse_on_x12: identity splitter and rejection paths") {
    const GridSpec1D g{-5.25, 5.25, 1024};
    const auto two = product_state(build_squeezed_wavefunction(0.8, 1.0, g),
                                   build_squeezed_wavefunction(0.0, 0.0, g));
    const auto same = beam_splitter_transform(two, 1.0, 0.0);
    const auto ref = build_squeezed_wavefunction(0.8, 1.0, g);
    for (double y : {-0.4, 0.3}) {
        const auto slice = collapse_on_x12(same, y);
        CHECK(std::abs((slice.mean()) - (ref.mean())) < 1e-8);
        CHECK(slice.variance() == Approx(ref.variance()).epsilon(1e-8));
    }
    CHECK_THROWS_AS(collapse_on_x12(same, 99.0), oracle_error);   // outside the grid
    CHECK_THROWS_AS(collapse_on_x12(same, -5.2), oracle_error);   // negligible mass
}

TEST_CASE("collapse at a strongly squeezed tap matches the conditional closed form") {
    // sigma = 0.05, s = 2, T = 0.99, y at the typical tap outcome
    const double sigma = 0.05, s = 2.0, T = 0.99, R = 0.01;
    const double r = -std::log(sigma);
    const double y = -std::sqrt(R) * s;
    const GridSpec1D g{-3.6, 3.6, 4096};
    const auto out = beam_splitter_transform(
        product_state(build_squeezed_wavefunction(r, s, g), build_squeezed_wavefunction(0.0, 0.0, g)),
        T, R);
    const auto slice = collapse_on_x12(out, y);

    const double width_closed = sigma / std::sqrt(T + sigma * sigma * R);
    const double center_closed =
        std::sqrt(T) * (s + std::sqrt(R) * (1.0 - sigma * sigma) * y) / (T + R * sigma * sigma);
    CHECK(2.0 * std::sqrt(slice.variance()) == Approx(width_closed).epsilon(1e-4));
    CHECK(slice.mean() == Approx(center_closed).epsilon(1e-4));
    // at y = -sqrt(R) s the conditional center collapses to sqrt(T) s exactly
    CHECK(center_closed == Approx(std::sqrt(T) * s).epsilon(1e-12));
}

TEST_CASE("small-R center shift follows the first-order law") {
    // center - s = s R / 2 + y sqrt(R) + O(R^{3/2}, sigma^2 R); the grid
    // slice reproduces it
    const double r = 1.2, s = 2.0, R = 0.01, T = 1.0 - R;
    const double sigma = std::exp(-r);
    const GridSpec1D g{-5.25, 5.25, 2048};
    const auto out = beam_splitter_transform(
        product_state(build_squeezed_wavefunction(r, s, g), build_squeezed_wavefunction(0.0, 0.0, g)),
        T, R);
    for (double y : {-0.3, 0.0, 0.25}) {
        const auto slice = collapse_on_x12(out, y);
        const double first_order = 0.5 * s * R + y * std::sqrt(R);
        const double budget = 3.0 * (std::pow(R, 1.5) + sigma * sigma * R);
        CHECK(std::abs((slice.mean() - s) - first_order) < budget);
    }
}

TEST_CASE("characteristic function: normalization, symmetry, evolution") {
    const GaussianMode m = squeezed_state(Quadrature::X1, 0.9, 1.4);
    const auto chi0 = CharacteristicFunction1D::from_mode(m, Quadrature::X1, 40.0, 512);
    const std::size_t mid = chi0.p.size() / 2;
    CHECK(chi0.values[mid].real() == Approx(1.0).epsilon(1e-14));
    CHECK(std::abs((chi0.values[mid].imag()) - (0.0)) < 1e-14);
    for (std::size_t k = 0; k < chi0.p.size(); ++k) {
        const auto mirror = chi0.values[chi0.p.size() - 1 - k];
        CHECK(std::abs((chi0.values[k].real()) - (mirror.real())) < 1e-13);
        CHECK(std::abs((chi0.values[k].imag()) - (-mirror.imag())) < 1e-13);
    }

    SUBCASE("gamma_t = 0 is the identity") {
        const auto same = evolve_characteristic(chi0, 0.0);
        for (std::size_t k = 0; k < chi0.values.size(); ++k)
            CHECK(std::abs(same.values[k] - chi0.values[k]) < 1e-14);
    }

    SUBCASE("long evolution reaches the vacuum characteristic") {
        const auto late = evolve_characteristic(chi0, 50.0);
        for (std::size_t k = 0; k < late.p.size(); k += 17) {
            const double p = late.p[k];
            CHECK(std::abs(late.values[k] - std::exp(std::complex<double>(-0.5 * p * p, 0.0))) <
                  1e-10);
        }
    }

    SUBCASE("symmetry survives evolution") {
        const auto evolved = evolve_characteristic(chi0, 0.37);
        CHECK(evolved.values[mid].real() == Approx(1.0).epsilon(1e-14));
        for (std::size_t k = 0; k < evolved.p.size(); k += 11) {
            const auto mirror = evolved.values[evolved.p.size() - 1 - k];
            CHECK(std::abs(evolved.values[k] - std::conj(mirror)) < 1e-13);
        }
    }
}

TEST_CASE("wavefunction density and characteristic function are Fourier partners") {
    // chi(p) = integral |psi(x)|^2 e^{2ipx} dx bridges the position and
    // characteristic representations
    const double r = 0.9, c = 0.6;
    const GridSpec1D g{-5.0, 6.0, 2048};
    const auto psi = build_squeezed_wavefunction(r, c, g);
    const GaussianMode m = squeezed_state(Quadrature::X1, c, r);
    for (double p : {0.0, 0.5, 1.7, -2.3}) {
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < g.n; ++i) {
            const double w = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
            acc += w * std::norm(psi.amp[static_cast<std::size_t>(i)]) *
                   std::exp(std::complex<double>(0.0, 2.0 * p * g.x(i)));
        }
        acc *= g.dx();
        const std::complex<double> closed =
            std::exp(std::complex<double>(-2.0 * m.var1 * p * p, 2.0 * p * m.mean1));
        CHECK(std::abs(acc - closed) < 1e-8);
    }
}

TEST_CASE("pdf_from_characteristic: vacuum density and normalization") {
    const auto chi = CharacteristicFunction1D::for_mode_auto(GaussianMode::vacuum(), Quadrature::X1);
    const GridSpec1D xg{-4.0, 4.0, 801};
    const auto pdf = pdf_from_characteristic(chi, xg);
    double worst = 0.0, integral = 0.0;
    for (int i = 0; i < xg.n; ++i) {
        const double x = xg.x(i);
        const double closed = std::exp(-2.0 * x * x) * std::sqrt(2.0 / M_PI);
        worst = std::max(worst, std::abs(pdf[static_cast<std::size_t>(i)] - closed));
        integral += ((i == 0 || i == xg.n - 1) ? 0.5 : 1.0) * pdf[static_cast<std::size_t>(i)];
    }
    CHECK(worst < 1e-10);
    CHECK(integral * xg.dx() == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("pdf_from_characteristic rejects an aliased grid") {
    const GaussianMode narrow = squeezed_state(Quadrature::X1, 0.0, 3.0);
    // far too small p extent for this bandwidth
    const auto chi = CharacteristicFunction1D::from_mode(narrow, Quadrature::X1, 3.0, 64);
    CHECK_THROWS_AS(pdf_from_characteristic(chi, GridSpec1D{-2.0, 2.0, 401}), oracle_error);
}

TEST_CASE("damped density via the characteristic route matches the channel closed form") {
    // includes the (r = 1, gamma_t = 0.3) pair plus random draws
    Rng rng = make_rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const double r = trial == 0 ? 1.0 : 3.2 * uniform01(rng);
        const double gt = trial == 0 ? 0.3 : 0.01 + 0.99 * uniform01(rng);
        const double s = trial == 0 ? 0.0 : -1.5 + 3.0 * uniform01(rng);
        const GaussianMode m0 = squeezed_state(Quadrature::X1, s, r);
        const auto chi_t =
            evolve_characteristic(CharacteristicFunction1D::for_mode_auto(m0, Quadrature::X1), gt);
        const GridSpec1D xg{-(std::abs(s) + 3.5), std::abs(s) + 3.5, 1001};
        const auto pdf = pdf_from_characteristic(chi_t, xg);
        const GaussianMode evolved = loss_evolve(m0, gt);

        double l1 = 0.0, grid_mean = 0.0, grid_m2 = 0.0, mass = 0.0;
        for (int i = 0; i < xg.n; ++i) {
            const double w = (i == 0 || i == xg.n - 1) ? 0.5 : 1.0;
            const double x = xg.x(i);
            const double p = pdf[static_cast<std::size_t>(i)];
            l1 += w * std::abs(p - quadrature_pdf(evolved, Quadrature::X1, x));
            mass += w * p;
            grid_mean += w * x * p;
            grid_m2 += w * x * x * p;
        }
        l1 *= xg.dx();
        grid_mean /= mass;
        const double grid_var = grid_m2 / mass - grid_mean * grid_mean;
        CHECK(l1 < 1e-4);
        CHECK(grid_var == Approx(evolved.var1).epsilon(1e-6));  // Fourier route hits the damped v
    }
}

TEST_CASE("wavefunction dumps are tabular") {
    const GridSpec1D g{-4.0, 4.0, 64};
    const auto psi = build_squeezed_wavefunction(0.0, 0.0, g);
    std::ostringstream os;
    dump_wavefunction(psi, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "x re_psi im_psi");
    double x, re, im;
    int rows = 0;
    while (is >> x >> re >> im) ++rows;
    CHECK(rows == 64);
}
