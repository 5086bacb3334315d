#include "sqkd/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace sqkd {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

/// LDL^T pivots of a small symmetric matrix; the matrix is PSD iff all pivots
/// are nonnegative (up to tolerance).
bool is_psd(const std::array<double, 16>& m, double tol) {
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m[static_cast<std::size_t>(4 * i + j)];
    for (int k = 0; k < 4; ++k) {
        if (a[k][k] < -tol) return false;
        if (a[k][k] <= tol) {
            // Zero pivot: the row/column must vanish too or the matrix is indefinite.
            for (int j = k + 1; j < 4; ++j)
                if (std::abs(a[k][j]) > std::sqrt(tol)) return false;
            continue;
        }
        for (int i = k + 1; i < 4; ++i) {
            const double f = a[i][k] / a[k][k];
            for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
        }
    }
    return true;
}

}  // namespace

GaussianMode GaussianMode::create(double mean1, double mean2, double var1, double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) fail("GaussianMode: variances must be positive");
    if (!std::isfinite(mean1) || !std::isfinite(mean2) || !std::isfinite(var1) ||
        !std::isfinite(var2))
        fail("GaussianMode: non-finite parameter");
    if (std::sqrt(var1 * var2) < 0.25 - kEpsNum)
        fail("GaussianMode: uncertainty product below 1/4");
    return GaussianMode{mean1, mean2, var1, var2};
}

TwoModeGaussianState TwoModeGaussianState::create(const std::array<double, 4>& mean,
                                                  const std::array<double, 16>& cov) {
    double scale = 0.0;
    for (double v : cov) scale = std::max(scale, std::abs(v));
    const double tol = std::max(kEpsNum, kEpsNum * scale);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(cov[static_cast<std::size_t>(4 * i + j)] -
                         cov[static_cast<std::size_t>(4 * j + i)]) > tol)
                fail("TwoModeGaussianState: covariance not symmetric");
    if (!is_psd(cov, tol)) fail("TwoModeGaussianState: covariance not positive semi-definite");
    TwoModeGaussianState s;
    s.mean = mean;
    s.cov = cov;
    return s;
}

GaussianMode TwoModeGaussianState::marginal(int k) const {
    const int i1 = index(Quadrature::X1, k);
    const int i2 = index(Quadrature::X2, k);
    return GaussianMode::create(mean[static_cast<std::size_t>(i1)],
                                mean[static_cast<std::size_t>(i2)], c(i1, i1), c(i2, i2));
}

GaussianMode squeezed_state(Quadrature axis, double center, double r) {
    if (r < 0.0) fail("squeezed_state: squeeze parameter must be nonnegative");
    const double squeezed = std::exp(-2.0 * r) / 4.0;
    const double anti = std::exp(2.0 * r) / 4.0;
    if (axis == Quadrature::X1) return GaussianMode::create(center, 0.0, squeezed, anti);
    return GaussianMode::create(0.0, center, anti, squeezed);
}

double quadrature_pdf(const GaussianMode& mode, Quadrature axis, double x) {
    const double mu = mode.mean(axis);
    const double var = mode.variance(axis);
    const double d = x - mu;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

double bin_probability(const GaussianMode& mode, Quadrature axis, double lo, double hi) {
    if (!(lo < hi)) fail("bin_probability: interval must satisfy lo < hi");
    const double mu = mode.mean(axis);
    const double s = std::sqrt(2.0 * mode.variance(axis));
    // Difference of error functions, arranged to keep precision for
    // intervals far in a tail.
    const double a = (lo - mu) / s;
    const double b = (hi - mu) / s;
    double p;
    if (a >= 0.0)
        p = 0.5 * (std::erfc(a) - std::erfc(b));
    else if (b <= 0.0)
        p = 0.5 * (std::erfc(-b) - std::erfc(-a));
    else
        p = 0.5 * (std::erf(b) - std::erf(a));
    return std::clamp(p, 0.0, 1.0);
}

HomodyneSample sample_homodyne(const GaussianMode& mode, Quadrature axis, Rng& rng) {
    const double value = mode.mean(axis) + std::sqrt(mode.variance(axis)) * normal01(rng);
    return HomodyneSample{axis, value};
}

TwoModeGaussianState embed_with_vacuum(const GaussianMode& signal) {
    TwoModeGaussianState s;
    s.mean = {signal.mean1, signal.mean2, 0.0, 0.0};
    s.c(0, 0) = signal.var1;
    s.c(1, 1) = signal.var2;
    s.c(2, 2) = 0.25;
    s.c(3, 3) = 0.25;
    return s;
}

TwoModeGaussianState apply_beam_splitter(const TwoModeGaussianState& state, double T, double R) {
    if (std::abs(T + R - 1.0) > 1e-12) fail("apply_beam_splitter: T + R must equal 1");
    if (T < 0.0 || R < 0.0) fail("apply_beam_splitter: negative coefficient");
    const double t = std::sqrt(T);
    const double u = std::sqrt(R);
    // Mode mixing acts identically on both quadratures; rows ordered
    // (X11, X21, X12, X22).
    const double S[4][4] = {
        {t, 0.0, u, 0.0},
        {0.0, t, 0.0, u},
        {-u, 0.0, t, 0.0},
        {0.0, -u, 0.0, t},
    };
    TwoModeGaussianState out;
    for (int i = 0; i < 4; ++i) {
        double m = 0.0;
        for (int k = 0; k < 4; ++k) m += S[i][k] * state.mean[static_cast<std::size_t>(k)];
        out.mean[static_cast<std::size_t>(i)] = m;
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double v = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) v += S[i][k] * state.c(k, l) * S[j][l];
            out.c(i, j) = v;
        }
    }
    return out;
}

GaussianMode condition_on_homodyne(const TwoModeGaussianState& state, int measured_mode,
                                   Quadrature axis, double outcome) {
    if (measured_mode != 1 && measured_mode != 2)
        fail("condition_on_homodyne: measured_mode must be 1 or 2");
    const int b = TwoModeGaussianState::index(axis, measured_mode);
    const double vb = state.c(b, b);
    if (!(vb > kEpsNum)) fail("condition_on_homodyne: measured quadrature is degenerate");
    const int other = measured_mode == 1 ? 2 : 1;
    const double dy = outcome - state.mean[static_cast<std::size_t>(b)];
    double m[2], v[2];
    for (Quadrature q : {Quadrature::X1, Quadrature::X2}) {
        const int a = TwoModeGaussianState::index(q, other);
        const double cab = state.c(a, b);
        const int i = q == Quadrature::X1 ? 0 : 1;
        m[i] = state.mean[static_cast<std::size_t>(a)] + cab * dy / vb;
        v[i] = state.c(a, a) - cab * cab / vb;
    }
    return GaussianMode::create(m[0], m[1], v[0], v[1]);
}

double uncertainty_product(const GaussianMode& mode) {
    return std::sqrt(mode.var1 * mode.var2);
}

}  // namespace sqkd
