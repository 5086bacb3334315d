#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "sqkd/random.hpp"

namespace sqkd {

/// Numerical slack for analytically exact invariants.
constexpr double kEpsNum = 1e-12;

/// The two conjugate field quadratures (real/imaginary part of the mode
/// amplitude). Their standard deviations obey dX1 * dX2 >= 1/4.
enum class Quadrature { X1, X2 };

inline Quadrature conjugate(Quadrature q) {
    return q == Quadrature::X1 ? Quadrature::X2 : Quadrature::X1;
}

inline const char* to_string(Quadrature q) {
    return q == Quadrature::X1 ? "X1" : "X2";
}

/// Single-mode Gaussian state with uncorrelated quadratures: two means and
/// two variances. Vacuum has var1 = var2 = 1/4.
struct GaussianMode {
    double mean1 = 0.0;  ///< <X1>
    double mean2 = 0.0;  ///< <X2>
    double var1 = 0.25;  ///< Var(X1)
    double var2 = 0.25;  ///< Var(X2)

    static GaussianMode create(double mean1, double mean2, double var1, double var2);
    static GaussianMode vacuum() { return GaussianMode{}; }

    double mean(Quadrature q) const { return q == Quadrature::X1 ? mean1 : mean2; }
    double variance(Quadrature q) const { return q == Quadrature::X1 ? var1 : var2; }
};

/// Two modes, means ordered (X11, X21, X12, X22) where Xjk is quadrature j of
/// mode k, with a full 4x4 symmetric covariance (a beam splitter correlates
/// the modes, so the diagonal representation is not closed here).
struct TwoModeGaussianState {
    std::array<double, 4> mean{};
    std::array<double, 16> cov{};  // row-major

    static TwoModeGaussianState create(const std::array<double, 4>& mean,
                                       const std::array<double, 16>& cov);

    double& c(int i, int j) { return cov[static_cast<std::size_t>(4 * i + j)]; }
    double c(int i, int j) const { return cov[static_cast<std::size_t>(4 * i + j)]; }

    /// Flat index of quadrature q of mode k (k is 1 or 2).
    static int index(Quadrature q, int k) {
        return 2 * (k - 1) + (q == Quadrature::X1 ? 0 : 1);
    }

    /// Marginal single-mode state of mode k (correlations dropped).
    GaussianMode marginal(int k) const;
};

struct HomodyneSample {
    Quadrature axis;
    double value;
};

/// Minimum-uncertainty squeezed state: variance e^{-2r}/4 on `axis` (where the
/// mean is `center`), e^{+2r}/4 on the conjugate axis (mean 0). r = 0 gives a
/// displaced vacuum.
GaussianMode squeezed_state(Quadrature axis, double center, double r);

/// Gaussian marginal density of the chosen quadrature at x.
double quadrature_pdf(const GaussianMode& mode, Quadrature axis, double x);

/// Exact probability that a homodyne outcome on `axis` falls in [lo, hi).
double bin_probability(const GaussianMode& mode, Quadrature axis, double lo, double hi);

/// One homodyne outcome drawn from the Gaussian marginal. Deterministic for a
/// fixed rng state.
HomodyneSample sample_homodyne(const GaussianMode& mode, Quadrature axis, Rng& rng);

/// Signal into port 1, vacuum into port 2; block-diagonal covariance.
TwoModeGaussianState embed_with_vacuum(const GaussianMode& signal);

/// Orthogonal two-mode mixing a1 -> sqrt(T) a1 + sqrt(R) a2,
/// a2 -> -sqrt(R) a1 + sqrt(T) a2, applied to both quadratures.
/// Requires T + R = 1.
TwoModeGaussianState apply_beam_splitter(const TwoModeGaussianState& state, double T, double R);

/// State of the unmeasured mode after a homodyne measurement of `axis` on
/// `measured_mode` returned `outcome`. Standard Gaussian conditioning applied
/// per quadrature; the conjugate quadrature of the measured mode is traced
/// out. Rejects a degenerate (zero-variance) measured quadrature.
GaussianMode condition_on_homodyne(const TwoModeGaussianState& state, int measured_mode,
                                   Quadrature axis, double outcome);

/// sqrt(var1 * var2); >= 1/4 for every physical state, = 1/4 for pure
/// minimum-uncertainty ones.
double uncertainty_product(const GaussianMode& mode);

}  // namespace sqkd
