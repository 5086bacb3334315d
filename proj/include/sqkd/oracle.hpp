#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sqkd/gaussian.hpp"

namespace sqkd::oracle {

struct oracle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using cplx = std::complex<double>;

/// Uniform grid over [x_min, x_max] with n nodes (endpoints included).
struct GridSpec1D {
    double x_min;
    double x_max;
    int n;

    double dx() const { return (x_max - x_min) / (n - 1); }
    double x(int i) const { return x_min + i * dx(); }
    bool contains(double v) const { return v >= x_min && v <= x_max; }
};

/// Discretized complex amplitudes psi(x) on a 1-D grid. Used as the
/// brute-force stand-in for every closed-form single-mode statement.
struct WavefunctionGrid1D {
    GridSpec1D grid;
    std::vector<cplx> amp;

    double norm() const;          ///< sum |psi|^2 dx (trapezoid)
    void normalize();             ///< rescale so norm() == 1
    double mean() const;          ///< mean of |psi|^2
    double variance() const;      ///< variance of |psi|^2
    std::vector<double> density() const;
};

/// Amplitudes psi(x1 of mode 1, x1 of mode 2) on a square grid; amp[i*n + j]
/// holds psi(grid.x(i), grid.x(j)).
struct WavefunctionGrid2D {
    GridSpec1D grid;
    std::vector<cplx> amp;

    double norm() const;
    void normalize();
};

/// Position wavefunction of a squeezed state displaced by `center` along the
/// squeezed axis: (2/(pi s^2))^{1/4} exp(-((x-center)/s)^2) with s = e^{-r}.
/// The density variance is e^{-2r}/4. Rejects a grid that covers fewer than
/// six density standard deviations around the center or resolves the width
/// with fewer than four nodes.
WavefunctionGrid1D build_squeezed_wavefunction(double r, double center, const GridSpec1D& grid);

/// Product state psi1(x11) * psi2(x12); both factors must share one grid so
/// the beam-splitter rotation stays on a square domain.
WavefunctionGrid2D product_state(const WavefunctionGrid1D& mode1, const WavefunctionGrid1D& mode2);

/// Coordinate-rotation resampling
///   psi_out(x11, x12) = psi_in(sqrt(T) x11 - sqrt(R) x12, sqrt(R) x11 + sqrt(T) x12)
/// with separable cubic interpolation; rotated coordinates falling off the
/// grid contribute zero (size the grid so the truncated mass is negligible).
WavefunctionGrid2D beam_splitter_transform(const WavefunctionGrid2D& psi, double T, double R);

/// Normalized x12 = y slice: the mode-1 state conditioned on a homodyne
/// outcome y on mode 2. Rejects slices of negligible probability mass.
WavefunctionGrid1D collapse_on_x12(const WavefunctionGrid2D& psi, double y);

/// Symmetrically-ordered characteristic function sampled on a symmetric
/// p grid (the q = 0 slice that determines the x1 distribution). The exact
/// evaluator is carried alongside the samples so that damping evolution,
/// which rescales the argument off-grid, never interpolates.
struct CharacteristicFunction1D {
    std::vector<double> p;
    std::vector<cplx> values;
    std::function<cplx(double)> eval;

    /// Gaussian-mode characteristic function chi(p) = exp(2 i p mu - 2 p^2 var)
    /// for the chosen axis, sampled on 2*half+1 symmetric points (p = 0 is a
    /// node, so the trace normalization chi(0) = 1 is checkable directly).
    static CharacteristicFunction1D from_mode(const GaussianMode& mode, Quadrature axis,
                                              double p_max, int half);

    /// Suggested grid: wide enough that the Gaussian envelope decays below
    /// 1e-9 at the edge for the given mode, covering damped evolution too.
    static CharacteristicFunction1D for_mode_auto(const GaussianMode& mode, Quadrature axis);
};

/// Damping in closed form: chi_t(p) = exp(-(1 - e^{-gt}) p^2 / 2) chi_0(e^{-gt/2} p),
/// applied pointwise on the p grid.
CharacteristicFunction1D evolve_characteristic(const CharacteristicFunction1D& chi, double gamma_t);

/// Fourier inversion p(x) = (1/pi) \int dp e^{-2 i x p} chi(p), evaluated on
/// the requested x grid by trapezoid quadrature over the samples. Rejects an
/// aliased or under-resolved grid (density integral off unity by > 1e-4 or a
/// negative excursion beyond -1e-8).
std::vector<double> pdf_from_characteristic(const CharacteristicFunction1D& chi,
                                            const GridSpec1D& x_grid);

/// Plain-text tabular dumps for debugging: header line, then one row per
/// node with whitespace-separated columns.
void dump_wavefunction(const WavefunctionGrid1D& psi, std::ostream& os);
void dump_wavefunction(const WavefunctionGrid2D& psi, std::ostream& os);

}  // namespace sqkd::oracle
