#include "sqkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace sqkd::oracle {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(const GridSpec1D& grid) {
    if (!(grid.x_max > grid.x_min)) throw oracle_error("grid: x_max must exceed x_min");
    if (grid.n < 64 || !power_of_two(grid.n))
        throw oracle_error("grid: n_points must be a power of two >= 64");
}

/// Cubic convolution kernel (Keys, a = -1/2): C^1, exact on cubics between
/// nodes, support [-2, 2].
double cubic_kernel(double t) {
    t = std::abs(t);
    if (t < 1.0) return 1.0 + t * t * (-2.5 + 1.5 * t);
    if (t < 2.0) return 2.0 + t * (-4.0 + t * (2.5 - 0.5 * t));
    return 0.0;
}

/// Interpolate complex samples at fractional index u (relative to node 0);
/// out-of-range indices read as zero.
cplx interp_row(const cplx* a, int n, double u) {
    const int i0 = static_cast<int>(std::floor(u));
    cplx acc{0.0, 0.0};
    for (int k = i0 - 1; k <= i0 + 2; ++k) {
        if (k < 0 || k >= n) continue;
        const double w = cubic_kernel(u - k);
        if (w != 0.0) acc += w * a[k];
    }
    return acc;
}

double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace

double WavefunctionGrid1D::norm() const {
    const int n = grid.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += trapezoid_weight(i, n) * std::norm(amp[i]);
    return s * grid.dx();
}

void WavefunctionGrid1D::normalize() {
    const double n2 = norm();
    if (!(n2 > 0.0)) throw oracle_error("normalize: zero-norm wavefunction");
    const double f = 1.0 / std::sqrt(n2);
    for (auto& a : amp) a *= f;
}

double WavefunctionGrid1D::mean() const {
    const int n = grid.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += trapezoid_weight(i, n) * grid.x(i) * std::norm(amp[i]);
    return s * grid.dx() / norm();
}

double WavefunctionGrid1D::variance() const {
    const int n = grid.n;
    const double mu = mean();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = grid.x(i) - mu;
        s += trapezoid_weight(i, n) * d * d * std::norm(amp[i]);
    }
    return s * grid.dx() / norm();
}

std::vector<double> WavefunctionGrid1D::density() const {
    std::vector<double> d(amp.size());
    for (std::size_t i = 0; i < amp.size(); ++i) d[i] = std::norm(amp[i]);
    return d;
}

double WavefunctionGrid2D::norm() const {
    const int n = grid.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += trapezoid_weight(i, n) * trapezoid_weight(j, n) *
                 std::norm(amp[static_cast<std::size_t>(i) * n + j]);
    return s * grid.dx() * grid.dx();
}

void WavefunctionGrid2D::normalize() {
    const double n2 = norm();
    if (!(n2 > 0.0)) throw oracle_error("normalize: zero-norm wavefunction");
    const double f = 1.0 / std::sqrt(n2);
    for (auto& a : amp) a *= f;
}

WavefunctionGrid1D build_squeezed_wavefunction(double r, double center, const GridSpec1D& grid) {
    if (r < 0.0) throw oracle_error("build_squeezed_wavefunction: r must be nonnegative");
    check_grid(grid);
    const double width = std::exp(-r);       // wavefunction width parameter
    const double sigma_pdf = 0.5 * width;    // density standard deviation
    if (grid.x_min > center - 6.0 * sigma_pdf || grid.x_max < center + 6.0 * sigma_pdf)
        throw oracle_error("build_squeezed_wavefunction: grid narrower than 6 sigma");
    if (grid.dx() > width / 4.0)
        throw oracle_error("build_squeezed_wavefunction: grid too coarse for this squeezing");
    WavefunctionGrid1D psi;
    psi.grid = grid;
    psi.amp.resize(static_cast<std::size_t>(grid.n));
    const double pref = std::pow(2.0 / (M_PI * width * width), 0.25);
    for (int i = 0; i < grid.n; ++i) {
        const double u = (grid.x(i) - center) / width;
        psi.amp[static_cast<std::size_t>(i)] = pref * std::exp(-u * u);
    }
    psi.normalize();
    return psi;
}

WavefunctionGrid2D product_state(const WavefunctionGrid1D& mode1,
                                 const WavefunctionGrid1D& mode2) {
    if (mode1.grid.x_min != mode2.grid.x_min || mode1.grid.x_max != mode2.grid.x_max ||
        mode1.grid.n != mode2.grid.n)
        throw oracle_error("product_state: factor grids must match");
    const int n = mode1.grid.n;
    WavefunctionGrid2D out;
    out.grid = mode1.grid;
    out.amp.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.amp[static_cast<std::size_t>(i) * n + j] =
                mode1.amp[static_cast<std::size_t>(i)] * mode2.amp[static_cast<std::size_t>(j)];
    return out;
}

WavefunctionGrid2D beam_splitter_transform(const WavefunctionGrid2D& psi, double T, double R) {
    if (std::abs(T + R - 1.0) > 1e-12)
        throw oracle_error("beam_splitter_transform: T + R must equal 1");
    const double t = std::sqrt(T);
    const double u = std::sqrt(R);
    const int n = psi.grid.n;
    const double dx = psi.grid.dx();
    const double x0 = psi.grid.x_min;
    WavefunctionGrid2D out;
    out.grid = psi.grid;
    out.amp.assign(static_cast<std::size_t>(n) * n, cplx{0.0, 0.0});

    // Rotation does not land on nodes: resample with a separable 4x4 cubic
    // stencil at the source point (t*x11 - u*x12, u*x11 + t*x12).
    for (int i = 0; i < n; ++i) {
        const double x11 = psi.grid.x(i);
        for (int j = 0; j < n; ++j) {
            const double x12 = psi.grid.x(j);
            const double a = t * x11 - u * x12;
            const double b = u * x11 + t * x12;
            const double ua = (a - x0) / dx;
            const double ub = (b - x0) / dx;
            if (ua < -2.0 || ua > n + 1.0 || ub < -2.0 || ub > n + 1.0) continue;
            // 4x4 tensor-product stencil around (ua, ub)
            const int ia = static_cast<int>(std::floor(ua));
            cplx acc{0.0, 0.0};
            for (int k = ia - 1; k <= ia + 2; ++k) {
                if (k < 0 || k >= n) continue;
                const double w = cubic_kernel(ua - k);
                if (w == 0.0) continue;
                acc += w * interp_row(psi.amp.data() + static_cast<std::size_t>(k) * n, n, ub);
            }
            out.amp[static_cast<std::size_t>(i) * n + j] = acc;
        }
    }
    const double norm_out = out.norm();
    if (std::abs(norm_out - 1.0) > 1e-6)
        throw oracle_error("beam_splitter_transform: norm not preserved (grid too small or coarse)");
    return out;
}

WavefunctionGrid1D collapse_on_x12(const WavefunctionGrid2D& psi, double y) {
    if (!psi.grid.contains(y)) throw oracle_error("collapse_on_x12: y outside the grid");
    const int n = psi.grid.n;
    const double uy = (y - psi.grid.x_min) / psi.grid.dx();
    WavefunctionGrid1D slice;
    slice.grid = psi.grid;
    slice.amp.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        slice.amp[static_cast<std::size_t>(i)] =
            interp_row(psi.amp.data() + static_cast<std::size_t>(i) * n, n, uy);
    if (slice.norm() < 1e-12)
        throw oracle_error("collapse_on_x12: negligible slice norm, improbable outcome");
    slice.normalize();
    return slice;
}

CharacteristicFunction1D CharacteristicFunction1D::from_mode(const GaussianMode& mode,
                                                             Quadrature axis, double p_max,
                                                             int half) {
    if (!(p_max > 0.0) || half < 32)
        throw oracle_error("CharacteristicFunction1D: bad grid parameters");
    const double mu = mode.mean(axis);
    const double var = mode.variance(axis);
    CharacteristicFunction1D chi;
    chi.eval = [mu, var](double p) -> cplx {
        return std::exp(cplx{-2.0 * var * p * p, 2.0 * p * mu});
    };
    const int n = 2 * half + 1;
    chi.p.resize(static_cast<std::size_t>(n));
    chi.values.resize(static_cast<std::size_t>(n));
    const double dp = p_max / half;
    for (int i = 0; i < n; ++i) {
        chi.p[static_cast<std::size_t>(i)] = (i - half) * dp;
        chi.values[static_cast<std::size_t>(i)] = chi.eval(chi.p[static_cast<std::size_t>(i)]);
    }
    return chi;
}

CharacteristicFunction1D CharacteristicFunction1D::for_mode_auto(const GaussianMode& mode,
                                                                 Quadrature axis) {
    // Damping only widens the Gaussian envelope by at most e (for gt <= 1),
    // so sizing off the initial variance keeps every evolved sample resolved.
    const double var = mode.variance(axis);
    const double p_max = 6.0 / std::sqrt(var);
    return from_mode(mode, axis, p_max, 2048);
}

CharacteristicFunction1D evolve_characteristic(const CharacteristicFunction1D& chi,
                                               double gamma_t) {
    if (gamma_t < 0.0) throw oracle_error("evolve_characteristic: gamma_t must be nonnegative");
    if (!chi.eval) throw oracle_error("evolve_characteristic: missing evaluator");
    const double decay = 1.0 - std::exp(-gamma_t);
    const double scale = std::exp(-gamma_t / 2.0);
    auto base = chi.eval;
    CharacteristicFunction1D out;
    out.eval = [base, decay, scale](double p) -> cplx {
        return std::exp(-0.5 * decay * p * p) * base(scale * p);
    };
    out.p = chi.p;
    out.values.resize(chi.p.size());
    for (std::size_t i = 0; i < chi.p.size(); ++i) out.values[i] = out.eval(chi.p[i]);
    return out;
}

std::vector<double> pdf_from_characteristic(const CharacteristicFunction1D& chi,
                                            const GridSpec1D& x_grid) {
    const std::size_t np = chi.p.size();
    if (np < 3 || chi.values.size() != np)
        throw oracle_error("pdf_from_characteristic: empty or inconsistent samples");
    if (x_grid.n < 2) throw oracle_error("pdf_from_characteristic: bad output grid");
    const double dp = chi.p[1] - chi.p[0];
    std::vector<double> pdf(static_cast<std::size_t>(x_grid.n));
    // chi(-p) = conj(chi(p)) makes the integrand's real part even in p, so
    // sum p >= 0 with doubled interior weights.
    const std::size_t mid = np / 2;
    for (int j = 0; j < x_grid.n; ++j) {
        const double x = x_grid.x(j);
        double acc = 0.5 * chi.values[mid].real();  // p = 0 term, half weight of the doubling
        for (std::size_t k = mid + 1; k < np; ++k) {
            const double ph = -2.0 * x * chi.p[k];
            const cplx c = chi.values[k];
            double w = (k == np - 1) ? 0.5 : 1.0;
            acc += w * (c.real() * std::cos(ph) - c.imag() * std::sin(ph));
        }
        pdf[static_cast<std::size_t>(j)] = 2.0 * acc * dp / M_PI;
    }
    double integral = 0.0;
    double min_v = 0.0;
    for (int j = 0; j < x_grid.n; ++j) {
        integral += trapezoid_weight(j, x_grid.n) * pdf[static_cast<std::size_t>(j)];
        min_v = std::min(min_v, pdf[static_cast<std::size_t>(j)]);
    }
    integral *= x_grid.dx();
    if (std::abs(integral - 1.0) > 1e-4)
        throw oracle_error("pdf_from_characteristic: aliasing detected, integral far from 1");
    if (min_v < -1e-8)
        throw oracle_error("pdf_from_characteristic: negative density beyond tolerance");
    return pdf;
}

void dump_wavefunction(const WavefunctionGrid1D& psi, std::ostream& os) {
    os << "x re_psi im_psi\n";
    char buf[96];
    for (int i = 0; i < psi.grid.n; ++i) {
        const cplx a = psi.amp[static_cast<std::size_t>(i)];
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", psi.grid.x(i), a.real(), a.imag());
        os << buf;
    }
}

void dump_wavefunction(const WavefunctionGrid2D& psi, std::ostream& os) {
    os << "x11 x12 re_psi im_psi\n";
    char buf[128];
    const int n = psi.grid.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const cplx a = psi.amp[static_cast<std::size_t>(i) * n + j];
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", psi.grid.x(i),
                          psi.grid.x(j), a.real(), a.imag());
            os << buf;
        }
    }
}

}  // namespace sqkd::oracle
