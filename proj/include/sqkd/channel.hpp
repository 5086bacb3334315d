#pragma once

#include <stdexcept>

#include "sqkd/gaussian.hpp"

namespace sqkd {

/// Raised when a requested parameter regime admits no solution (e.g. a loss
/// budget with no positive admissible value).
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A lossy fiber characterized by the dimensionless loss-time product
/// gamma * T (loss rate times transit time). Only the product is dynamical.
struct FiberSegment {
    double gamma_T = 0.0;
    static FiberSegment create(double gamma_T);
};

/// Ideal degenerate parametric amplifier: multiplies one quadrature by G and
/// the conjugate one by 1/G, preserving the uncertainty product.
struct PhaseSensitiveAmplifier {
    double gain = 1.0;
    Quadrature amplified_axis = Quadrature::X1;
    static PhaseSensitiveAmplifier create(double gain, Quadrature amplified_axis);
};

/// Inputs of the admissible-loss inequalities: the safety margin s (< 1), the
/// bin width delta, and the sender's squeezed-axis variance.
struct LinkBudget {
    double s_margin;
    double delta;
    double initial_var1;
    static LinkBudget create(double s_margin, double delta, double initial_var1);
};

/// Which rescaled estimator Bob forms from his homodyne outcome:
///   PlainXi            e^{gT/2} X1(T)        (bare fiber)
///   AmplifiedRightXi1  e^{gT/2} X1(T) / G    (mid-link amplifier on the measured axis)
///   AmplifiedWrongXi2  e^{gT/2} X1(T) * G    (mid-link amplifier on the conjugate axis)
enum class EstimatorKind { PlainXi, AmplifiedRightXi1, AmplifiedWrongXi2 };

/// Closed-form damping: means decay as e^{-gT/2}, variances relax toward the
/// vacuum value 1/4 as e^{-gT} var + (1 - e^{-gT})/4.
GaussianMode loss_evolve(const GaussianMode& mode, double gamma_T);

GaussianMode psa_amplify(const GaussianMode& mode, const PhaseSensitiveAmplifier& amp);

/// Fiber of total loss gamma_T split into two equal halves with the amplifier
/// between them.
GaussianMode amplified_link(const GaussianMode& mode, double gamma_T,
                            const PhaseSensitiveAmplifier& amp);

struct EstimatorStats {
    double mean;
    double stddev;
};

/// Mean and standard deviation of the chosen estimator for an input mode sent
/// through the corresponding link. All three estimators are unbiased for the
/// input X1 mean; their spreads differ. Exact exponentials, no small-loss
/// approximation.
EstimatorStats estimator_stats(EstimatorKind kind, const GaussianMode& mode0, double gamma_T,
                               double gain);

/// Largest admissible gamma_T such that the estimator spread stays below
/// s * delta, in the paper-standard small-loss linearization:
///   plain:            4 [(s d)^2 - var1(0)]
///   amplified right:  8 [(s d)^2 - var1(0)]   (twice the plain budget)
///   amplified wrong:  8 (s d)^2 / G^2
/// Throws infeasible_error when no positive budget exists.
double loss_budget(EstimatorKind kind, const LinkBudget& budget, double gain);

/// Admissible amplifier gain range [g_min, g_max] for the mismatched-setting
/// audit: G^2 must dominate 1 and G must stay well below 1/(s delta). The
/// dominance factor operationalizes "much greater/less than". An empty window
/// is reported, never clamped.
struct GainWindow {
    double g_min;
    double g_max;
    bool empty() const { return !(g_min < g_max); }
};

GainWindow gain_window(double s_margin, double delta, double dominance_factor = 3.0);

}  // namespace sqkd
