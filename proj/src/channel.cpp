#include "sqkd/channel.hpp"

#include <cmath>

namespace sqkd {

FiberSegment FiberSegment::create(double gamma_T) {
    if (gamma_T < 0.0 || !std::isfinite(gamma_T))
        throw std::invalid_argument("FiberSegment: gamma_T must be nonnegative");
    return FiberSegment{gamma_T};
}

PhaseSensitiveAmplifier PhaseSensitiveAmplifier::create(double gain, Quadrature amplified_axis) {
    if (!(gain >= 1.0)) throw std::invalid_argument("PhaseSensitiveAmplifier: gain must be >= 1");
    return PhaseSensitiveAmplifier{gain, amplified_axis};
}

LinkBudget LinkBudget::create(double s_margin, double delta, double initial_var1) {
    if (!(s_margin > 0.0 && s_margin < 1.0))
        throw std::invalid_argument("LinkBudget: s_margin must lie in (0, 1)");
    if (!(delta > 0.0)) throw std::invalid_argument("LinkBudget: delta must be positive");
    if (!(initial_var1 > 0.0))
        throw std::invalid_argument("LinkBudget: initial_var1 must be positive");
    return LinkBudget{s_margin, delta, initial_var1};
}

GaussianMode loss_evolve(const GaussianMode& mode, double gamma_T) {
    if (gamma_T < 0.0) throw std::invalid_argument("loss_evolve: gamma_T must be nonnegative");
    const double k = std::exp(-gamma_T);
    const double ks = std::exp(-gamma_T / 2.0);
    const double fill = 0.25 * (1.0 - k);
    return GaussianMode::create(ks * mode.mean1, ks * mode.mean2, k * mode.var1 + fill,
                                k * mode.var2 + fill);
}

GaussianMode psa_amplify(const GaussianMode& mode, const PhaseSensitiveAmplifier& amp) {
    const double g = amp.gain;
    const double g2 = g * g;
    if (amp.amplified_axis == Quadrature::X1)
        return GaussianMode::create(g * mode.mean1, mode.mean2 / g, g2 * mode.var1,
                                    mode.var2 / g2);
    return GaussianMode::create(mode.mean1 / g, g * mode.mean2, mode.var1 / g2, g2 * mode.var2);
}

GaussianMode amplified_link(const GaussianMode& mode, double gamma_T,
                            const PhaseSensitiveAmplifier& amp) {
    return loss_evolve(psa_amplify(loss_evolve(mode, gamma_T / 2.0), amp), gamma_T / 2.0);
}

EstimatorStats estimator_stats(EstimatorKind kind, const GaussianMode& mode0, double gamma_T,
                               double gain) {
    if (gamma_T < 0.0) throw std::invalid_argument("estimator_stats: gamma_T must be nonnegative");
    if (!(gain >= 1.0)) throw std::invalid_argument("estimator_stats: gain must be >= 1");
    const double v0 = mode0.var1;
    double var;
    switch (kind) {
        case EstimatorKind::PlainXi:
            var = v0 + 0.25 * (std::exp(gamma_T) - 1.0);
            break;
        case EstimatorKind::AmplifiedRightXi1:
            var = v0 + 0.25 * (std::exp(gamma_T / 2.0) - 1.0) +
                  std::exp(gamma_T) * (1.0 - std::exp(-gamma_T / 2.0)) / (4.0 * gain * gain);
            break;
        case EstimatorKind::AmplifiedWrongXi2:
            var = v0 + 0.25 * (std::exp(gamma_T / 2.0) - 1.0) +
                  0.25 * gain * gain * std::exp(gamma_T) * (1.0 - std::exp(-gamma_T / 2.0));
            break;
        default:
            throw std::invalid_argument("estimator_stats: unknown estimator kind");
    }
    return EstimatorStats{mode0.mean1, std::sqrt(var)};
}

double loss_budget(EstimatorKind kind, const LinkBudget& budget, double gain) {
    const double sd2 = budget.s_margin * budget.delta * budget.s_margin * budget.delta;
    switch (kind) {
        case EstimatorKind::PlainXi:
        case EstimatorKind::AmplifiedRightXi1: {
            const double head = sd2 - budget.initial_var1;
            if (!(head > 0.0))
                throw infeasible_error(
                    "loss_budget: no admissible loss, initial variance already exceeds (s*delta)^2");
            return (kind == EstimatorKind::PlainXi ? 4.0 : 8.0) * head;
        }
        case EstimatorKind::AmplifiedWrongXi2:
            if (!(gain >= 1.0)) throw std::invalid_argument("loss_budget: gain must be >= 1");
            return 8.0 * sd2 / (gain * gain);
        default:
            throw std::invalid_argument("loss_budget: unknown estimator kind");
    }
}

GainWindow gain_window(double s_margin, double delta, double dominance_factor) {
    if (!(dominance_factor >= 1.0))
        throw std::invalid_argument("gain_window: dominance factor must be >= 1");
    const double sd = s_margin * delta;
    if (!(sd > 0.0)) throw std::invalid_argument("gain_window: s_margin * delta must be positive");
    if (sd >= 1.0) return GainWindow{dominance_factor, 0.0};  // incompatible, always empty
    return GainWindow{dominance_factor, 1.0 / (dominance_factor * sd)};
}

}  // namespace sqkd
