#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sqkd/acceptance.hpp"
#include "sqkd/experiment.hpp"
#include "sqkd/oracle.hpp"
#include "sqkd/protocol.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCriterion = 2;
constexpr int kExitInfeasible = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = 1;
    bool verbose = false;
};

std::uint64_t resolve_seed(const GlobalOptions& opts, std::uint64_t config_seed) {
    if (opts.seed) return *opts.seed;  // --seed wins
    if (const char* env = std::getenv("SQKD_SEED")) return std::strtoull(env, nullptr, 10);
    return config_seed;
}

std::ofstream open_output(const GlobalOptions& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    const fs::path path = fs::path(opts.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path.string());
    return os;
}

sqkd::harness::ExperimentSpec load_spec(const GlobalOptions& opts) {
    if (opts.config_path.empty())
        throw sqkd::harness::config_error("this subcommand requires --config <path>");
    return sqkd::harness::load_config(opts.config_path);
}

int cmd_simulate(const GlobalOptions& opts) {
    sqkd::harness::ExperimentSpec spec = load_spec(opts);
    spec.sweep.reset();  // single point
    const std::uint64_t seed = resolve_seed(opts, spec.session.seed);
    const auto result = sqkd::harness::run_experiment(spec, seed, opts.threads);
    {
        auto os = open_output(opts, spec.output_path + "_summary.csv");
        sqkd::harness::write_summary_csv(result, os);
    }
    {
        auto os = open_output(opts, spec.output_path + "_transcript.csv");
        sqkd::protocol::write_transcript_csv(result.first_transcript, os);
    }
    const auto& p = result.points.front();
    std::cout << spec.name << ": kept_fraction=" << p.kept_fraction << " key_rate=" << p.key_rate
              << " error_rate=" << p.error_rate << " flag_rate=" << p.detection_flag_rate << "\n";
    return kExitOk;
}

int cmd_sweep(const GlobalOptions& opts) {
    sqkd::harness::ExperimentSpec spec = load_spec(opts);
    if (!spec.sweep) throw sqkd::harness::config_error("sweep subcommand needs a 'sweep' block");
    const std::uint64_t seed = resolve_seed(opts, spec.session.seed);
    const auto result = sqkd::harness::run_experiment(spec, seed, opts.threads);
    auto os = open_output(opts, spec.output_path + "_sweep.csv");
    sqkd::harness::write_summary_csv(result, os);
    if (opts.verbose) sqkd::harness::write_summary_csv(result, std::cout);
    std::cout << spec.name << ": " << result.points.size() << " sweep points written\n";
    return kExitOk;
}

int cmd_attack(const GlobalOptions& opts, int points) {
    double r = 3.35, delta = 0.125;
    std::string stem = "tap";
    if (!opts.config_path.empty()) {
        const auto spec = sqkd::harness::load_config(opts.config_path);
        r = spec.session.r;
        delta = spec.session.binning.delta;
        stem = spec.output_path;
    }
    const auto rows = sqkd::harness::tap_scan(r, delta, points);
    auto os = open_output(opts, stem + "_tap_scan.csv");
    sqkd::harness::write_tap_scan_csv(rows, os);
    long both = 0;
    for (const auto& row : rows)
        if (row.eve_accurate && row.disturbance_small) ++both;
    std::cout << "tap scan: " << rows.size() << " reflectivities, " << both
              << " satisfy both information gain and small disturbance\n";
    return kExitOk;
}

/// Brute-force cross-validation of the analytic layer on fresh random draws.
int cmd_oracle_check(const GlobalOptions& opts, int trials) {
    using namespace sqkd;
    Rng rng = make_rng(resolve_seed(opts, 1));
    bool ok = true;

    double worst_l1 = 0.0;
    for (int i = 0; i < trials; ++i) {
        const double r = 3.5 * uniform01(rng);
        const double gt = 0.005 + 0.995 * uniform01(rng);
        const double s = -2.0 + 4.0 * uniform01(rng);
        const GaussianMode mode0 = squeezed_state(Quadrature::X1, s, r);
        const auto chi = oracle::evolve_characteristic(
            oracle::CharacteristicFunction1D::for_mode_auto(mode0, Quadrature::X1), gt);
        const oracle::GridSpec1D xg{-(std::abs(s) + 3.5), std::abs(s) + 3.5, 1024};
        const auto pdf = oracle::pdf_from_characteristic(chi, xg);
        const GaussianMode evolved = loss_evolve(mode0, gt);
        double dist = 0.0;
        for (int j = 0; j < xg.n; ++j)
            dist += std::abs(pdf[static_cast<std::size_t>(j)] -
                             quadrature_pdf(evolved, Quadrature::X1, xg.x(j)));
        worst_l1 = std::max(worst_l1, dist * xg.dx());
    }
    std::cout << (worst_l1 < 1e-4 ? "[PASS] " : "[FAIL] ")
              << "damping oracle: max L1 = " << worst_l1 << " over " << trials << " draws\n";
    ok = ok && worst_l1 < 1e-4;

    double worst_cond = 0.0;
    const oracle::GridSpec1D grid{-5.25, 5.25, 2048};
    for (int i = 0; i < 20; ++i) {
        const double r = 0.2 + 1.6 * uniform01(rng);
        const double T = 0.6 + 0.38 * uniform01(rng);
        const double s = 0.5 + 1.5 * uniform01(rng);
        const double sigma = std::exp(-r);
        const double y = -std::sqrt(1.0 - T) * s +
                         (2.0 * uniform01(rng) - 1.0) * std::sqrt(T + (1 - T) * sigma * sigma);
        const auto cond = condition_on_homodyne(
            apply_beam_splitter(embed_with_vacuum(squeezed_state(Quadrature::X1, s, r)), T, 1.0 - T),
            2, Quadrature::X1, y);
        const auto slice = oracle::collapse_on_x12(
            oracle::beam_splitter_transform(
                oracle::product_state(oracle::build_squeezed_wavefunction(r, s, grid),
                                      oracle::build_squeezed_wavefunction(0.0, 0.0, grid)),
                T, 1.0 - T),
            y);
        worst_cond = std::max(worst_cond, std::abs(slice.mean() - cond.mean1) /
                                              std::max(std::abs(cond.mean1), 0.1));
        worst_cond = std::max(worst_cond,
                              std::abs(std::sqrt(slice.variance() / cond.var1) - 1.0));
    }
    std::cout << (worst_cond < 1e-4 ? "[PASS] " : "[FAIL] ")
              << "conditioning oracle: max relative deviation = " << worst_cond << "\n";
    ok = ok && worst_cond < 1e-4;

    return ok ? kExitOk : kExitCriterion;
}

int cmd_accept(const GlobalOptions& opts) {
    const std::uint64_t seed = resolve_seed(opts, 20250901);
    const auto results =
        sqkd::acceptance::run_all(seed, opts.threads, opts.verbose ? &std::cout : nullptr);
    sqkd::acceptance::write_report_text(results, std::cout);
    auto os = open_output(opts, "acceptance_report.csv");
    sqkd::acceptance::write_report_csv(results, os);
    return sqkd::acceptance::all_passed(results) ? kExitOk : kExitCriterion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"squeezed-state quadrature-key-distribution simulator"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "experiment configuration (JSON)");
    app.add_option("--seed", opts.seed, "master seed (overrides config and SQKD_SEED)");
    app.add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", opts.threads, "worker threads")->capture_default_str();
    app.add_flag("--verbose", opts.verbose, "chatty progress output");

    auto* simulate = app.add_subcommand("simulate", "run one session configuration");
    auto* sweep = app.add_subcommand("sweep", "run the config's parameter sweep");
    auto* attack = app.add_subcommand("attack", "beam-splitter tap feasibility scan");
    int scan_points = 100;
    attack->add_option("--points", scan_points, "reflectivity grid size")->capture_default_str();
    auto* oracle_check =
        app.add_subcommand("oracle-check", "cross-validate closed forms against the grid oracle");
    int trials = 50;
    oracle_check->add_option("--trials", trials, "random draws")->capture_default_str();
    auto* accept = app.add_subcommand("accept", "run the release acceptance suite");
    for (auto* sub : {simulate, sweep, attack, oracle_check, accept}) sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (sweep->parsed()) return cmd_sweep(opts);
        if (attack->parsed()) return cmd_attack(opts, scan_points);
        if (oracle_check->parsed()) return cmd_oracle_check(opts, trials);
        if (accept->parsed()) return cmd_accept(opts);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const sqkd::infeasible_error& e) {
        std::cerr << "infeasible parameters: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const sqkd::harness::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
