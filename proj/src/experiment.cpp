#include "sqkd/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace sqkd::harness {

namespace {

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t master_seed,
                                int threads) {
    std::vector<double> values;
    if (spec.sweep)
        values = spec.sweep->values;
    else
        values.push_back(0.0);
    const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t jobs = values.size() * reps;

    std::vector<protocol::SessionResult> results(jobs);
    std::vector<std::exception_ptr> errors(jobs);

    auto run_job = [&](std::size_t j) {
        const std::size_t point = j / reps;
        const std::size_t rep = j % reps;
        try {
            protocol::SessionConfig cfg =
                spec.sweep ? apply_sweep_value(spec, values[point]) : spec.session;
            cfg.seed = splitmix64(master_seed ^ splitmix64((point << 20) + rep));
            results[j] = protocol::run_session(cfg);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    const int n_threads = std::max(1, threads);
    if (n_threads == 1 || jobs <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) run_job(j);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentResult out;
    out.points.reserve(values.size());
    for (std::size_t point = 0; point < values.size(); ++point) {
        SweepPointSummary s;
        s.value = spec.sweep ? values[point] : 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const protocol::SessionResult& r = results[point * reps + rep];
            s.kept_fraction += r.kept_fraction;
            s.key_rate += r.key_rate;
            s.error_rate += r.key_error_rate;
            s.detection_flag_rate += r.report.eavesdropper_flagged ? 1.0 : 0.0;
        }
        const double n = static_cast<double>(reps);
        s.kept_fraction /= n;
        s.key_rate /= n;
        s.error_rate /= n;
        s.detection_flag_rate /= n;
        out.points.push_back(s);
    }
    out.first_transcript = std::move(results.front().transcript);
    return out;
}

void write_summary_csv(const ExperimentResult& result, std::ostream& os) {
    os << "value,kept_fraction,key_rate_symbols_per_round,error_rate,detection_flag_rate\n";
    for (const SweepPointSummary& s : result.points)
        os << fmt17(s.value) << ',' << fmt17(s.kept_fraction) << ',' << fmt17(s.key_rate) << ','
           << fmt17(s.error_rate) << ',' << fmt17(s.detection_flag_rate) << '\n';
}

std::vector<TapScanRow> tap_scan(double r, double delta, int n_points, double R_min,
                                 double R_max) {
    if (n_points < 2) throw std::invalid_argument("tap_scan: need at least two points");
    if (!(R_min > 0.0 && R_max < 1.0 && R_min < R_max))
        throw std::invalid_argument("tap_scan: reflectivity range must lie inside (0, 1)");
    const double sigma = std::exp(-r);
    std::vector<TapScanRow> rows;
    rows.reserve(static_cast<std::size_t>(n_points));
    const double lmin = std::log(R_min);
    const double lstep = (std::log(R_max) - lmin) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        const double R = std::exp(lmin + i * lstep);
        const protocol::TapAttackFigures f = protocol::tap_attack_analysis(R, r, 0.0);
        TapScanRow row;
        row.reflectivity = R;
        row.eve_stddev = f.eve_estimator_stddev;
        row.width_ratio = f.bob_width_ratio;
        row.typical_shift = protocol::tap_attack_analysis(R, r, std::exp(r) / 2.0).bob_center_shift;
        row.eve_accurate = f.eve_estimator_stddev <= delta;
        row.disturbance_small = R < sigma * delta;
        rows.push_back(row);
    }
    return rows;
}

void write_tap_scan_csv(const std::vector<TapScanRow>& rows, std::ostream& os) {
    os << "reflectivity,eve_stddev,width_ratio,typical_shift,eve_accurate,disturbance_small\n";
    for (const TapScanRow& row : rows)
        os << fmt17(row.reflectivity) << ',' << fmt17(row.eve_stddev) << ','
           << fmt17(row.width_ratio) << ',' << fmt17(row.typical_shift) << ','
           << (row.eve_accurate ? 1 : 0) << ',' << (row.disturbance_small ? 1 : 0) << '\n';
}

}  // namespace sqkd::harness
