#include "sqkd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sqkd::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw config_error(what); }

int line_of_offset(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(std::string("config: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

long get_integer(const json& j, const char* key, long fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        fail(std::string("config: '") + key + "' must be an integer");
    return j.at(key).get<long>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) fail(std::string("config: '") + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

protocol::EveStrategy parse_eve(const json& j, double session_r) {
    const std::string kind = j.value("strategy", "none");
    if (kind == "none") return protocol::EveNone{};
    if (kind == "intercept_coherent") return protocol::EveInterceptCoherent{};
    if (kind == "intercept_squeezed")
        return protocol::EveInterceptSqueezed{get_number(j, "r_eve", session_r)};
    if (kind == "beam_splitter_tap") {
        if (!j.contains("reflectivity"))
            fail("config: eve.beam_splitter_tap requires 'reflectivity'");
        return protocol::EveBeamSplitterTap{get_number(j, "reflectivity", 0.0)};
    }
    if (kind == "amplifier_aware") return protocol::EveAmplifierAware{};
    fail("config: unknown eve strategy '" + kind + "'");
}

}  // namespace

ExperimentSpec parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << origin << ":" << line_of_offset(text, e.byte) << ": " << e.what();
        fail(os.str());
    }
    if (!root.is_object()) fail(origin + ": top level must be an object");

    ExperimentSpec spec;
    spec.name = root.value("name", std::string("experiment"));
    spec.output_path = root.value("output_path", spec.name);
    spec.s_margin = get_number(root, "s_margin", 0.14);
    if (!(spec.s_margin > 0.0 && spec.s_margin < 1.0))
        fail("config: s_margin must lie in (0, 1)");
    spec.repetitions = static_cast<int>(get_integer(root, "repetitions", 1));
    if (spec.repetitions < 1) fail("config: repetitions must be >= 1");

    const json session = root.value("session", json::object());
    if (!session.is_object()) fail("config: 'session' must be an object");

    protocol::SessionConfig cfg;
    cfg.r = get_number(session, "r", 3.35);

    const json binning = session.value("binning", json::object());
    const double delta = get_number(binning, "delta", 0.125);
    spec.half_range_defaulted = !binning.contains("half_range");
    const double half_range = get_number(binning, "half_range", std::exp(cfg.r) / 2.0);
    cfg.binning = protocol::BinningScheme::create(delta, half_range);

    cfg.gamma_T = get_number(session, "gamma_T", 0.0);
    if (session.contains("amplifier")) {
        const json amp = session.at("amplifier");
        if (!amp.is_object()) fail("config: 'amplifier' must be an object");
        cfg.amplifier = protocol::AmplifierConfig{get_number(amp, "gain", 1.0),
                                                  get_bool(amp, "randomized", true)};
    }
    cfg.n_rounds = get_integer(session, "n_rounds", 10000);
    cfg.check_fraction = get_number(session, "check_fraction", 0.25);
    const json det = session.value("detection", json::object());
    cfg.detection.baseline_error = get_number(det, "baseline_error", 3.9e-4);
    cfg.detection.threshold_multiplier = get_number(det, "threshold_multiplier", 3.0);
    cfg.eve = parse_eve(session.value("eve", json::object()), cfg.r);
    cfg.seed = static_cast<std::uint64_t>(get_integer(session, "seed", 1));
    cfg.validate();
    spec.session = cfg;

    if (root.contains("sweep")) {
        const json sw = root.at("sweep");
        if (!sw.is_object() || !sw.contains("parameter") || !sw.contains("values"))
            fail("config: sweep requires 'parameter' and 'values'");
        SweepSpec sweep;
        sweep.parameter = sw.at("parameter").get<std::string>();
        for (const json& v : sw.at("values")) {
            if (!v.is_number()) fail("config: sweep values must be numbers");
            sweep.values.push_back(v.get<double>());
        }
        if (sweep.values.empty()) fail("config: sweep values must be non-empty");
        spec.sweep = sweep;
        // Path check up front so a bad name fails at load, not mid-run.
        apply_sweep_value(spec, sweep.values.front());
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

protocol::SessionConfig apply_sweep_value(const ExperimentSpec& spec, double value) {
    protocol::SessionConfig cfg = spec.session;
    const std::string& p = spec.sweep ? spec.sweep->parameter : "";
    if (p == "gamma_T") {
        cfg.gamma_T = value;
    } else if (p == "r") {
        cfg.r = value;
        if (spec.half_range_defaulted)
            cfg.binning = protocol::BinningScheme::create(cfg.binning.delta, std::exp(value) / 2.0);
    } else if (p == "binning.delta") {
        cfg.binning = protocol::BinningScheme::create(value, cfg.binning.half_range);
    } else if (p == "binning.half_range") {
        cfg.binning = protocol::BinningScheme::create(cfg.binning.delta, value);
    } else if (p == "check_fraction") {
        cfg.check_fraction = value;
    } else if (p == "n_rounds") {
        cfg.n_rounds = static_cast<long>(value);
    } else if (p == "amplifier.gain") {
        if (!cfg.amplifier) fail("config: sweep of amplifier.gain without an amplifier");
        cfg.amplifier->gain = value;
    } else if (p == "eve.reflectivity") {
        if (!std::holds_alternative<protocol::EveBeamSplitterTap>(cfg.eve))
            fail("config: sweep of eve.reflectivity without a beam_splitter_tap Eve");
        std::get<protocol::EveBeamSplitterTap>(cfg.eve).reflectivity = value;
    } else if (p == "eve.r_eve") {
        if (!std::holds_alternative<protocol::EveInterceptSqueezed>(cfg.eve))
            fail("config: sweep of eve.r_eve without an intercept_squeezed Eve");
        std::get<protocol::EveInterceptSqueezed>(cfg.eve).r_eve = value;
    } else {
        fail("config: unknown sweep parameter '" + p + "'");
    }
    cfg.validate();
    return cfg;
}

}  // namespace sqkd::harness
