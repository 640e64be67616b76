#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfc/algdiff.hpp"
#include "mfc/control.hpp"
#include "mfc/plants.hpp"
#include "mfc/signal.hpp"
#include "mfc/traject.hpp"

namespace mfc {

enum class ControllerVariant {
    classic_pid,      ///< u = PID(e)
    ipid,             ///< ultra-local model cancellation + PID terms
    flatness_pid,     ///< u = u* + PID(e), u* from the restricted model
    restricted_ipid,  ///< u = u* - [G]_e + PID(e)
    gpi,              ///< flat-output GPI around the nominal plan
    gpi_compensated,  ///< GPI with perturbation reconstruction u*_pert = u* - [varpi]_e
};

inline std::string to_string(ControllerVariant v) {
    switch (v) {
        case ControllerVariant::classic_pid: return "classic-pid";
        case ControllerVariant::ipid: return "ipid";
        case ControllerVariant::flatness_pid: return "flatness-pid";
        case ControllerVariant::restricted_ipid: return "restricted-ipid";
        case ControllerVariant::gpi: return "gpi";
        case ControllerVariant::gpi_compensated: return "gpi-compensated";
    }
    return "?";
}

inline ControllerVariant variant_from_string(const std::string& s) {
    if (s == "classic-pid") return ControllerVariant::classic_pid;
    if (s == "ipid") return ControllerVariant::ipid;
    if (s == "flatness-pid") return ControllerVariant::flatness_pid;
    if (s == "restricted-ipid") return ControllerVariant::restricted_ipid;
    if (s == "gpi") return ControllerVariant::gpi;
    if (s == "gpi-compensated") return ControllerVariant::gpi_compensated;
    throw std::invalid_argument("unknown controller variant '" + s + "'");
}

/// Parametric trajectory description (the serializable face of Trajectory).
struct TrajectorySpec {
    std::string kind = "constant";  // constant | bezier | sine | piecewise
    double value = 0.0;
    double from = 0.0, to = 1.0, start = 1.0, duration = 2.0;
    double amplitude = 1.0, omega = 1.0, phase = 0.0, offset = 0.0;
    double start_value = 0.0;
    std::vector<std::array<double, 3>> steps;  // (target, start, duration)

    Trajectory build() const {
        if (kind == "constant") return Trajectory::constant(value);
        if (kind == "bezier") return Trajectory::bezier(from, to, start, duration);
        if (kind == "sine") return Trajectory::sine(amplitude, omega, phase, offset);
        if (kind == "piecewise") return Trajectory::piecewise(start_value, steps);
        throw std::invalid_argument("unknown trajectory kind '" + kind + "'");
    }

    bool operator==(const TrajectorySpec&) const = default;
};

/// Per-controlled-output settings.
struct ChannelConfig {
    int nu = 1;
    double alpha = 1.0;
    PidGains gains;
    TrajectorySpec traj;
};

struct EstimatorSettings {
    double denoise_window = 0.4;
    int denoise_degree = 1;
    double deriv1_window = 0.4;
    int deriv1_degree = 1;
    double deriv2_window = 1.0;
    int deriv2_degree = 2;
};

/// One closed-loop experiment: plant + estimators + controller + trajectory.
struct ScenarioConfig {
    std::string label;
    std::string figure;       ///< catalog cross-reference
    std::string description;

    std::string plant = "stable-siso";
    FaultSpec fault;                     ///< overrides the plant's fault spec
    PerturbationSpec perturbation;       ///< nonmin-phase plants only
    double nmp_a = 1.0, nmp_b = -1.0, nmp_c = -0.5;

    ControllerVariant variant = ControllerVariant::ipid;
    std::vector<ChannelConfig> channels{ChannelConfig{}};
    std::vector<std::size_t> controlled_outputs;  ///< defaults to 0..channels-1

    NoiseSpec noise{NoiseKind::gaussian_white, 0.01, 1};
    double ts = 0.01;
    double duration = 20.0;
    EstimatorSettings estimators;
    bool antiwindup = true;
    std::optional<Vec> initial_state;  ///< plant default (or nominal plan) when unset
    std::optional<Vec> u_init;         ///< warm-up hold input; zeros when unset

    std::optional<double> u_min, u_max, du_min, du_max;  ///< broadcast overrides

    double metrics_window_fraction = 0.8;  ///< metrics over the final fraction

    double gpi_pole = -1.0;
    std::optional<GpiCoefficients> gpi_coeffs;  ///< pole placement when unset
    /// First-order filter time constant on the reconstructed perturbation
    /// before it corrects the nominal control (0 disables filtering).
    double varpi_filter_tau = 0.5;
    /// Source of the control-derivative estimate in the reconstruction:
    /// "law" differentiates the GPI law as written, "input" differentiates
    /// the applied-input history with a sliding kernel.
    std::string varpi_udot = "law";
    RestrictedModel restricted{0.5, 2.0};

    std::vector<std::size_t> outputs() const {
        if (!controlled_outputs.empty()) return controlled_outputs;
        std::vector<std::size_t> idx(channels.size());
        for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
        return idx;
    }

    void validate() const {
        if (channels.empty()) throw std::invalid_argument("config: no controlled channels");
        if (!(ts > 0.0)) throw std::invalid_argument("config: ts must be positive");
        if (!(duration > 10.0 * ts)) throw std::invalid_argument("config: duration too short");
        if (!(metrics_window_fraction > 0.0 && metrics_window_fraction < 1.0))
            throw std::invalid_argument("config: metrics window fraction must be in (0,1)");
        const auto p = build_plant(plant);
        if (channels.size() != p.input_dim)
            throw std::invalid_argument("config: one channel per plant input required");
        for (auto j : outputs())
            if (j >= p.output_dim) throw std::invalid_argument("config: controlled output out of range");
        for (const auto& ch : channels) {
            if (ch.nu != 1 && ch.nu != 2) throw std::invalid_argument("config: nu must be 1 or 2");
            if (ch.alpha == 0.0) throw std::invalid_argument("config: alpha must be nonzero");
            ch.traj.build();  // validates parameters
        }
        const bool is_gpi = variant == ControllerVariant::gpi ||
                            variant == ControllerVariant::gpi_compensated;
        if (is_gpi && plant != "nonmin-phase")
            throw std::invalid_argument("config: GPI variants require the nonmin-phase plant");
        if (is_gpi && nmp_a <= 0.0)
            throw std::invalid_argument("config: GPI backward integration needs a > 0");
        fault.validate();
    }
};

// ---------------------------------------------------------------------------
// Key-value serialization (one scenario per plain-text config file)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: not a number: '" + s + "'");
    }
}

inline std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

}  // namespace detail

using KvMap = std::vector<std::pair<std::string, std::string>>;

inline KvMap to_kv(const ScenarioConfig& c) {
    KvMap kv;
    auto put = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    auto putd = [&](const std::string& k, double v) { put(k, detail::fmt(v)); };

    put("label", c.label);
    put("figure", c.figure);
    put("description", c.description);
    put("plant", c.plant);
    put("controller", to_string(c.variant));
    putd("ts", c.ts);
    putd("duration", c.duration);
    put("noise.kind", c.noise.kind == NoiseKind::gaussian_white ? "gaussian-white" : "none");
    putd("noise.variance", c.noise.variance);
    put("noise.seed", std::to_string(c.noise.seed));
    put("antiwindup", c.antiwindup ? "true" : "false");
    putd("metrics.window_fraction", c.metrics_window_fraction);
    putd("estimators.denoise.window", c.estimators.denoise_window);
    put("estimators.denoise.degree", std::to_string(c.estimators.denoise_degree));
    putd("estimators.deriv1.window", c.estimators.deriv1_window);
    put("estimators.deriv1.degree", std::to_string(c.estimators.deriv1_degree));
    putd("estimators.deriv2.window", c.estimators.deriv2_window);
    put("estimators.deriv2.degree", std::to_string(c.estimators.deriv2_degree));

    if (c.fault.kind == FaultKind::gain_loss) {
        put("fault.kind", "gain-loss");
        putd("fault.factor", c.fault.factor);
        putd("fault.onset", c.fault.t_onset);
    }
    if (c.plant == "nonmin-phase") {
        putd("plant.a", c.nmp_a);
        putd("plant.b", c.nmp_b);
        putd("plant.c", c.nmp_c);
        if (c.perturbation.kind != PerturbationKind::none) {
            put("perturbation.kind", c.perturbation.kind == PerturbationKind::constant
                                         ? "constant"
                                         : "speed-proportional");
            putd("perturbation.value", c.perturbation.value);
        }
    }
    if (c.u_min) putd("u.min", *c.u_min);
    if (c.u_max) putd("u.max", *c.u_max);
    if (c.du_min) putd("du.min", *c.du_min);
    if (c.du_max) putd("du.max", *c.du_max);

    const bool is_gpi = c.variant == ControllerVariant::gpi ||
                        c.variant == ControllerVariant::gpi_compensated;
    if (is_gpi) {
        putd("gpi.pole", c.gpi_pole);
        if (c.variant == ControllerVariant::gpi_compensated) {
            putd("gpi.varpi_filter_tau", c.varpi_filter_tau);
            put("gpi.udot", c.varpi_udot);
        }
        if (c.gpi_coeffs) {
            putd("gpi.gamma", c.gpi_coeffs->gamma);
            putd("gpi.kp", c.gpi_coeffs->kp);
            putd("gpi.ki", c.gpi_coeffs->ki);
            putd("gpi.kii", c.gpi_coeffs->kii);
        }
    }
    if (c.variant == ControllerVariant::restricted_ipid ||
        c.variant == ControllerVariant::flatness_pid) {
        putd("restricted.mass", c.restricted.mass);
        putd("restricted.k1", c.restricted.k1_hat);
    }

    for (std::size_t j = 0; j < c.channels.size(); ++j) {
        const auto& ch = c.channels[j];
        const std::string p = "out." + std::to_string(j + 1) + ".";
        put(p + "nu", std::to_string(ch.nu));
        putd(p + "alpha", ch.alpha);
        putd(p + "kp", ch.gains.kp);
        putd(p + "ki", ch.gains.ki);
        putd(p + "kd", ch.gains.kd);
        put(p + "traj", ch.traj.kind);
        if (ch.traj.kind == "constant") {
            putd(p + "traj.value", ch.traj.value);
        } else if (ch.traj.kind == "bezier") {
            putd(p + "traj.from", ch.traj.from);
            putd(p + "traj.to", ch.traj.to);
            putd(p + "traj.start", ch.traj.start);
            putd(p + "traj.duration", ch.traj.duration);
        } else if (ch.traj.kind == "sine") {
            putd(p + "traj.amplitude", ch.traj.amplitude);
            putd(p + "traj.omega", ch.traj.omega);
            putd(p + "traj.phase", ch.traj.phase);
            putd(p + "traj.offset", ch.traj.offset);
        } else if (ch.traj.kind == "piecewise") {
            putd(p + "traj.start_value", ch.traj.start_value);
            std::string steps;
            for (const auto& s : ch.traj.steps) {
                if (!steps.empty()) steps += " ; ";
                steps += detail::fmt(s[0]) + " " + detail::fmt(s[1]) + " " + detail::fmt(s[2]);
            }
            put(p + "traj.steps", steps);
        }
    }
    if (!c.controlled_outputs.empty()) {
        std::string s;
        for (auto j : c.controlled_outputs) {
            if (!s.empty()) s += " ";
            s += std::to_string(j + 1);
        }
        put("controlled_outputs", s);
    }
    if (c.initial_state) {
        std::string s;
        for (double v : *c.initial_state) {
            if (!s.empty()) s += " ";
            s += detail::fmt(v);
        }
        put("initial_state", s);
    }
    if (c.u_init) {
        std::string s;
        for (double v : *c.u_init) {
            if (!s.empty()) s += " ";
            s += detail::fmt(v);
        }
        put("u_init", s);
    }
    return kv;
}

inline std::string serialize(const ScenarioConfig& c) {
    std::string out;
    for (const auto& [k, v] : to_kv(c)) out += k + " = " + v + "\n";
    return out;
}

inline KvMap parse_kv_text(const std::string& text) {
    KvMap kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: malformed line '" + line + "'");
        kv.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return kv;
}

inline ScenarioConfig config_from_kv(const KvMap& kv) {
    ScenarioConfig c;
    c.channels.clear();
    c.noise = {NoiseKind::none, 0.0, 1};

    auto channel_at = [&](std::size_t j) -> ChannelConfig& {
        while (c.channels.size() <= j) c.channels.emplace_back();
        return c.channels[j];
    };
    auto parse_vec = [&](const std::string& v) {
        Vec out;
        std::istringstream is(v);
        double x;
        while (is >> x) out.push_back(x);
        return out;
    };

    GpiCoefficients gc;
    bool has_gpi_coeff = false;

    for (const auto& [key, value] : kv) {
        if (key == "label") c.label = value;
        else if (key == "figure") c.figure = value;
        else if (key == "description") c.description = value;
        else if (key == "plant") c.plant = value;
        else if (key == "controller") c.variant = variant_from_string(value);
        else if (key == "ts") c.ts = detail::parse_double(value);
        else if (key == "duration") c.duration = detail::parse_double(value);
        else if (key == "noise.kind")
            c.noise.kind = value == "gaussian-white" ? NoiseKind::gaussian_white : NoiseKind::none;
        else if (key == "noise.variance") c.noise.variance = detail::parse_double(value);
        else if (key == "noise.seed") c.noise.seed = std::stoull(value);
        else if (key == "antiwindup") c.antiwindup = (value == "true" || value == "1");
        else if (key == "metrics.window_fraction")
            c.metrics_window_fraction = detail::parse_double(value);
        else if (key == "estimators.denoise.window")
            c.estimators.denoise_window = detail::parse_double(value);
        else if (key == "estimators.denoise.degree") c.estimators.denoise_degree = std::stoi(value);
        else if (key == "estimators.deriv1.window")
            c.estimators.deriv1_window = detail::parse_double(value);
        else if (key == "estimators.deriv1.degree") c.estimators.deriv1_degree = std::stoi(value);
        else if (key == "estimators.deriv2.window")
            c.estimators.deriv2_window = detail::parse_double(value);
        else if (key == "estimators.deriv2.degree") c.estimators.deriv2_degree = std::stoi(value);
        else if (key == "fault.kind") c.fault.kind = value == "gain-loss" ? FaultKind::gain_loss : FaultKind::none;
        else if (key == "fault.factor") c.fault.factor = detail::parse_double(value);
        else if (key == "fault.onset") c.fault.t_onset = detail::parse_double(value);
        else if (key == "plant.a") c.nmp_a = detail::parse_double(value);
        else if (key == "plant.b") c.nmp_b = detail::parse_double(value);
        else if (key == "plant.c") c.nmp_c = detail::parse_double(value);
        else if (key == "perturbation.kind")
            c.perturbation.kind = value == "constant" ? PerturbationKind::constant
                                                      : PerturbationKind::speed_proportional;
        else if (key == "perturbation.value") c.perturbation.value = detail::parse_double(value);
        else if (key == "u.min") c.u_min = detail::parse_double(value);
        else if (key == "u.max") c.u_max = detail::parse_double(value);
        else if (key == "du.min") c.du_min = detail::parse_double(value);
        else if (key == "du.max") c.du_max = detail::parse_double(value);
        else if (key == "gpi.pole") c.gpi_pole = detail::parse_double(value);
        else if (key == "gpi.varpi_filter_tau") c.varpi_filter_tau = detail::parse_double(value);
        else if (key == "gpi.udot") c.varpi_udot = value;
        else if (key == "gpi.gamma") { gc.gamma = detail::parse_double(value); has_gpi_coeff = true; }
        else if (key == "gpi.kp") { gc.kp = detail::parse_double(value); has_gpi_coeff = true; }
        else if (key == "gpi.ki") { gc.ki = detail::parse_double(value); has_gpi_coeff = true; }
        else if (key == "gpi.kii") { gc.kii = detail::parse_double(value); has_gpi_coeff = true; }
        else if (key == "restricted.mass") c.restricted.mass = detail::parse_double(value);
        else if (key == "restricted.k1") c.restricted.k1_hat = detail::parse_double(value);
        else if (key == "controlled_outputs") {
            c.controlled_outputs.clear();
            std::istringstream is(value);
            std::size_t j;
            while (is >> j) c.controlled_outputs.push_back(j - 1);
        } else if (key == "initial_state") c.initial_state = parse_vec(value);
        else if (key == "u_init") c.u_init = parse_vec(value);
        else if (key.rfind("out.", 0) == 0) {
            const auto dot = key.find('.', 4);
            if (dot == std::string::npos)
                throw std::invalid_argument("config: malformed key '" + key + "'");
            const std::size_t j = std::stoul(key.substr(4, dot - 4)) - 1;
            const std::string field = key.substr(dot + 1);
            auto& ch = channel_at(j);
            if (field == "nu") ch.nu = std::stoi(value);
            else if (field == "alpha") ch.alpha = detail::parse_double(value);
            else if (field == "kp") ch.gains.kp = detail::parse_double(value);
            else if (field == "ki") ch.gains.ki = detail::parse_double(value);
            else if (field == "kd") ch.gains.kd = detail::parse_double(value);
            else if (field == "traj") ch.traj.kind = value;
            else if (field == "traj.value") ch.traj.value = detail::parse_double(value);
            else if (field == "traj.from") ch.traj.from = detail::parse_double(value);
            else if (field == "traj.to") ch.traj.to = detail::parse_double(value);
            else if (field == "traj.start") ch.traj.start = detail::parse_double(value);
            else if (field == "traj.duration") ch.traj.duration = detail::parse_double(value);
            else if (field == "traj.amplitude") ch.traj.amplitude = detail::parse_double(value);
            else if (field == "traj.omega") ch.traj.omega = detail::parse_double(value);
            else if (field == "traj.phase") ch.traj.phase = detail::parse_double(value);
            else if (field == "traj.offset") ch.traj.offset = detail::parse_double(value);
            else if (field == "traj.start_value") ch.traj.start_value = detail::parse_double(value);
            else if (field == "traj.steps") {
                ch.traj.steps.clear();
                std::istringstream groups(value);
                std::string group;
                while (std::getline(groups, group, ';')) {
                    std::istringstream gs(group);
                    std::array<double, 3> step{};
                    if (!(gs >> step[0] >> step[1] >> step[2]))
                        throw std::invalid_argument("config: malformed piecewise step '" + group + "'");
                    ch.traj.steps.push_back(step);
                }
            } else {
                throw std::invalid_argument("config: unknown channel key '" + key + "'");
            }
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    if (has_gpi_coeff) c.gpi_coeffs = gc;
    if (c.channels.empty()) c.channels.emplace_back();
    return c;
}

inline ScenarioConfig parse_config(const std::string& text) {
    return config_from_kv(parse_kv_text(text));
}

inline ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

/// Applies a "key=value" override onto the serialized form of the config.
inline ScenarioConfig with_override(const ScenarioConfig& c, const std::string& key,
                                    const std::string& value) {
    KvMap kv = to_kv(c);
    bool found = false;
    for (auto& [k, v] : kv) {
        if (k == key) {
            v = value;
            found = true;
        }
    }
    if (!found) kv.emplace_back(key, value);
    return config_from_kv(kv);
}

inline std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Scenario runner
// ---------------------------------------------------------------------------

struct RunArtifact {
    std::string label;
    std::vector<std::pair<std::string, SampledSignal>> traces;
    std::vector<TrackingMetrics> metrics;  ///< per controlled output, true y vs y*
    std::string metadata;
    std::uint64_t config_hash = 0;
    std::optional<double> diverged_at;

    bool ok() const { return !diverged_at.has_value(); }

    const SampledSignal& trace(const std::string& name) const {
        for (const auto& [n, s] : traces)
            if (n == name) return s;
        throw std::invalid_argument("no trace named '" + name + "'");
    }
};

namespace detail {

struct ChannelRuntime {
    Trajectory traj;
    std::optional<SlidingEstimator> den, d1, d2;
    UltraLocalState ul;
    ControllerState pid;
    GpiState gpi;
    std::vector<double> f_input_weights;  ///< estimator-consistent input averaging
    double denoised = 0.0, deriv1 = 0.0, deriv2 = 0.0;
    double last_u_star_used = 0.0;
    bool has_last_u_star = false;
    double varpi_filtered = 0.0;
    bool varpi_started = false;
    std::optional<SlidingEstimator> udot;  ///< derivative of the applied input
    double udot_est = 0.0;
    // Perturbation reconstruction needs every estimate at the same effective
    // time; [y] comes from a moving average over the same window as the
    // derivative kernels (all have group delay window/2).
    std::optional<SlidingEstimator> den_flat;
    double denoised_flat = 0.0;

    ChannelRuntime() : ul(), pid() {}
};

}  // namespace detail

inline RunArtifact run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    PlantModel plant = cfg.plant == "nonmin-phase"
                           ? make_nonmin_phase(cfg.nmp_a, cfg.nmp_b, cfg.nmp_c, cfg.perturbation)
                           : build_plant(cfg.plant);
    if (cfg.fault.kind != FaultKind::none) plant.fault = cfg.fault;
    for (std::size_t i = 0; i < plant.input_dim; ++i) {
        if (cfg.u_min) plant.constraints.u_min[i] = *cfg.u_min;
        if (cfg.u_max) plant.constraints.u_max[i] = *cfg.u_max;
        if (cfg.du_min) plant.constraints.du_min[i] = *cfg.du_min;
        if (cfg.du_max) plant.constraints.du_max[i] = *cfg.du_max;
    }
    plant.constraints.validate();

    const auto out_idx = cfg.outputs();
    const std::size_t n_ch = cfg.channels.size();
    const bool is_gpi = cfg.variant == ControllerVariant::gpi ||
                        cfg.variant == ControllerVariant::gpi_compensated;
    const bool needs_d1 = cfg.variant != ControllerVariant::gpi;
    auto needs_d2 = [&](const ChannelConfig& ch) {
        switch (cfg.variant) {
            case ControllerVariant::ipid: return ch.nu == 2;
            case ControllerVariant::restricted_ipid: return true;
            case ControllerVariant::gpi_compensated: return true;
            default: return false;
        }
    };

    // Nominal flat-output plan for the GPI family.
    std::optional<FlatNominal> plan;
    if (is_gpi)
        plan = flat_nominal_nonminphase(cfg.channels[0].traj.build(), cfg.nmp_a, cfg.nmp_b,
                                        cfg.nmp_c, 0.0, cfg.duration, cfg.ts);

    std::vector<detail::ChannelRuntime> chans(n_ch);
    for (std::size_t j = 0; j < n_ch; ++j) {
        auto& rt = chans[j];
        const auto& ch = cfg.channels[j];
        rt.traj = ch.traj.build();
        rt.den.emplace(make_kernel(0, cfg.estimators.denoise_degree, cfg.estimators.denoise_window),
                       cfg.ts);
        if (needs_d1)
            rt.d1.emplace(make_kernel(1, cfg.estimators.deriv1_degree, cfg.estimators.deriv1_window),
                          cfg.ts);
        if (needs_d2(ch))
            rt.d2.emplace(make_kernel(2, cfg.estimators.deriv2_degree, cfg.estimators.deriv2_window),
                          cfg.ts);
        if (cfg.variant == ControllerVariant::ipid) {
            Vec row(plant.input_dim, 0.0);
            row[j] = ch.alpha;  // decoupled local models throughout the catalog
            rt.ul = UltraLocalState(ch.nu, row, j);
            rt.f_input_weights = (ch.nu == 1 ? *rt.d1 : *rt.d2).input_weights(ch.nu);
        }
        if (cfg.variant == ControllerVariant::restricted_ipid ||
            cfg.variant == ControllerVariant::gpi_compensated)
            rt.f_input_weights = rt.d2->input_weights(2);
        if (cfg.variant == ControllerVariant::gpi_compensated) {
            if (cfg.varpi_udot == "input")
                rt.udot.emplace(make_kernel(1, 1, cfg.estimators.deriv2_window), cfg.ts);
            rt.den_flat.emplace(make_kernel(0, 0, cfg.estimators.deriv2_window), cfg.ts);
        }
        rt.pid = ControllerState(ch.gains);
        if (is_gpi)
            rt.gpi.coeffs = cfg.gpi_coeffs
                                ? *cfg.gpi_coeffs
                                : gpi_pole_placement(cfg.nmp_a, cfg.nmp_b, cfg.nmp_c, cfg.gpi_pole);
    }

    Vec x = cfg.initial_state ? *cfg.initial_state : plant.default_initial_state;
    if (is_gpi && !cfg.initial_state)
        x = {plan->z_star.samples[0], plan->z_dot_star.samples[0]};
    if (x.size() != plant.state_dim)
        throw std::invalid_argument("config: initial state dimension mismatch");

    Vec u_prev = cfg.u_init ? *cfg.u_init : Vec(plant.input_dim, 0.0);
    if (u_prev.size() != plant.input_dim)
        throw std::invalid_argument("config: u_init dimension mismatch");
    const Vec u_hold = u_prev;

    std::vector<GaussianStream> noise_streams;
    for (std::size_t j = 0; j < plant.output_dim; ++j)
        noise_streams.emplace_back(cfg.noise.seed + 0x9e3779b97f4a7c15ull * (j + 1));
    const bool with_noise =
        cfg.noise.kind == NoiseKind::gaussian_white && cfg.noise.variance > 0.0;
    const double noise_sigma = std::sqrt(std::max(0.0, cfg.noise.variance));

    const auto steps = static_cast<std::size_t>(std::round(cfg.duration / cfg.ts));
    const std::size_t n_samples = steps + 1;

    // Applied-input history, newest first; consumed by the windowed ultra-local
    // and restricted-model estimators.
    std::deque<Vec> u_hist;
    std::size_t u_hist_len = 1;
    for (const auto& rt : chans) u_hist_len = std::max(u_hist_len, rt.f_input_weights.size());
    auto window_input = [&](const std::vector<double>& a, std::size_t channel) {
        double s = 0.0;
        const std::size_t n = std::min(a.size(), u_hist.size());
        for (std::size_t j = 0; j < n; ++j) s += a[j] * u_hist[j][channel];
        return s;
    };

    auto new_trace = [&](std::size_t n) { return SampledSignal{std::vector<double>(n, 0.0), cfg.ts, 0.0}; };
    auto suffix = [&](const std::string& base, std::size_t j, std::size_t total) {
        return total > 1 ? base + std::to_string(j + 1) : base;
    };

    std::vector<SampledSignal> tr_y(n_ch, new_trace(n_samples)), tr_meas(n_ch, new_trace(n_samples)),
        tr_den(n_ch, new_trace(n_samples)), tr_ref(n_ch, new_trace(n_samples)),
        tr_e(n_ch, new_trace(n_samples)), tr_f(n_ch, new_trace(n_samples)),
        tr_freeze(n_ch, new_trace(n_samples));
    std::vector<SampledSignal> tr_u(plant.input_dim, new_trace(n_samples));
    SampledSignal tr_g = new_trace(n_samples), tr_varpi = new_trace(n_samples),
                  tr_ustar = new_trace(n_samples), tr_ustar_used = new_trace(n_samples);
    std::vector<SampledSignal> tr_aux(plant.aux_names.size(), new_trace(n_samples));
    std::vector<std::size_t> extra_outputs;  // exposed but uncontrolled (e.g. tank 3)
    for (std::size_t j = 0; j < plant.output_dim; ++j)
        if (std::find(out_idx.begin(), out_idx.end(), j) == out_idx.end())
            extra_outputs.push_back(j);
    std::vector<SampledSignal> tr_extra(extra_outputs.size(), new_trace(n_samples));

    std::optional<double> diverged_at;
    std::size_t recorded = 0;

    for (std::size_t k = 0; k < n_samples; ++k) {
        const double t = static_cast<double>(k) * cfg.ts;
        const Vec y_true = plant.output(x);

        bool all_ready = true;
        for (std::size_t j = 0; j < n_ch; ++j) {
            auto& rt = chans[j];
            const double meas =
                y_true[out_idx[j]] + (with_noise ? noise_sigma * noise_streams[out_idx[j]].next() : 0.0);
            tr_meas[j].samples[k] = meas;
            if (auto v = rt.den->push(meas)) rt.denoised = *v; else all_ready = false;
            if (rt.d1) { if (auto v = rt.d1->push(meas)) rt.deriv1 = *v; else all_ready = false; }
            if (rt.d2) { if (auto v = rt.d2->push(meas)) rt.deriv2 = *v; else all_ready = false; }
            if (rt.udot && !rt.udot->ready()) all_ready = false;
            if (rt.den_flat) {
                if (auto v = rt.den_flat->push(meas)) rt.denoised_flat = *v; else all_ready = false;
            }
        }

        Vec u_desired = u_hold;
        if (is_gpi) u_desired[0] = plan->u_star.samples[k];  // nominal open-loop hold
        if (all_ready) {
            for (std::size_t j = 0; j < n_ch; ++j) {
                auto& rt = chans[j];
                const auto& ch = cfg.channels[j];
                const double y_ref = rt.traj.eval(t);
                const double e = y_ref - rt.denoised;
                const double e_dot = rt.traj.eval(t, 1) - rt.deriv1;

                switch (cfg.variant) {
                    case ControllerVariant::classic_pid:
                        u_desired[j] = classic_pid_step(rt.pid, e, cfg.ts, e_dot);
                        break;
                    case ControllerVariant::ipid: {
                        const double deriv_nu = ch.nu == 1 ? rt.deriv1 : rt.deriv2;
                        Vec u_eff(plant.input_dim, 0.0);
                        for (std::size_t i = 0; i < plant.input_dim; ++i)
                            u_eff[i] = window_input(rt.f_input_weights, i);
                        estimate_F(rt.ul, deriv_nu, u_eff);
                        u_desired[j] = ipid_step(rt.ul, rt.pid, rt.traj.eval(t, ch.nu), e,
                                                 e_dot, cfg.ts);
                        tr_f[j].samples[k] = rt.ul.f_estimate;
                        break;
                    }
                    case ControllerVariant::flatness_pid: {
                        const double u_star =
                            cfg.restricted.nominal_control(y_ref, rt.traj.eval(t, 2));
                        tr_ustar.samples[k] = u_star;
                        u_desired[j] = u_star + classic_pid_step(rt.pid, e, cfg.ts, e_dot);
                        break;
                    }
                    case ControllerVariant::restricted_ipid: {
                        const double u_star =
                            cfg.restricted.nominal_control(y_ref, rt.traj.eval(t, 2));
                        // same estimator-consistent input averaging as the ultra-local
                        // F estimate (m [y'']_e carries the windowed u)
                        const double u_eff = window_input(rt.f_input_weights, j);
                        const double g_est =
                            cfg.restricted.estimate_G(rt.deriv2, rt.denoised, u_eff);
                        tr_ustar.samples[k] = u_star;
                        tr_g.samples[k] = g_est;
                        u_desired[j] = restricted_icontroller_step(cfg.restricted, rt.pid, u_star,
                                                                   g_est, e, e_dot, cfg.ts);
                        break;
                    }
                    case ControllerVariant::gpi:
                    case ControllerVariant::gpi_compensated: {
                        const double u_star = plan->u_star.samples[k];
                        double u_star_used = u_star;
                        if (cfg.variant == ControllerVariant::gpi_compensated) {
                            // every reconstruction input refers to the kernels'
                            // common effective time t - window/2
                            const std::size_t lag = rt.d2->warmup_samples() / 2;
                            const std::size_t kd = k >= lag ? k - lag : 0;
                            const double t_d = static_cast<double>(kd) * cfg.ts;
                            const double u_eff = window_input(rt.f_input_weights, j);
                            const double prev_star =
                                rt.has_last_u_star ? rt.last_u_star_used : u_star;
                            const double varpi =
                                rt.udot ? estimate_varpi_with_udot(
                                              rt.gpi, rt.denoised_flat, rt.deriv1, rt.deriv2,
                                              u_eff, rt.udot_est, cfg.nmp_a, cfg.nmp_b,
                                              cfg.nmp_c)
                                        : estimate_varpi(rt.gpi, rt.denoised_flat, rt.deriv1,
                                                         rt.deriv2, u_eff, prev_star,
                                                         plan->u_dot_star.samples[kd],
                                                         rt.traj.eval(t_d),
                                                         rt.traj.eval(t_d, 1), cfg.nmp_a,
                                                         cfg.nmp_b, cfg.nmp_c);
                            if (cfg.varpi_filter_tau > 0.0) {
                                const double beta = cfg.ts / (cfg.varpi_filter_tau + cfg.ts);
                                rt.varpi_filtered = rt.varpi_started
                                                        ? rt.varpi_filtered +
                                                              beta * (varpi - rt.varpi_filtered)
                                                        : varpi;
                            } else {
                                rt.varpi_filtered = varpi;
                            }
                            rt.varpi_started = true;
                            u_star_used = u_star - rt.varpi_filtered;
                            tr_varpi.samples[k] = rt.varpi_filtered;
                        }
                        tr_ustar.samples[k] = u_star;
                        tr_ustar_used.samples[k] = u_star_used;
                        u_desired[j] = gpi_step(rt.gpi, u_star_used, rt.denoised, y_ref, cfg.ts);
                        rt.last_u_star_used = u_star_used;
                        rt.has_last_u_star = true;
                        break;
                    }
                }
            }
        }

        const auto applied = clamp(u_desired, u_prev, plant.constraints, cfg.ts);
        for (std::size_t j = 0; j < n_ch; ++j) {
            if (cfg.antiwindup) antiwindup_update(chans[j].pid, applied.saturated[j]);
            if (is_gpi) gpi_note_applied(chans[j].gpi, applied.u[j]);
            if (chans[j].udot) {
                if (auto v = chans[j].udot->push(applied.u[j])) chans[j].udot_est = *v;
            }
            tr_freeze[j].samples[k] = chans[j].pid.freeze ? 1.0 : 0.0;
        }

        for (std::size_t j = 0; j < n_ch; ++j) {
            tr_y[j].samples[k] = y_true[out_idx[j]];
            tr_den[j].samples[k] = chans[j].den->ready() ? chans[j].denoised : tr_meas[j].samples[k];
            tr_ref[j].samples[k] = chans[j].traj.eval(t);
            tr_e[j].samples[k] = tr_ref[j].samples[k] - tr_y[j].samples[k];
        }
        for (std::size_t i = 0; i < plant.input_dim; ++i) tr_u[i].samples[k] = applied.u[i];
        for (std::size_t i = 0; i < extra_outputs.size(); ++i)
            tr_extra[i].samples[k] = y_true[extra_outputs[i]];
        if (plant.aux) {
            Vec du(plant.input_dim, 0.0);
            const Vec a = plant.aux(x, applied.u, du, t);
            for (std::size_t i = 0; i < a.size(); ++i) tr_aux[i].samples[k] = a[i];
        }
        recorded = k + 1;

        if (k + 1 < n_samples) {
            try {
                x = simulate_step(plant, x, applied.u, cfg.ts, t, &u_prev);
            } catch (const SimulationDiverged& ex) {
                diverged_at = ex.t;
                break;
            }
            u_prev = applied.u;
            u_hist.push_front(applied.u);
            if (u_hist.size() > u_hist_len) u_hist.pop_back();
        }
    }

    auto truncate = [&](SampledSignal& s) { s.samples.resize(recorded); };

    RunArtifact art;
    art.label = cfg.label;
    art.diverged_at = diverged_at;
    const std::string cfg_text = serialize(cfg);
    art.config_hash = fnv1a_hash(cfg_text);

    for (std::size_t j = 0; j < n_ch; ++j) {
        truncate(tr_y[j]); truncate(tr_meas[j]); truncate(tr_den[j]); truncate(tr_ref[j]);
        truncate(tr_e[j]); truncate(tr_f[j]); truncate(tr_freeze[j]);
        art.traces.emplace_back(suffix("y", j, n_ch), tr_y[j]);
        art.traces.emplace_back(suffix("y_meas", j, n_ch), tr_meas[j]);
        art.traces.emplace_back(suffix("y_denoised", j, n_ch), tr_den[j]);
        art.traces.emplace_back(suffix("y_ref", j, n_ch), tr_ref[j]);
        art.traces.emplace_back(suffix("e", j, n_ch), tr_e[j]);
        if (cfg.variant == ControllerVariant::ipid)
            art.traces.emplace_back(suffix("f_est", j, n_ch), tr_f[j]);
        art.traces.emplace_back(suffix("freeze", j, n_ch), tr_freeze[j]);
    }
    for (std::size_t i = 0; i < plant.input_dim; ++i) {
        truncate(tr_u[i]);
        art.traces.emplace_back(suffix("u", i, plant.input_dim), tr_u[i]);
    }
    if (cfg.variant == ControllerVariant::restricted_ipid) {
        truncate(tr_g);
        art.traces.emplace_back("g_est", tr_g);
    }
    if (cfg.variant == ControllerVariant::gpi_compensated) {
        truncate(tr_varpi);
        art.traces.emplace_back("varpi_est", tr_varpi);
    }
    if (is_gpi || cfg.variant == ControllerVariant::restricted_ipid ||
        cfg.variant == ControllerVariant::flatness_pid) {
        truncate(tr_ustar);
        art.traces.emplace_back("u_star", tr_ustar);
        if (cfg.variant == ControllerVariant::gpi_compensated) {
            truncate(tr_ustar_used);
            art.traces.emplace_back("u_star_pert", tr_ustar_used);
        }
    }
    for (std::size_t i = 0; i < extra_outputs.size(); ++i) {
        truncate(tr_extra[i]);
        art.traces.emplace_back("y" + std::to_string(extra_outputs[i] + 1), tr_extra[i]);
    }
    for (std::size_t i = 0; i < plant.aux_names.size(); ++i) {
        truncate(tr_aux[i]);
        art.traces.emplace_back(plant.aux_names[i], tr_aux[i]);
    }

    if (!diverged_at) {
        const double t_end = static_cast<double>(recorded - 1) * cfg.ts;
        const TimeWindow win{(1.0 - cfg.metrics_window_fraction) * t_end, t_end};
        for (std::size_t j = 0; j < n_ch; ++j)
            art.metrics.push_back(tracking_metrics(tr_y[j], tr_ref[j], win));
    }

    std::ostringstream meta;
    meta << "label = " << cfg.label << "\n";
    meta << "config_hash = " << art.config_hash << "\n";
    meta << "seed = " << cfg.noise.seed << "\n";
    meta << "samples = " << recorded << "\n";
    if (diverged_at) meta << "diverged_at = " << *diverged_at << "\n";
    for (std::size_t j = 0; j < art.metrics.size(); ++j) {
        meta << "rms_error." << (j + 1) << " = " << art.metrics[j].rms_error << "\n";
        meta << "max_abs_error." << (j + 1) << " = " << art.metrics[j].max_abs_error << "\n";
    }
    meta << "--- config ---\n" << cfg_text;
    art.metadata = meta.str();
    return art;
}

// ---------------------------------------------------------------------------
// Comparison and catalog
// ---------------------------------------------------------------------------

struct Comparison {
    struct Row {
        std::string label;
        std::vector<TrackingMetrics> metrics;
        double mean_rms = 0.0;
    };
    std::vector<Row> rows;
    std::vector<std::vector<double>> rms_ratio;  ///< ratio[i][j] = mean_rms_i / mean_rms_j
};

inline Comparison compare(const std::vector<ScenarioConfig>& configs) {
    if (configs.size() < 2) throw std::invalid_argument("compare: need at least two configs");
    for (std::size_t i = 1; i < configs.size(); ++i) {
        if (configs[i].plant != configs[0].plant)
            throw std::invalid_argument("compare: configs must share the plant");
        if (configs[i].channels.size() != configs[0].channels.size())
            throw std::invalid_argument("compare: configs must share the channel layout");
        for (std::size_t j = 0; j < configs[0].channels.size(); ++j)
            if (!(configs[i].channels[j].traj == configs[0].channels[j].traj))
                throw std::invalid_argument("compare: configs must share the trajectories");
    }
    Comparison cmp;
    for (const auto& cfg : configs) {
        auto art = run_scenario(cfg);
        if (!art.ok())
            throw SimulationDiverged(*art.diverged_at);
        Comparison::Row row;
        row.label = cfg.label;
        row.metrics = art.metrics;
        for (const auto& m : art.metrics) row.mean_rms += m.rms_error;
        row.mean_rms /= static_cast<double>(art.metrics.size());
        cmp.rows.push_back(std::move(row));
    }
    cmp.rms_ratio.assign(cmp.rows.size(), std::vector<double>(cmp.rows.size(), 1.0));
    for (std::size_t i = 0; i < cmp.rows.size(); ++i)
        for (std::size_t j = 0; j < cmp.rows.size(); ++j)
            cmp.rms_ratio[i][j] = cmp.rows[i].mean_rms / cmp.rows[j].mean_rms;
    return cmp;
}

struct CatalogEntry {
    std::string label;
    std::string figure;
    std::string description;
};

ScenarioConfig scenario_config(const std::string& label);

inline std::vector<CatalogEntry> catalog() {
    static const std::vector<std::string> labels = {
        "fig1-nominal",        "fig2-aged",           "fig3-fault",
        "fig4-large-spectrum", "fig5/6-mimo",         "fig7-cubic",
        "fig8/9-antiwindup",   "fig11-ballbeam-bezier", "fig12-ballbeam-sine",
        "fig14-tanks",         "fig15-spring",        "fig16-nmp-nominal",
        "fig17/18-nmp-const-perturb", "fig19-nmp-speed-perturb",
    };
    std::vector<CatalogEntry> out;
    for (const auto& l : labels) {
        const auto cfg = scenario_config(l);
        out.push_back({cfg.label, cfg.figure, cfg.description});
    }
    return out;
}

/// Built-in scenario configurations, one per reproduced experiment.
inline ScenarioConfig scenario_config(const std::string& label) {
    ScenarioConfig c;
    c.label = label;

    auto bez = [](double from, double to, double start, double dur) {
        TrajectorySpec t;
        t.kind = "bezier";
        t.from = from;
        t.to = to;
        t.start = start;
        t.duration = dur;
        return t;
    };

    if (label == "fig1-nominal" || label == "fig2-aged" || label == "fig3-fault") {
        c.plant = label == "fig2-aged" ? "stable-siso-aged"
                : label == "fig3-fault" ? "stable-siso-fault" : "stable-siso";
        c.figure = label == "fig1-nominal" ? "Fig. 1" : label == "fig2-aged" ? "Fig. 2" : "Fig. 3";
        c.description = label == "fig1-nominal"
                            ? "stable SISO plant, ultra-local i-PI vs Broida-tuned PID"
                        : label == "fig2-aged"
                            ? "same loop on the aged plant (poles moved to -1.5), tuned for nominal"
                            : "same loop with a 50% actuation power loss at t = 8 s";
        c.variant = ControllerVariant::ipid;
        c.duration = 20.0;
        ChannelConfig ch;
        ch.nu = 1;
        ch.alpha = 1.0;
        ch.gains = pole_placement_gains(1, -2.0);
        ch.traj = bez(0.0, 1.0, 1.0, 2.0);
        c.channels = {ch};
        if (label == "fig3-fault") c.fault = {FaultKind::gain_loss, 0.5, 8.0};
        return c;
    }
    if (label == "fig4-large-spectrum") {
        c.plant = "large-spectrum";
        c.figure = "Fig. 4";
        c.description = "SISO plant with poles over three decades (three unstable), i-PI loop";
        c.variant = ControllerVariant::ipid;
        c.duration = 20.0;
        ChannelConfig ch;
        ch.nu = 1;
        ch.alpha = 1.0;
        ch.gains = pole_placement_gains(1, -3.0);
        ch.traj = bez(0.0, 1.0, 1.0, 2.0);
        c.channels = {ch};
        c.estimators.denoise_window = 0.2;
        c.estimators.deriv1_window = 0.2;
        return c;
    }
    if (label == "fig5/6-mimo") {
        c.plant = "mimo-2x2";
        c.figure = "Fig. 5/6";
        c.description = "2x2 transfer-matrix plant, decoupled ultra-local models (nu = 1 and 2)";
        c.variant = ControllerVariant::ipid;
        c.duration = 30.0;
        ChannelConfig ch1;
        ch1.nu = 1;
        ch1.alpha = 10.0;
        ch1.gains = {1.0, 0.0, 0.0};
        ch1.traj = bez(0.0, 1.0, 1.0, 2.0);
        ChannelConfig ch2;
        ch2.nu = 2;
        ch2.alpha = 10.0;
        ch2.gains = {50.0, 50.0, 10.0};
        ch2.traj = bez(0.0, 1.0, 1.0, 2.0);
        c.channels = {ch1, ch2};
        return c;
    }
    if (label == "fig7-cubic" || label == "fig8/9-antiwindup") {
        c.plant = "cubic-unstable";
        c.figure = label == "fig7-cubic" ? "Fig. 7" : "Fig. 8/9";
        c.description = label == "fig7-cubic"
                            ? "open-loop-unstable cubic-input plant, i-PI loop"
                            : "the same loop with -2 <= u <= 0.4 and integral freeze on saturation";
        c.variant = ControllerVariant::ipid;
        c.duration = 15.0;
        ChannelConfig ch;
        ch.nu = 1;
        ch.alpha = 1.0;
        ch.gains = {2.0, 1.0, 0.0};  // printed (-2, -1) under the opposite error sign
        ch.traj = bez(0.0, 1.0, 1.0, 2.0);
        c.channels = {ch};
        if (label == "fig8/9-antiwindup") {
            c.u_min = -2.0;
            c.u_max = 0.4;
            c.antiwindup = true;
        }
        return c;
    }
    if (label == "fig11-ballbeam-bezier" || label == "fig12-ballbeam-sine") {
        c.plant = "ball-beam";
        c.figure = label == "fig11-ballbeam-bezier" ? "Fig. 11" : "Fig. 12";
        c.description = std::string("ball-and-beam under saturated angle control, ") +
                        (label == "fig11-ballbeam-bezier" ? "polynomial" : "sinusoidal") +
                        " reference";
        c.variant = ControllerVariant::ipid;
        c.duration = 25.0;
        ChannelConfig ch;
        ch.nu = 2;
        ch.alpha = -100.0;  // the angle-to-acceleration gain is negative (-B G sin u)
        ch.gains = pole_placement_gains(2, -2.0);
        if (label == "fig11-ballbeam-bezier") {
            ch.traj = bez(0.0, 1.0, 2.0, 4.0);
        } else {
            ch.traj.kind = "sine";
            ch.traj.amplitude = 1.0;
            ch.traj.omega = 0.5;
            ch.traj.phase = 0.0;
            ch.traj.offset = 0.0;
        }
        c.channels = {ch};
        return c;
    }
    if (label == "fig14-tanks") {
        c.plant = "three-tanks";
        c.figure = "Fig. 14";
        c.description = "three-tank system, decoupled i-PI on tanks 1 and 2 under zero-order hold";
        c.variant = ControllerVariant::ipid;
        c.duration = 60.0;
        c.controlled_outputs = {0, 1};
        ChannelConfig ch1;
        ch1.nu = 1;
        ch1.alpha = 200.0;
        ch1.gains = {10.0, 0.02, 0.0};
        ch1.traj = bez(0.3, 0.4, 5.0, 15.0);
        ChannelConfig ch2;
        ch2 = ch1;
        ch2.traj = bez(0.1, 0.2, 5.0, 15.0);
        c.channels = {ch1, ch2};
        c.u_min = 0.0;
        c.u_max = 1e-3;
        c.estimators.denoise_window = 1.0;
        c.estimators.deriv1_window = 1.0;
        return c;
    }
    if (label == "fig15-spring") {
        c.plant = "spring";
        c.figure = "Fig. 15";
        c.description =
            "mass-spring with Duffing stiffness, Tustin friction and damping; restricted-model "
            "i-PID vs classic PID";
        c.variant = ControllerVariant::restricted_ipid;
        c.duration = 16.0;
        c.restricted = {0.5, 2.0};
        ChannelConfig ch;
        ch.nu = 2;
        ch.alpha = 1.0;
        ch.gains = spring_pid_gains(0.5, 2.0, -3.0);
        ch.traj.kind = "piecewise";
        ch.traj.start_value = 0.0;
        ch.traj.steps = {{1.0, 1.0, 2.0}, {0.0, 5.0, 2.0}, {1.0, 9.0, 2.0}};
        c.channels = {ch};
        return c;
    }
    if (label == "fig16-nmp-nominal" || label == "fig17/18-nmp-const-perturb" ||
        label == "fig19-nmp-speed-perturb") {
        c.plant = "nonmin-phase";
        c.variant = label == "fig16-nmp-nominal" ? ControllerVariant::gpi
                                                 : ControllerVariant::gpi_compensated;
        c.duration = 14.0;
        ChannelConfig ch;
        ch.nu = 1;
        ch.alpha = 1.0;
        ch.traj = bez(0.0, 1.0, 2.0, 2.0);
        c.channels = {ch};
        if (label == "fig16-nmp-nominal") {
            c.figure = "Fig. 16";
            c.description = "non-minimum-phase plant, GPI tracking of the flat-output plan";
            c.nmp_a = 1.0; c.nmp_b = -1.0; c.nmp_c = -0.5;
        } else if (label == "fig17/18-nmp-const-perturb") {
            c.figure = "Fig. 17/18";
            c.description = "constant unmodeled effect (-0.5) reconstructed and compensated";
            c.nmp_a = 1.0; c.nmp_b = -1.0; c.nmp_c = -0.5;
            c.perturbation = {PerturbationKind::constant, -0.5};
            c.estimators.deriv1_window = 1.0;  // align with the deriv2 window
        } else {
            c.figure = "Fig. 19";
            c.description = "speed-proportional unmodeled effect (-0.1 dy/dt) compensated";
            c.nmp_a = 2.0; c.nmp_b = -1.0; c.nmp_c = 1.0;
            c.perturbation = {PerturbationKind::speed_proportional, -0.1};
            c.estimators.deriv1_window = 1.0;
        }
        return c;
    }
    throw std::invalid_argument("unknown scenario label '" + label + "'");
}

// ---------------------------------------------------------------------------
// Artifact output
// ---------------------------------------------------------------------------

inline void write_run_artifact(const RunArtifact& art, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [name, sig] : art.traces) {
        std::string fname = name;
        for (char& ch : fname)
            if (ch == '/' || ch == ' ') ch = '_';
        write_csv_file(dir + "/" + fname + ".csv", sig, name);
    }
    {
        std::ofstream f(dir + "/metrics.csv");
        f.imbue(std::locale::classic());
        f.precision(12);
        f << "output,rms_error,max_abs_error,t_start,t_end\n";
        for (std::size_t j = 0; j < art.metrics.size(); ++j) {
            const auto& m = art.metrics[j];
            f << (j + 1) << ',' << m.rms_error << ',' << m.max_abs_error << ','
              << m.eval_window.t_start << ',' << m.eval_window.t_end << '\n';
        }
    }
    {
        std::ofstream f(dir + "/metadata.txt");
        f << art.metadata;
    }
}

}  // namespace mfc
