#pragma once

// Command-line frontend: sweep, bloch, gap and run subcommands.
//
// Settings resolve as command-line flag > --config file > built-in default.
// The config file is flat `key = value` text using the flag names without
// the leading dashes; `#` starts a comment.
//
// Exit codes: 0 success, 2 usage error, 3 numerical-integrity failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "friction/error.hpp"
#include "friction/protocol.hpp"
#include "friction/pulses.hpp"

namespace friction::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIntegrity = 3;

/// Usage problems detected after flag parsing (bad values, config keys).
class UsageError : public Error {
public:
    using Error::Error;
};

/// %.15g: at least 12 significant digits, locale independent.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// underscores in keys read as dashes.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        std::replace(key.begin(), key.end(), '_', '-');
        out[key] = value;
    }
    return out;
}

inline std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    return parse_config(in);
}

/// Values for every recognised setting. Unset optionals fall through to the
/// config file, then to the defaults.
struct Flags {
    std::optional<double> b0, b1, b2, beta, tau, tau_min, tau_max, tau_step;
    std::optional<std::string> pulse, out;
    std::optional<int> steps, stride;
    std::optional<std::string> config;
};

/// Fully resolved settings for one invocation.
struct Settings {
    double b0 = 0.5;
    double b1 = 0.5;
    double b2 = 0.05;
    double beta = 1.0;
    double tau = 20.0;
    double tau_min = 0.5;
    double tau_max = 100.0;
    double tau_step = 0.5;
    std::string pulse = "sin,pow:0.5,pow:1,pow:2";
    int steps = 20000;
    int stride = 10;
    std::string out = "-";
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw UsageError("config key '" + key + "': not a number");
    return x;
}

inline int to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long x = 0;
    try {
        x = std::stol(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || x < std::numeric_limits<int>::min() ||
        x > std::numeric_limits<int>::max())
        throw UsageError("config key '" + key + "': not an integer");
    return static_cast<int>(x);
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace detail

/// Applies flag > config > default precedence.
inline Settings resolve(const Flags& flags, const std::map<std::string, std::string>& config,
                        const std::string& default_pulse) {
    Settings s;
    s.pulse = default_pulse;
    for (const auto& [key, value] : config) {
        if (key == "b0") s.b0 = detail::to_double(key, value);
        else if (key == "b1") s.b1 = detail::to_double(key, value);
        else if (key == "b2") s.b2 = detail::to_double(key, value);
        else if (key == "beta") s.beta = detail::to_double(key, value);
        else if (key == "tau") s.tau = detail::to_double(key, value);
        else if (key == "tau-min") s.tau_min = detail::to_double(key, value);
        else if (key == "tau-max") s.tau_max = detail::to_double(key, value);
        else if (key == "tau-step") s.tau_step = detail::to_double(key, value);
        else if (key == "steps") s.steps = detail::to_int(key, value);
        else if (key == "stride") s.stride = detail::to_int(key, value);
        else if (key == "pulse") s.pulse = value;
        else if (key == "out") s.out = value;
        else throw UsageError("unknown config key '" + key + "'");
    }
    if (flags.b0) s.b0 = *flags.b0;
    if (flags.b1) s.b1 = *flags.b1;
    if (flags.b2) s.b2 = *flags.b2;
    if (flags.beta) s.beta = *flags.beta;
    if (flags.tau) s.tau = *flags.tau;
    if (flags.tau_min) s.tau_min = *flags.tau_min;
    if (flags.tau_max) s.tau_max = *flags.tau_max;
    if (flags.tau_step) s.tau_step = *flags.tau_step;
    if (flags.steps) s.steps = *flags.steps;
    if (flags.stride) s.stride = *flags.stride;
    if (flags.pulse) s.pulse = *flags.pulse;
    if (flags.out) s.out = *flags.out;
    return s;
}

inline std::vector<PulseShape> pulses_of(const Settings& s) {
    std::vector<PulseShape> shapes;
    for (const auto& name : detail::split_list(s.pulse)) shapes.push_back(parse_pulse_shape(name));
    if (shapes.empty()) throw UsageError("--pulse: no pulse shape given");
    return shapes;
}

inline PulseShape single_pulse_of(const Settings& s) {
    const auto shapes = pulses_of(s);
    if (shapes.size() != 1) throw UsageError("--pulse: this command takes exactly one shape");
    return shapes.front();
}

inline ProtocolConfig protocol_config(const Settings& s, PulseShape shape, double tau) {
    ProtocolConfig cfg;
    cfg.b0 = s.b0;
    cfg.b1 = s.b1;
    cfg.b2 = s.b2;
    cfg.beta = s.beta;
    cfg.tau = tau;
    cfg.shape = shape;
    cfg.steps_per_leg = s.steps;
    cfg.sample_stride = s.stride;
    cfg.validate();
    return cfg;
}

inline void cmd_sweep(const Settings& s, std::ostream& out) {
    const auto shapes = pulses_of(s);
    const auto grid = tau_grid(s.tau_min, s.tau_max, s.tau_step);
    std::vector<SweepSeries> all;
    all.reserve(shapes.size());
    for (const auto& shape : shapes)
        all.push_back(sweep_tau(protocol_config(s, shape, grid.front()), grid));

    out << "pulse,tau,relative_entropy,friction_work\n";
    for (const auto& series : all)
        for (const auto& p : series.points)
            out << series.shape.name() << ',' << format_number(p.tau) << ','
                << format_number(p.relative_entropy) << ',' << format_number(p.friction_work)
                << '\n';
}

inline void cmd_bloch(const Settings& s, std::ostream& out) {
    const auto res = run_protocol(protocol_config(s, single_pulse_of(s), s.tau));
    out << "leg,t,rx,ry,rz,B\n";
    auto emit = [&](const char* leg, const Trajectory& traj, double t0) {
        for (const auto& sample : traj.samples) {
            const auto r = bloch_from_state(sample.state);
            out << leg << ',' << format_number(t0 + sample.t) << ',' << format_number(r.rx) << ','
                << format_number(r.ry) << ',' << format_number(r.rz) << ','
                << format_number(sample.field) << '\n';
        }
    };
    emit("forward", res.forward_trajectory, 0.0);
    emit("backward", res.backward_trajectory, res.config.leg_duration());
}

inline void cmd_gap(const Settings& s, std::ostream& out) {
    const auto shapes = pulses_of(s);
    std::vector<std::pair<std::string, std::vector<GapSample>>> all;
    for (const auto& shape : shapes) {
        const auto cfg = protocol_config(s, shape, s.tau);
        all.emplace_back(shape.name(),
                         gap_series(cfg.b0, forward_schedule(cfg), cfg.steps_per_leg,
                                    cfg.sample_stride));
    }
    out << "pulse,phase,delta_e\n";
    for (const auto& [name, series] : all)
        for (const auto& g : series)
            out << name << ',' << format_number(g.phase) << ',' << format_number(g.delta_e) << '\n';
}

namespace detail {

inline nlohmann::json matrix_json(const DensityMatrix& rho) {
    auto json = nlohmann::json::array();
    for (int r = 0; r < 2; ++r) {
        auto row = nlohmann::json::array();
        for (int c = 0; c < 2; ++c) row.push_back({rho.matrix()(r, c).real(), rho.matrix()(r, c).imag()});
        json.push_back(row);
    }
    return json;
}

}  // namespace detail

inline void cmd_run(const Settings& s, std::ostream& out) {
    const auto res = run_protocol(protocol_config(s, single_pulse_of(s), s.tau));
    const auto& c = res.config;
    nlohmann::ordered_json report;
    report["config"] = {{"b0", c.b0},       {"b1", c.b1},
                        {"b2", c.b2},       {"beta", c.beta},
                        {"tau", c.tau},     {"pulse", c.shape.name()},
                        {"steps", c.steps_per_leg}, {"stride", c.sample_stride}};
    report["rho0"] = detail::matrix_json(res.rho0);
    report["rho1"] = detail::matrix_json(res.rho1);
    report["rho2"] = detail::matrix_json(res.rho2);
    report["relative_entropy"] = res.report.relative_entropy;
    report["friction_work"] = res.report.friction_work;
    report["heat_to_bath"] = res.report.heat_to_bath;
    report["energy_initial"] = res.report.energy_initial;
    report["energy_final"] = res.report.energy_final;
    report["identity_defect"] = res.report.identity_defect;
    report["near_singular"] = evaluate_relative_entropy(res.rho2, res.rho0).near_singular;
    report["integrator_error"] = res.integrator_error;
    out << report.dump(2) << '\n';
}

/// Entry point shared by the executable and the tests.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Internal friction in forward-backward driven spin-1/2 protocols", "friction"};
    app.require_subcommand(1);

    Flags flags;
    struct Command {
        CLI::App* app;
        std::string default_pulse;
        void (*run)(const Settings&, std::ostream&);
    };
    std::vector<Command> commands;

    auto add_command = [&](const char* name, const char* help, const char* default_pulse,
                           void (*run)(const Settings&, std::ostream&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--b0", flags.b0, "static z field B0 (default 0.5)");
        sub->add_option("--b1", flags.b1, "initial transverse field B1 (default 0.5)");
        sub->add_option("--b2", flags.b2, "turning-point transverse field B2 (default 0.05)");
        sub->add_option("--beta", flags.beta, "inverse temperature (default 1)");
        sub->add_option("--tau", flags.tau, "total protocol time (default 20)");
        sub->add_option("--tau-min", flags.tau_min, "sweep start (default 0.5)");
        sub->add_option("--tau-max", flags.tau_max, "sweep end (default 100)");
        sub->add_option("--tau-step", flags.tau_step, "sweep spacing (default 0.5)");
        sub->add_option("--pulse", flags.pulse, "comma-separated shapes: sin, pow:<n>");
        sub->add_option("--steps", flags.steps, "integrator steps per leg (default 20000)");
        sub->add_option("--stride", flags.stride, "keep every n-th step (default 10)");
        sub->add_option("--out", flags.out, "output file, '-' for stdout (default -)");
        sub->add_option("--config", flags.config, "key = value settings file");
        commands.push_back({sub, default_pulse, run});
    };
    add_command("sweep", "relative entropy and friction work versus tau (CSV)",
                "sin,pow:0.5,pow:1,pow:2", cmd_sweep);
    add_command("bloch", "Bloch-vector trajectory of both legs (CSV)", "sin", cmd_bloch);
    add_command("gap", "energy gap along the forward leg (CSV)", "sin,pow:0.5,pow:1,pow:2",
                cmd_gap);
    add_command("run", "single protocol report (JSON)", "sin", cmd_run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (const auto& cmd : commands) {
            if (!cmd.app->parsed()) continue;
            const auto config = flags.config ? load_config(*flags.config)
                                             : std::map<std::string, std::string>{};
            const Settings settings = resolve(flags, config, cmd.default_pulse);

            std::ostringstream buffer;
            cmd.run(settings, buffer);
            if (settings.out == "-") {
                out << buffer.str();
            } else {
                std::ofstream file(settings.out, std::ios::binary);
                if (!file) throw UsageError("cannot open output file '" + settings.out + "'");
                file << buffer.str();
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const IntegrityError& e) {
        err << "integrity failure: " << e.what() << '\n';
        return kExitIntegrity;
    } catch (const DivergenceError& e) {
        err << "integrity failure: " << e.what() << '\n';
        return kExitIntegrity;
    }
    return kExitOk;
}

}  // namespace friction::cli
