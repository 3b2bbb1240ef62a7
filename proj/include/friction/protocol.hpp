#pragma once

// Forward-backward protocol: rho0 = Gibbs(H1, beta) is driven H1 -> H2 over
// tau/2 (giving rho1) and back H2 -> H1 over tau/2 (giving rho2). The
// friction is S(rho2 || rho0) = beta * (tr[H1 rho2] - tr[H1 rho0]).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "friction/dynamics.hpp"
#include "friction/error.hpp"
#include "friction/protocol_config.hpp"
#include "friction/pulses.hpp"
#include "friction/spin_core.hpp"
#include "friction/thermo.hpp"

namespace friction {

/// Largest accepted difference between the final states at steps and 2 * steps.
inline constexpr double kConvergenceGate = 1e-6;

struct GapSample {
    double phase = 0.0;  ///< 2t / tau on the forward leg
    double delta_e = 0.0;
};

struct ProtocolResult {
    ProtocolConfig config;
    DensityMatrix rho0;
    DensityMatrix rho1;
    DensityMatrix rho2;
    FrictionReport report;
    double integrator_error = 0.0;
    Trajectory forward_trajectory;
    Trajectory backward_trajectory;
    std::vector<GapSample> gap_series;
};

/// Level splitting along a schedule at phases k / steps, k = 0, stride, ...,
/// always ending at phase 1.
inline std::vector<GapSample> gap_series(double b0, const PulseSchedule& schedule, int steps,
                                         int stride) {
    if (steps < 1 || stride < 1) throw DomainError("gap_series: steps and stride must be >= 1");
    std::vector<GapSample> out;
    out.reserve(static_cast<std::size_t>(steps / stride) + 2);
    for (int k = 0; k <= steps; ++k) {
        if (k % stride != 0 && k != steps) continue;
        const double s = k == steps ? 1.0 : static_cast<double>(k) / steps;
        out.push_back({s, energy_gap(b0, schedule.value_at_phase(s))});
    }
    return out;
}

namespace detail {

inline void check_convergence(double error, const ProtocolConfig& cfg) {
    if (!(error <= kConvergenceGate))
        throw ConvergenceError("integrator error estimate " + std::to_string(error) +
                               " exceeds gate at tau=" + std::to_string(cfg.tau) +
                               " with steps_per_leg=" + std::to_string(cfg.steps_per_leg));
}

// rho2 after both legs at the given resolution.
inline DensityMatrix round_trip(const DensityMatrix& rho0, const ProtocolConfig& cfg, int steps) {
    const DensityMatrix rho1 = propagate_final(rho0, cfg.b0, forward_schedule(cfg), steps);
    return propagate_final(rho1, cfg.b0, backward_schedule(cfg), steps);
}

}  // namespace detail

/// Final state rho2 only, at cfg.steps_per_leg; no convergence gate.
inline DensityMatrix final_state(const ProtocolConfig& cfg) {
    cfg.validate();
    const auto h1 = hamiltonian(cfg.b0, cfg.b1);
    return detail::round_trip(gibbs_state(h1, cfg.beta).state, cfg, cfg.steps_per_leg);
}

/// Runs the full protocol, storing both trajectories at cfg.sample_stride.
/// Throws ConvergenceError when doubling the resolution moves rho2 by more
/// than kConvergenceGate, IntegrityError when the friction identity fails.
inline ProtocolResult run_protocol(const ProtocolConfig& cfg) {
    cfg.validate();
    const auto h1 = hamiltonian(cfg.b0, cfg.b1);
    const GibbsState gibbs0 = gibbs_state(h1, cfg.beta);
    const auto fwd = forward_schedule(cfg);
    const auto bwd = backward_schedule(cfg);

    ProtocolResult res;
    res.config = cfg;
    res.rho0 = gibbs0.state;
    res.forward_trajectory = evolve(gibbs0.state, cfg.b0, fwd, cfg.steps_per_leg, cfg.sample_stride);
    res.rho1 = res.forward_trajectory.final();
    res.backward_trajectory = evolve(res.rho1, cfg.b0, bwd, cfg.steps_per_leg, cfg.sample_stride);
    res.rho2 = res.backward_trajectory.final();

    const DensityMatrix fine = detail::round_trip(gibbs0.state, cfg, 2 * cfg.steps_per_leg);
    res.integrator_error = max_abs_diff(res.rho2.matrix(), fine.matrix());
    detail::check_convergence(res.integrator_error, cfg);

    res.report = friction_report(res.rho2, gibbs0, h1);
    res.gap_series = gap_series(cfg.b0, fwd, cfg.steps_per_leg, cfg.sample_stride);
    return res;
}

struct SweepPoint {
    double tau = 0.0;
    double relative_entropy = 0.0;
    double friction_work = 0.0;
    double integrator_error = 0.0;
};

/// Same checks as run_protocol without storing trajectories.
inline SweepPoint evaluate_point(const ProtocolConfig& cfg) {
    cfg.validate();
    const auto h1 = hamiltonian(cfg.b0, cfg.b1);
    const GibbsState gibbs0 = gibbs_state(h1, cfg.beta);
    const DensityMatrix rho2 = detail::round_trip(gibbs0.state, cfg, cfg.steps_per_leg);
    const DensityMatrix fine = detail::round_trip(gibbs0.state, cfg, 2 * cfg.steps_per_leg);
    const double err = max_abs_diff(rho2.matrix(), fine.matrix());
    detail::check_convergence(err, cfg);
    const FrictionReport rep = friction_report(rho2, gibbs0, h1);
    return {cfg.tau, rep.relative_entropy, rep.friction_work, err};
}

struct SweepSeries {
    PulseShape shape;
    std::vector<SweepPoint> points;

    /// Index of the largest relative entropy.
    std::size_t argmax() const {
        return static_cast<std::size_t>(
            std::max_element(points.begin(), points.end(),
                             [](const SweepPoint& a, const SweepPoint& b) {
                                 return a.relative_entropy < b.relative_entropy;
                             }) -
            points.begin());
    }
    double peak() const { return points.empty() ? 0.0 : points[argmax()].relative_entropy; }
};

/// min, min + step, ... up to max (inclusive within 1e-9 relative slack).
inline std::vector<double> tau_grid(double tau_min, double tau_max, double tau_step) {
    if (!(tau_min > 0.0) || !(tau_step > 0.0) || !(tau_max >= tau_min) || !std::isfinite(tau_max))
        throw DomainError("tau_grid: need 0 < tau_min <= tau_max and tau_step > 0");
    const auto n = static_cast<long>(std::floor((tau_max - tau_min) / tau_step + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) grid.push_back(tau_min + static_cast<double>(i) * tau_step);
    return grid;
}

namespace detail {

[[noreturn]] inline void rethrow_at_tau(const std::exception_ptr& ep, double tau) {
    const std::string where = " [sweep point tau=" + std::to_string(tau) + "]";
    try {
        std::rethrow_exception(ep);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.what() + where);
    } catch (const IntegrityError& e) {
        throw IntegrityError(e.what() + where);
    } catch (const DivergenceError& e) {
        throw DivergenceError(e.what() + where);
    } catch (const DomainError& e) {
        throw DomainError(e.what() + where);
    } catch (const std::exception& e) {
        throw Error(e.what() + where);
    }
}

// Calls fn(i) for i in [0, n) on up to `threads` workers. Returns the lowest
// failing index with its exception, if any.
template <class Fn>
std::optional<std::pair<std::size_t, std::exception_ptr>> parallel_for(std::size_t n,
                                                                       unsigned threads, Fn fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) return std::pair{i, errors[i]};
    return std::nullopt;
}

}  // namespace detail

/// One protocol per grid point, results in grid order. `threads` = 0 uses
/// the hardware concurrency. A failing point aborts the sweep; the rethrown
/// error names its tau.
inline SweepSeries sweep_tau(const ProtocolConfig& cfg_template, const std::vector<double>& grid,
                             unsigned threads = 0) {
    if (grid.empty()) throw DomainError("sweep_tau: empty tau grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep_tau: tau grid must ascend");
    cfg_template.validate();

    SweepSeries series{cfg_template.shape, std::vector<SweepPoint>(grid.size())};
    auto failure = detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
        ProtocolConfig cfg = cfg_template;
        cfg.tau = grid[i];
        series.points[i] = evaluate_point(cfg);
    });
    if (failure) detail::rethrow_at_tau(failure->second, grid[failure->first]);
    return series;
}

/// Default "almost frictionless" level: 5% of the series peak.
inline double default_frictionless_threshold(const SweepSeries& series) {
    return 0.05 * series.peak();
}

struct FrictionlessPoint {
    double tau = 0.0;
    double relative_entropy = 0.0;
};

struct FrictionlessSearch {
    std::vector<FrictionlessPoint> minima;  ///< ascending in tau
    bool uniformly_below_threshold = false;  ///< every scan point was below threshold
    SweepSeries scan;
};

struct FrictionlessOptions {
    double grid_spacing = 0.25;
    double tau_tolerance = 1e-3;
    unsigned threads = 0;
};

namespace detail {

// Golden-section minimization of f on [a, b] down to width tol.
template <class F>
std::pair<double, double> golden_section(F&& f, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace detail

/// Scans [tau_lo, tau_hi] and refines every interior local minimum of
/// S(tau) lying below `threshold`. An empty result is a valid outcome.
/// When the whole scan is below threshold (e.g. beta = 0) no minima are
/// refined and uniformly_below_threshold is set instead.
inline FrictionlessSearch find_frictionless(const ProtocolConfig& cfg_template, double tau_lo,
                                            double tau_hi, double threshold,
                                            const FrictionlessOptions& opt = {}) {
    if (!(tau_lo > 0.0) || !(tau_hi > tau_lo))
        throw DomainError("find_frictionless: need 0 < tau_lo < tau_hi");
    if (!(threshold >= 0.0) || !std::isfinite(threshold))
        throw DomainError("find_frictionless: threshold must be finite and non-negative");
    if (!(opt.grid_spacing > 0.0) || !(opt.tau_tolerance > 0.0))
        throw DomainError("find_frictionless: spacing and tolerance must be positive");

    FrictionlessSearch out;
    out.scan = sweep_tau(cfg_template, tau_grid(tau_lo, tau_hi, opt.grid_spacing), opt.threads);
    const auto& pts = out.scan.points;

    out.uniformly_below_threshold =
        std::all_of(pts.begin(), pts.end(),
                    [&](const SweepPoint& p) { return p.relative_entropy < threshold; });
    if (out.uniformly_below_threshold) return out;

    auto objective = [&](double tau) {
        ProtocolConfig cfg = cfg_template;
        cfg.tau = tau;
        return evaluate_point(cfg).relative_entropy;
    };
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double s = pts[i].relative_entropy;
        if (!(s < pts[i - 1].relative_entropy && s <= pts[i + 1].relative_entropy)) continue;
        if (!(s < threshold)) continue;
        auto [tau, value] =
            detail::golden_section(objective, pts[i - 1].tau, pts[i + 1].tau, opt.tau_tolerance);
        if (s < value) {
            tau = pts[i].tau;
            value = s;
        }
        out.minima.push_back({tau, value});
    }
    return out;
}

}  // namespace friction
