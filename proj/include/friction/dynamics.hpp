#pragma once

// Unitary propagation of rho under H(t) = b0 I_z + B(t) I_x.
//
// Each step of length dt applies the exact exponential of the Hamiltonian
// frozen at the step midpoint, rho -> U rho U^dagger with U = exp(-i H dt),
// realized as the equivalent rotation of the Bloch vector. Globally second
// order in dt; unitary to round-off at every step.

#include <array>
#include <cmath>
#include <vector>

#include "friction/error.hpp"
#include "friction/pulses.hpp"
#include "friction/spin_core.hpp"

namespace friction {

/// exp(-i h dt) in closed form.
///
/// Writing h = c I + b.sigma / 2 and theta = |b| dt,
///   U = e^{-i c dt} [cos(theta/2) I - i sin(theta/2) b_hat.sigma].
inline ComplexMatrix2 step_propagator(const HermitianOperator& h, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw DomainError("step_propagator: dt must be positive and finite");
    const auto& m = h.matrix();
    const double c = 0.5 * (m(0, 0).real() + m(1, 1).real());
    const double bz = m(0, 0).real() - m(1, 1).real();
    const double bx = 2.0 * m(0, 1).real();
    const double by = -2.0 * m(0, 1).imag();
    const double b = std::sqrt(bx * bx + by * by + bz * bz);
    const double half = 0.5 * b * dt;

    // sin(theta/2) / |b|, continuous through b = 0.
    const double k = half > 1e-4 ? std::sin(half) / b
                                 : 0.5 * dt * (1.0 - half * half / 6.0 * (1.0 - half * half / 20.0));
    const double cs = std::cos(half);
    const complex phase = c == 0.0 ? complex{1.0, 0.0} : std::exp(complex{0.0, -c * dt});

    const ComplexMatrix2 u{complex{cs, -k * bz}, complex{-k * by, -k * bx},
                           complex{k * by, -k * bx}, complex{cs, k * bz}};
    return phase * u;
}

/// U rho U^dagger, computed so the result is Hermitian by construction.
inline ComplexMatrix2 conjugate_by(const ComplexMatrix2& u, const ComplexMatrix2& rho) {
    const ComplexMatrix2 ur = u * rho;
    const double d0 = (ur(0, 0) * std::conj(u(0, 0)) + ur(0, 1) * std::conj(u(0, 1))).real();
    const double d1 = (ur(1, 0) * std::conj(u(1, 0)) + ur(1, 1) * std::conj(u(1, 1))).real();
    const complex off = ur(0, 0) * std::conj(u(1, 0)) + ur(0, 1) * std::conj(u(1, 1));
    return {d0, off, std::conj(off), d1};
}

/// Adjoint action of exp(-i h dt) on Bloch vectors: rotation by
/// theta = |b| dt about b_hat (right-handed), b the field of h = c I + b.sigma/2.
/// Row-major 3x3, extended precision.
using Rotation3 = std::array<long double, 9>;

namespace detail {

// Rotation generated by the field (bx, by, bz) over dt.
inline Rotation3 field_rotation(long double nx, long double ny, long double nz, double dt) {
    const long double b = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (b == 0.0L) return {1.0L, 0.0L, 0.0L, 0.0L, 1.0L, 0.0L, 0.0L, 0.0L, 1.0L};
    nx /= b;
    ny /= b;
    nz /= b;
    // Half-angle form: one sin/cos pair, and 1 - cos(theta) without cancellation.
    // The pair is evaluated in double and rescaled onto the unit circle in
    // extended precision, which keeps the rotation orthogonal to ~1e-19.
    const double half = static_cast<double>(0.5L * b * dt);
    long double sh = std::sin(half);
    long double ch = std::cos(half);
    const long double unit = std::sqrt(sh * sh + ch * ch);
    sh /= unit;
    ch /= unit;
    const long double v = 2.0L * sh * sh;
    const long double c = 1.0L - v;
    const long double s = 2.0L * sh * ch;
    return {c + nx * nx * v,      nx * ny * v - nz * s, nx * nz * v + ny * s,
            ny * nx * v + nz * s, c + ny * ny * v,      ny * nz * v - nx * s,
            nz * nx * v - ny * s, nz * ny * v + nx * s, c + nz * nz * v};
}

}  // namespace detail

inline Rotation3 step_rotation(const HermitianOperator& h, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw DomainError("step_rotation: dt must be positive and finite");
    const auto& m = h.matrix();
    return detail::field_rotation(2.0L * m(0, 1).real(), -2.0L * m(0, 1).imag(),
                                  static_cast<long double>(m(0, 0).real()) - m(1, 1).real(), dt);
}

/// Bloch vector carried at extended precision between steps.
using BlochState = std::array<long double, 3>;

inline BlochState rotate(const Rotation3& r, const BlochState& v) {
    return {r[0] * v[0] + r[1] * v[1] + r[2] * v[2], r[3] * v[0] + r[4] * v[1] + r[5] * v[2],
            r[6] * v[0] + r[7] * v[1] + r[8] * v[2]};
}

inline BlochVector rotate(const Rotation3& r, const BlochVector& v) {
    const auto out = rotate(r, BlochState{v.rx, v.ry, v.rz});
    return {static_cast<double>(out[0]), static_cast<double>(out[1]),
            static_cast<double>(out[2])};
}

inline BlochVector to_bloch(const BlochState& v) {
    return {static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2])};
}

struct TrajectorySample {
    double t = 0.0;
    DensityMatrix state;
    double field = 0.0;
};

/// States on a uniform grid; the first sample is the initial state and the
/// last sits at t = duration.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;
    int steps = 0;
    int stride = 1;

    const DensityMatrix& initial() const { return samples.front().state; }
    const DensityMatrix& final() const { return samples.back().state; }
};

namespace detail {

// The state is carried as its Bloch vector so the trace stays exactly one;
// each step applies the rotation generated by the midpoint Hamiltonian.
template <class Visit>
DensityMatrix propagate(const DensityMatrix& rho_init, double b0, const PulseSchedule& schedule,
                        int steps, Visit&& visit) {
    if (steps < 1) throw DomainError("evolve: steps must be >= 1");
    if (!std::isfinite(b0)) throw DomainError("evolve: b0 must be finite");
    const double dt = schedule.duration() / steps;
    const BlochVector r0 = bloch_from_state(rho_init);
    BlochState r{r0.rx, r0.ry, r0.rz};
    for (int k = 0; k < steps; ++k) {
        const double field = schedule.value_at_phase((k + 0.5) / steps);
        // H = b0 I_z + B I_x has field vector (B, 0, b0).
        r = rotate(field_rotation(field, 0.0L, b0, dt), r);
        visit(k + 1, r);
    }
    return state_from_bloch(to_bloch(r));
}

}  // namespace detail

/// Propagates rho_init across the schedule with `steps` midpoint steps,
/// keeping every `stride`-th state (the final state is always kept).
inline Trajectory evolve(const DensityMatrix& rho_init, double b0, const PulseSchedule& schedule,
                         int steps, int stride = 1) {
    if (steps < 1) throw DomainError("evolve: steps must be >= 1");
    if (stride < 1) throw DomainError("evolve: stride must be >= 1");
    Trajectory traj;
    traj.dt = schedule.duration() / steps;
    traj.steps = steps;
    traj.stride = stride;
    traj.samples.reserve(static_cast<std::size_t>(steps / stride) + 2);
    traj.samples.push_back({0.0, rho_init, schedule.value_at_phase(0.0)});

    detail::propagate(rho_init, b0, schedule, steps, [&](int k, const BlochState& r) {
        if (k % stride != 0 && k != steps) return;
        const double s = k == steps ? 1.0 : static_cast<double>(k) / steps;
        const double t = k == steps ? schedule.duration() : k * traj.dt;
        traj.samples.push_back({t, state_from_bloch(to_bloch(r)), schedule.value_at_phase(s)});
    });
    return traj;
}

/// Final state only; no trajectory storage.
inline DensityMatrix propagate_final(const DensityMatrix& rho_init, double b0,
                                     const PulseSchedule& schedule, int steps) {
    return detail::propagate(rho_init, b0, schedule, steps, [](int, const BlochState&) {});
}

struct ConvergenceEstimate {
    DensityMatrix coarse;  ///< final state at `steps`
    DensityMatrix fine;    ///< final state at 2 * steps
    double error = 0.0;    ///< max entrywise |coarse - fine|
};

inline ConvergenceEstimate convergence_check(const DensityMatrix& rho_init, double b0,
                                             const PulseSchedule& schedule, int steps) {
    if (steps < 2) throw DomainError("convergence_check: steps must be >= 2");
    ConvergenceEstimate est{propagate_final(rho_init, b0, schedule, steps),
                            propagate_final(rho_init, b0, schedule, 2 * steps), 0.0};
    est.error = max_abs_diff(est.coarse.matrix(), est.fine.matrix());
    return est;
}

}  // namespace friction
