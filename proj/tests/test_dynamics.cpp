#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "friction/dynamics.hpp"
#include "friction/protocol_config.hpp"
#include "friction/thermo.hpp"
#include "oracle.hpp"

using namespace friction;

TEST(StepPropagator, ZeroGeneratorIsIdentity) {
    EXPECT_EQ(step_propagator(HermitianOperator(), 0.7), ComplexMatrix2::identity());
}

TEST(StepPropagator, FullPrecessionPeriodIsMinusIdentity) {
    const auto u = step_propagator(spin_operator(Axis::z), 2.0 * std::numbers::pi);
    EXPECT_LE(max_abs_diff(u, -1.0 * ComplexMatrix2::identity()), 1e-15);
    // Global phase only: states are untouched.
    const auto rho = state_from_bloch({0.3, -0.2, 0.5});
    EXPECT_LE(max_abs_diff(conjugate_by(u, rho.matrix()), rho.matrix()), 1e-15);
}

TEST(StepPropagator, RejectsNonPositiveStep) {
    EXPECT_THROW(step_propagator(spin_operator(Axis::x), 0.0), DomainError);
    EXPECT_THROW(step_propagator(spin_operator(Axis::x), -1.0), DomainError);
}

TEST(StepPropagator, UnitaryAndMatchesMatrixExponentialRandomized) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dt_dist(1e-6, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const auto h = oracle::random_hermitian(rng);
        const double dt = dt_dist(rng);
        const auto u = step_propagator(h, dt);
        ASSERT_LE(max_abs_diff(u.adjoint() * u, ComplexMatrix2::identity()), 1e-14);
        const auto ref = oracle::expm(std::complex<double>(0.0, -dt) * oracle::to_eigen(h.matrix()));
        ASSERT_LE(max_abs_diff(u, oracle::from_eigen(ref)), 1e-12);
    }
}

TEST(StepPropagator, SmallFieldBranchIsContinuous) {
    for (double b : {1e-3, 1e-5, 1e-8, 1e-12}) {
        const auto h = hamiltonian(b, 0.5 * b);
        const auto ref = oracle::expm(std::complex<double>(0.0, -0.3) * oracle::to_eigen(h.matrix()));
        EXPECT_LE(max_abs_diff(step_propagator(h, 0.3), oracle::from_eigen(ref)), 1e-15);
    }
}

TEST(ConjugateBy, MatchesPlainProduct) {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 500; ++i) {
        const auto u = step_propagator(oracle::random_hermitian(rng), 0.9);
        const auto rho = oracle::random_state(rng);
        const auto plain = u * rho.matrix() * u.adjoint();
        ASSERT_LE(max_abs_diff(conjugate_by(u, rho.matrix()), plain), 1e-15);
    }
}

TEST(StepRotation, MatchesConjugationByPropagator) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> dt_dist(1e-6, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const auto h = oracle::random_hermitian(rng);
        const double dt = dt_dist(rng);
        const auto rho = oracle::random_state(rng);
        const auto expected =
            bloch_from_state(DensityMatrix(conjugate_by(step_propagator(h, dt), rho.matrix())));
        const auto got = rotate(step_rotation(h, dt), bloch_from_state(rho));
        ASSERT_NEAR(got.rx, expected.rx, 1e-14);
        ASSERT_NEAR(got.ry, expected.ry, 1e-14);
        ASSERT_NEAR(got.rz, expected.rz, 1e-14);
    }
    const auto id = step_rotation(HermitianOperator(), 1.0);
    EXPECT_EQ(id, (Rotation3{1, 0, 0, 0, 1, 0, 0, 0, 1}));
}

TEST(Evolve, StationaryGibbsStateIsConstant) {
    const auto h1 = hamiltonian(0.5, 0.5);
    const auto rho0 = gibbs_state(h1, 1.0).state;
    const PulseSchedule constant(PulseShape::sinusoidal(), 0.5, 0.5, 10.0);
    const auto traj = evolve(rho0, 0.5, constant, 20000);
    for (const auto& s : traj.samples)
        ASSERT_LE(max_abs_diff(s.state.matrix(), rho0.matrix()), 1e-12) << "t=" << s.t;
}

TEST(Evolve, LarmorPrecessionAboutX) {
    // b0 = 0, constant B: r rotates about +x, <sigma_z>(t) = cos(B t) and
    // <sigma_y>(t) = -sin(B t) for an initial +z state.
    const double b = 0.5;
    const PulseSchedule constant(PulseShape::power_law(1.0), b, b, 10.0);
    const DensityMatrix up({1.0, 0.0, 0.0, 0.0});
    const auto traj = evolve(up, 0.0, constant, 20000, 10);
    for (const auto& s : traj.samples) {
        const auto r = bloch_from_state(s.state);
        ASSERT_NEAR(r.rz, std::cos(b * s.t), 1e-8) << "t=" << s.t;
        ASSERT_NEAR(r.ry, -std::sin(b * s.t), 1e-8) << "t=" << s.t;
    }
}

TEST(Evolve, SuddenLimitLeavesStateUnchanged) {
    // One leg moves rho0 by at most duration * max_t |[H(t), rho0]| (first
    // order in the duration), so the state freezes as tau -> 0.
    ProtocolConfig cfg;
    const auto rho0 = gibbs_state(hamiltonian(cfg.b0, cfg.b1), cfg.beta).state;
    for (const auto& shape : standard_pulses()) {
        cfg.shape = shape;
        double bound_prev = 0.0, dev_prev = 0.0;
        for (double tau : {1e-2, 1e-4, 1e-6, 1e-8}) {
            cfg.tau = tau;
            const auto leg = forward_schedule(cfg);
            double max_comm = 0.0;
            for (double s = 0.0; s <= 1.0; s += 1.0 / 64)
                max_comm = std::max(
                    max_comm,
                    commutator(hamiltonian(cfg.b0, leg.value_at_phase(s)).matrix(), rho0.matrix())
                        .max_abs());
            const double bound = leg.duration() * max_comm;
            const double dev =
                max_abs_diff(propagate_final(rho0, cfg.b0, leg, cfg.steps_per_leg).matrix(),
                             rho0.matrix());
            EXPECT_LE(dev, bound * (1.0 + 1e-6)) << shape.name() << " tau=" << tau;
            if (bound_prev > 0.0) {
                EXPECT_NEAR(dev / dev_prev, 0.01, 1e-3) << shape.name() << " tau=" << tau;
            }
            bound_prev = bound;
            dev_prev = dev;
        }
        EXPECT_LT(dev_prev, 1e-9) << shape.name();
    }
}

TEST(Evolve, GridLayoutAndSampling) {
    const auto rho0 = state_from_bloch({0.1, 0.2, 0.3});
    const PulseSchedule s(PulseShape::sinusoidal(), 0.5, 0.05, 3.0);
    const auto traj = evolve(rho0, 0.5, s, 25, 10);
    ASSERT_EQ(traj.samples.size(), 4u);  // k = 0, 10, 20, 25
    EXPECT_EQ(traj.samples.front().state, rho0);
    EXPECT_EQ(traj.samples.front().t, 0.0);
    EXPECT_EQ(traj.samples.front().field, 0.5);
    EXPECT_EQ(traj.samples.back().t, 3.0);
    EXPECT_NEAR(traj.samples.back().field, 0.05, 1e-15);
    EXPECT_DOUBLE_EQ(traj.samples[1].t, 10 * 3.0 / 25);
    EXPECT_DOUBLE_EQ(traj.dt, 3.0 / 25);

    const auto full = evolve(rho0, 0.5, s, 25);
    EXPECT_EQ(full.samples.size(), 26u);
    EXPECT_EQ(full.final(), traj.final());
    EXPECT_EQ(propagate_final(rho0, 0.5, s, 25), traj.final());
}

TEST(Evolve, RejectsZeroSteps) {
    const PulseSchedule s(PulseShape::sinusoidal(), 0.5, 0.05, 3.0);
    EXPECT_THROW(evolve(DensityMatrix(), 0.5, s, 0), DomainError);
    EXPECT_THROW(evolve(DensityMatrix(), 0.5, s, 10, 0), DomainError);
    EXPECT_THROW(propagate_final(DensityMatrix(), 0.5, s, 0), DomainError);
}

TEST(Evolve, ConservesTracePurityBlochLengthAndEntropy) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> field(-1.0, 1.0);
    std::uniform_real_distribution<double> dur(0.1, 60.0);
    for (int i = 0; i < 40; ++i) {
        const auto rho0 = oracle::random_state(rng);
        const auto shape = standard_pulses()[static_cast<std::size_t>(i) % 4];
        const PulseSchedule s(shape, field(rng), field(rng), dur(rng));
        const auto traj = evolve(rho0, field(rng), s, 4000, 7);
        const double p0 = rho0.purity();
        const double r0 = bloch_from_state(rho0).norm();
        for (const auto& sample : traj.samples) {
            ASSERT_LT(std::abs(sample.state.matrix().trace() - 1.0), 1e-12);
            ASSERT_LT(std::abs(sample.state.purity() - p0), 1e-10);
            ASSERT_LT(std::abs(bloch_from_state(sample.state).norm() - r0), 1e-10);
        }
        ASSERT_LT(std::abs(von_neumann_entropy(traj.final()) - von_neumann_entropy(rho0)), 1e-9);
    }
}

TEST(ConvergenceCheck, StationaryCaseHasNoError) {
    const auto rho0 = gibbs_state(hamiltonian(0.5, 0.5), 1.0).state;
    const PulseSchedule constant(PulseShape::sinusoidal(), 0.5, 0.5, 10.0);
    EXPECT_LE(convergence_check(rho0, 0.5, constant, 1000).error, 1e-12);
}

TEST(ConvergenceCheck, SecondOrderAgainstReference) {
    // Richardson ratio e(dt) / e(dt/2) against a 10^6-step reference.
    const auto rho0 = gibbs_state(hamiltonian(0.5, 0.5), 1.0).state;
    const PulseSchedule leg(PulseShape::sinusoidal(), 0.5, 0.05, 10.0);
    const auto ref = propagate_final(rho0, 0.5, leg, 1000000);
    const auto est = convergence_check(rho0, 0.5, leg, 500);
    const double e1 = max_abs_diff(est.coarse.matrix(), ref.matrix());
    const double e2 = max_abs_diff(est.fine.matrix(), ref.matrix());
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
    // The two-resolution estimate tracks the true coarse error (~ 3/4 of it).
    EXPECT_NEAR(est.error / e1, 0.75, 0.05);
}

TEST(ConvergenceCheck, FineResolutionReachesFloor) {
    const auto rho0 = gibbs_state(hamiltonian(0.5, 0.5), 1.0).state;
    const PulseSchedule leg(PulseShape::sinusoidal(), 0.5, 0.05, 10.0);
    EXPECT_LT(convergence_check(rho0, 0.5, leg, 1000000).error, 1e-12);
}

TEST(ConvergenceCheck, RejectsTooFewSteps) {
    const PulseSchedule leg(PulseShape::sinusoidal(), 0.5, 0.05, 10.0);
    EXPECT_THROW(convergence_check(DensityMatrix(), 0.5, leg, 1), DomainError);
}
