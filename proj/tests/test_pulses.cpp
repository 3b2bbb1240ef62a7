#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "friction/protocol_config.hpp"
#include "friction/pulses.hpp"
#include "friction/spin_core.hpp"

using namespace friction;

TEST(PulseValue, Examples) {
    const PulseSchedule sin_leg(PulseShape::sinusoidal(), 0.5, 0.05, 10.0);
    EXPECT_EQ(pulse_value(sin_leg, 0.0), 0.5);
    EXPECT_NEAR(pulse_value(sin_leg, 10.0), 0.05, 1e-14);

    const PulseSchedule quad(PulseShape::power_law(2.0), 0.5, 0.05, 10.0);
    EXPECT_NEAR(pulse_value(quad, 5.0), 0.3875, 1e-15);
}

TEST(PulseValue, MatchesTotalTimeFormulas) {
    // One leg lasts tau/2: sin(pi t / tau) and (2t / tau)^n in total-time form.
    const double tau = 20.0, b1 = 0.5, b2 = 0.05;
    for (double t = 0.0; t <= tau / 2; t += 0.37) {
        const PulseSchedule s(PulseShape::sinusoidal(), b1, b2, tau / 2);
        EXPECT_NEAR(s.value(t), b1 + (b2 - b1) * std::sin(std::numbers::pi * t / tau), 1e-15);
        for (double n : {0.5, 1.0, 2.0}) {
            const PulseSchedule p(PulseShape::power_law(n), b1, b2, tau / 2);
            EXPECT_NEAR(p.value(t), b1 + (b2 - b1) * std::pow(2.0 * t / tau, n), 1e-15);
        }
    }
}

TEST(PulseValue, RejectsTimesOutsideTheLeg) {
    const PulseSchedule s(PulseShape::sinusoidal(), 0.5, 0.05, 10.0);
    EXPECT_THROW(s.value(-1e-12), DomainError);
    EXPECT_THROW(s.value(10.0 + 1e-9), DomainError);
    EXPECT_THROW(s.value(NAN), DomainError);
}

TEST(PulseSchedule, RejectsBadConstruction) {
    EXPECT_THROW(PulseSchedule(PulseShape::sinusoidal(), 0.5, 0.05, 0.0), DomainError);
    EXPECT_THROW(PulseSchedule(PulseShape::sinusoidal(), NAN, 0.05, 1.0), DomainError);
    EXPECT_THROW(PulseShape::power_law(0.0), DomainError);
    EXPECT_THROW(PulseShape::power_law(-1.0), DomainError);
}

TEST(PulseSchedule, EndpointsExactForEveryShape) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> d(1e-3, 1e3);
    for (const auto& shape : standard_pulses()) {
        for (int i = 0; i < 500; ++i) {
            const PulseSchedule s(shape, u(rng), u(rng), d(rng));
            ASSERT_EQ(s.value(0.0), s.b_start());
            ASSERT_NEAR(s.value(s.duration()), s.b_end(), 1e-14);
        }
    }
}

TEST(PulseSchedule, MonotoneForDecreasingEndpoints) {
    for (const auto& shape : standard_pulses()) {
        const PulseSchedule s(shape, 0.5, 0.05, 10.0);
        double prev = s.value(0.0);
        for (int k = 1; k <= 10000; ++k) {
            const double v = s.value_at_phase(k / 10000.0);
            ASSERT_LE(v, prev) << shape.name() << " at k=" << k;
            prev = v;
        }
    }
}

TEST(PulseSchedule, ForwardAndBackwardLegs) {
    ProtocolConfig cfg;
    cfg.b1 = 0.5;
    cfg.b2 = 0.05;
    cfg.tau = 20.0;
    const auto fwd = forward_schedule(cfg);
    const auto bwd = backward_schedule(cfg);
    EXPECT_EQ(fwd.b_start(), 0.5);
    EXPECT_EQ(fwd.b_end(), 0.05);
    EXPECT_EQ(fwd.duration(), 10.0);
    EXPECT_EQ(bwd.b_start(), 0.05);
    EXPECT_EQ(bwd.b_end(), 0.5);
    EXPECT_EQ(bwd.duration(), 10.0);
    EXPECT_EQ(fwd.shape(), bwd.shape());

    // Backward leg is the forward formula with swapped endpoints:
    // B(t) = B2 + (B1 - B2) sin(pi t / tau).
    for (double t = 0.0; t <= 10.0; t += 0.5)
        EXPECT_NEAR(bwd.value(t), 0.05 + 0.45 * std::sin(std::numbers::pi * t / 20.0), 1e-15);
}

TEST(PulseSchedule, EqualEndpointsGiveConstantField) {
    ProtocolConfig cfg;
    cfg.b1 = cfg.b2 = 0.3;
    for (const auto& shape : standard_pulses()) {
        cfg.shape = shape;
        const auto fwd = forward_schedule(cfg);
        for (double s = 0.0; s <= 1.0; s += 0.01) ASSERT_EQ(fwd.value_at_phase(s), 0.3);
    }
}

TEST(PulseSchedule, DistinctFieldsNeverCommute) {
    // [H(t1), H(t2)] = -i B0 (B(t1) - B(t2)) I_y is nonzero whenever B0 != 0
    // and the fields differ.
    for (const auto& shape : standard_pulses()) {
        const PulseSchedule s(shape, 0.5, 0.05, 10.0);
        for (double t1 = 0.0; t1 <= 10.0; t1 += 1.3) {
            for (double t2 = 0.2; t2 <= 10.0; t2 += 1.7) {
                const double f1 = s.value(t1), f2 = s.value(t2);
                if (f1 == f2) continue;
                const auto c = commutator(hamiltonian(0.5, f1), hamiltonian(0.5, f2));
                ASSERT_GT(c.max_abs(), 0.0);
                ASSERT_NEAR(c.max_abs(), 0.25 * std::abs(f1 - f2), 1e-15);
            }
        }
    }
}

TEST(PulseShape, ParseAndName) {
    EXPECT_EQ(parse_pulse_shape("sin"), PulseShape::sinusoidal());
    EXPECT_EQ(parse_pulse_shape("pow:0.5"), PulseShape::power_law(0.5));
    EXPECT_EQ(parse_pulse_shape("pow:2"), PulseShape::power_law(2.0));
    EXPECT_EQ(parse_pulse_shape("pow:3.25").exponent(), 3.25);
    for (const auto& s : standard_pulses()) EXPECT_EQ(parse_pulse_shape(s.name()), s);
    EXPECT_EQ(PulseShape::power_law(0.5).name(), "pow:0.5");
    EXPECT_EQ(PulseShape::power_law(1.0).name(), "pow:1");
    EXPECT_THROW(parse_pulse_shape("cos"), DomainError);
    EXPECT_THROW(parse_pulse_shape("pow:"), DomainError);
    EXPECT_THROW(parse_pulse_shape("pow:1x"), DomainError);
    EXPECT_THROW(parse_pulse_shape("pow:-1"), DomainError);
}
