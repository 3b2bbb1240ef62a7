#pragma once

#include <cmath>

#include "friction/error.hpp"
#include "friction/pulses.hpp"

namespace friction {

/// Full description of one forward-backward experiment.
struct ProtocolConfig {
    double b0 = 0.5;
    double b1 = 0.5;
    double b2 = 0.05;
    double beta = 1.0;
    double tau = 20.0;
    PulseShape shape = PulseShape::sinusoidal();
    int steps_per_leg = 20000;
    int sample_stride = 10;

    void validate() const {
        if (!std::isfinite(b0) || !std::isfinite(b1) || !std::isfinite(b2))
            throw DomainError("ProtocolConfig: fields must be finite");
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw DomainError("ProtocolConfig: beta must be finite and non-negative");
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw DomainError("ProtocolConfig: tau must be positive and finite");
        if (steps_per_leg < 1) throw DomainError("ProtocolConfig: steps_per_leg must be >= 1");
        if (sample_stride < 1) throw DomainError("ProtocolConfig: sample_stride must be >= 1");
    }

    double leg_duration() const { return 0.5 * tau; }
};

/// B1 -> B2 over tau/2.
inline PulseSchedule forward_schedule(const ProtocolConfig& cfg) {
    return {cfg.shape, cfg.b1, cfg.b2, cfg.leg_duration()};
}

/// B2 -> B1 over tau/2, same shape.
inline PulseSchedule backward_schedule(const ProtocolConfig& cfg) {
    return {cfg.shape, cfg.b2, cfg.b1, cfg.leg_duration()};
}

}  // namespace friction
