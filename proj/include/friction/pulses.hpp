#pragma once

// Control-field time laws B(t) for one protocol leg.
//
// Every shape is written on the normalized phase s = t / duration in [0, 1]:
//   B(s) = b_start + (b_end - b_start) f(s)
//   sinusoidal:  f(s) = sin(pi s / 2)
//   power law:   f(s) = s^n,  n > 0
// so a leg of length tau/2 reproduces sin(pi t / tau) and (2t / tau)^n.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "friction/error.hpp"

namespace friction {

struct Sinusoidal {
    friend bool operator==(const Sinusoidal&, const Sinusoidal&) = default;
};

struct PowerLaw {
    double exponent = 1.0;
    friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

class PulseShape {
public:
    PulseShape() = default;
    PulseShape(Sinusoidal s) : shape_(s) {}  // NOLINT(google-explicit-constructor)
    PulseShape(PowerLaw p) : shape_(p) {     // NOLINT(google-explicit-constructor)
        if (!(p.exponent > 0.0) || !std::isfinite(p.exponent))
            throw DomainError("PowerLaw: exponent must be positive and finite");
    }

    static PulseShape sinusoidal() { return Sinusoidal{}; }
    static PulseShape power_law(double n) { return PowerLaw{n}; }

    /// Profile f(s) on [0, 1] with f(0) = 0 and f(1) = 1.
    double profile(double s) const {
        if (const auto* p = std::get_if<PowerLaw>(&shape_)) return std::pow(s, p->exponent);
        return std::sin(0.5 * std::numbers::pi * s);
    }

    bool is_sinusoidal() const { return std::holds_alternative<Sinusoidal>(shape_); }
    double exponent() const {
        const auto* p = std::get_if<PowerLaw>(&shape_);
        return p ? p->exponent : 0.0;
    }

    /// "sin" or "pow:<n>"; inverse of parse_pulse_shape.
    std::string name() const {
        if (is_sinusoidal()) return "sin";
        char buf[64];
        std::snprintf(buf, sizeof buf, "pow:%.12g", exponent());
        return buf;
    }

    friend bool operator==(const PulseShape&, const PulseShape&) = default;

private:
    std::variant<Sinusoidal, PowerLaw> shape_{};
};

/// Accepts "sin" and "pow:<n>" with n > 0.
inline PulseShape parse_pulse_shape(const std::string& text) {
    if (text == "sin") return PulseShape::sinusoidal();
    constexpr std::string_view prefix = "pow:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string arg = text.substr(prefix.size());
        std::size_t used = 0;
        double n = 0.0;
        try {
            n = std::stod(arg, &used);
        } catch (const std::exception&) {
            throw DomainError("unknown pulse shape '" + text + "'");
        }
        if (used != arg.size()) throw DomainError("unknown pulse shape '" + text + "'");
        return PulseShape::power_law(n);
    }
    throw DomainError("unknown pulse shape '" + text + "'");
}

/// Default pulse set: sin, pow:0.5, pow:1, pow:2.
inline std::vector<PulseShape> standard_pulses() {
    return {PulseShape::sinusoidal(), PulseShape::power_law(0.5), PulseShape::power_law(1.0),
            PulseShape::power_law(2.0)};
}

class PulseSchedule {
public:
    PulseSchedule(PulseShape shape, double b_start, double b_end, double duration)
        : shape_(shape), b_start_(b_start), b_end_(b_end), duration_(duration) {
        if (!std::isfinite(b_start) || !std::isfinite(b_end))
            throw DomainError("PulseSchedule: endpoint fields must be finite");
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw DomainError("PulseSchedule: duration must be positive and finite");
    }

    const PulseShape& shape() const { return shape_; }
    double b_start() const { return b_start_; }
    double b_end() const { return b_end_; }
    double duration() const { return duration_; }

    /// Field at normalized phase s in [0, 1]; exact at both ends.
    double value_at_phase(double s) const {
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("PulseSchedule: phase outside [0, 1]");
        return std::lerp(b_start_, b_end_, shape_.profile(s));
    }

    /// Field at time t in [0, duration].
    double value(double t) const {
        if (!(t >= 0.0 && t <= duration_))
            throw DomainError("PulseSchedule: time outside [0, duration]");
        return value_at_phase(t == duration_ ? 1.0 : t / duration_);
    }

private:
    PulseShape shape_;
    double b_start_;
    double b_end_;
    double duration_;
};

inline double pulse_value(const PulseSchedule& schedule, double t) { return schedule.value(t); }

}  // namespace friction
