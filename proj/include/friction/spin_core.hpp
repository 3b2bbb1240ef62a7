#pragma once

// Two-level (spin-1/2) linear algebra: 2x2 complex matrices, spin operators,
// the driven-spin Hamiltonian, closed-form spectral decomposition and the
// Bloch-vector map. Units: hbar = k_B = gyromagnetic ratio = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "friction/error.hpp"

namespace friction {

using complex = std::complex<double>;

inline constexpr complex kI{0.0, 1.0};

/// Dense 2x2 complex matrix, row-major.
struct ComplexMatrix2 {
    std::array<complex, 4> a{};

    constexpr ComplexMatrix2() = default;
    constexpr ComplexMatrix2(complex m00, complex m01, complex m10, complex m11)
        : a{m00, m01, m10, m11} {}

    static constexpr ComplexMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr ComplexMatrix2 zero() { return {}; }

    constexpr complex& operator()(int r, int c) { return a[2 * r + c]; }
    constexpr const complex& operator()(int r, int c) const { return a[2 * r + c]; }

    constexpr complex trace() const { return a[0] + a[3]; }
    constexpr complex determinant() const { return a[0] * a[3] - a[1] * a[2]; }

    ComplexMatrix2 adjoint() const {
        return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
    }

    bool is_finite() const {
        return std::all_of(a.begin(), a.end(), [](const complex& z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : a) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix2& operator+=(const ComplexMatrix2& o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    ComplexMatrix2& operator-=(const ComplexMatrix2& o) {
        for (int i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    ComplexMatrix2& operator*=(complex s) {
        for (auto& z : a) z *= s;
        return *this;
    }

    friend ComplexMatrix2 operator+(ComplexMatrix2 x, const ComplexMatrix2& y) { return x += y; }
    friend ComplexMatrix2 operator-(ComplexMatrix2 x, const ComplexMatrix2& y) { return x -= y; }
    friend ComplexMatrix2 operator*(ComplexMatrix2 x, complex s) { return x *= s; }
    friend ComplexMatrix2 operator*(complex s, ComplexMatrix2 x) { return x *= s; }
    friend ComplexMatrix2 operator*(double s, ComplexMatrix2 x) { return x *= complex{s, 0.0}; }

    friend ComplexMatrix2 operator*(const ComplexMatrix2& x, const ComplexMatrix2& y) {
        return {x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
                x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]};
    }

    friend bool operator==(const ComplexMatrix2&, const ComplexMatrix2&) = default;
};

/// Largest entrywise modulus of x - y.
inline double max_abs_diff(const ComplexMatrix2& x, const ComplexMatrix2& y) {
    return (x - y).max_abs();
}

/// Largest entrywise deviation of m from its conjugate transpose.
inline double hermiticity_defect(const ComplexMatrix2& m) {
    return max_abs_diff(m, m.adjoint());
}

/// Tolerance used when validating Hermiticity, relative to the entry scale.
inline constexpr double kHermitianTolerance = 1e-14;

/// A 2x2 Hermitian matrix: Hamiltonians and observables.
class HermitianOperator {
public:
    HermitianOperator() = default;

    /// Validates finiteness and Hermiticity (entrywise, scaled by max(1, |m|max)).
    explicit HermitianOperator(const ComplexMatrix2& m) : m_(m) {
        if (!m.is_finite()) throw DomainError("HermitianOperator: non-finite entry");
        if (hermiticity_defect(m) > kHermitianTolerance * std::max(1.0, m.max_abs()))
            throw DomainError("HermitianOperator: matrix is not Hermitian");
    }

    const ComplexMatrix2& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }

    /// Expectation value tr[H rho] for a Hermitian rho.
    double expectation(const ComplexMatrix2& rho) const { return (m_ * rho).trace().real(); }

    friend HermitianOperator operator+(const HermitianOperator& x, const HermitianOperator& y) {
        return HermitianOperator(x.m_ + y.m_);
    }
    friend HermitianOperator operator*(double s, const HermitianOperator& x) {
        return HermitianOperator(s * x.m_);
    }

private:
    ComplexMatrix2 m_{};
};

/// Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>).
struct BlochVector {
    double rx = 0.0;
    double ry = 0.0;
    double rz = 0.0;

    double norm() const { return std::sqrt(rx * rx + ry * ry + rz * rz); }
};

/// Closed-form spectral decomposition of a 2x2 Hermitian matrix.
/// Eigenvalues ascend; eigenvectors[i] belongs to eigenvalues[i].
struct Eigendecomposition {
    using Vector = std::array<complex, 2>;

    std::array<double, 2> eigenvalues{};
    std::array<Vector, 2> eigenvectors{};

    /// |v_i><v_i|
    ComplexMatrix2 projector(int i) const {
        const auto& v = eigenvectors[i];
        return {v[0] * std::conj(v[0]), v[0] * std::conj(v[1]), v[1] * std::conj(v[0]),
                v[1] * std::conj(v[1])};
    }

    /// sum_i f(lambda_i) |v_i><v_i|
    template <class F>
    ComplexMatrix2 apply(F&& f) const {
        return f(eigenvalues[0]) * projector(0) + f(eigenvalues[1]) * projector(1);
    }

    ComplexMatrix2 reconstruct() const {
        return apply([](double x) { return x; });
    }
};

namespace detail {

// Rotate the phase of v so its largest-modulus component is real and
// positive. Keeps diagonal inputs mapped onto the standard basis.
inline Eigendecomposition::Vector canonical_phase(Eigendecomposition::Vector v) {
    const complex& pivot = std::abs(v[0]) >= std::abs(v[1]) ? v[0] : v[1];
    const double mag = std::abs(pivot);
    if (mag > 0.0) {
        const complex phase = std::conj(pivot) / mag;
        v[0] *= phase;
        v[1] *= phase;
    }
    return v;
}

// Reads the upper triangle and the real diagonal only; the caller guarantees
// Hermiticity.
inline Eigendecomposition eigendecompose_hermitian(const ComplexMatrix2& m) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const complex c = m(0, 1);
    const double mean = 0.5 * (a + d);
    const double half_split = 0.5 * (a - d);
    const double r = std::hypot(half_split, std::abs(c));

    Eigendecomposition e;
    e.eigenvalues = {mean - r, mean + r};
    if (r == 0.0) {
        e.eigenvectors = {{{1.0, 0.0}, {0.0, 1.0}}};
        return e;
    }
    // Eigenvector of mean + r, picking the branch that avoids cancellation.
    Eigendecomposition::Vector upper = half_split >= 0.0
                                           ? Eigendecomposition::Vector{r + half_split, std::conj(c)}
                                           : Eigendecomposition::Vector{c, r - half_split};
    const double n = std::hypot(std::abs(upper[0]), std::abs(upper[1]));
    upper[0] /= n;
    upper[1] /= n;
    const Eigendecomposition::Vector lower{std::conj(upper[1]), -std::conj(upper[0])};
    e.eigenvectors = {canonical_phase(lower), canonical_phase(upper)};
    return e;
}

}  // namespace detail

/// A valid qubit state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    static constexpr double kTraceTolerance = 1e-12;
    static constexpr double kPositivityTolerance = 1e-12;

    /// Maximally mixed state I/2.
    DensityMatrix() : m_(0.5, 0.0, 0.0, 0.5) {}

    explicit DensityMatrix(const ComplexMatrix2& m) : m_(m) {
        if (!m.is_finite()) throw DomainError("DensityMatrix: non-finite entry");
        if (hermiticity_defect(m) > kHermitianTolerance)
            throw DomainError("DensityMatrix: matrix is not Hermitian");
        if (std::abs(m.trace() - 1.0) > kTraceTolerance)
            throw DomainError("DensityMatrix: trace differs from one");
        if (detail::eigendecompose_hermitian(m).eigenvalues[0] < -kPositivityTolerance)
            throw DomainError("DensityMatrix: negative eigenvalue");
    }

    const ComplexMatrix2& matrix() const { return m_; }
    double purity() const { return (m_ * m_).trace().real(); }

    friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

private:
    ComplexMatrix2 m_;
};

enum class Axis { x, y, z };

/// I_alpha = sigma_alpha / 2.
inline HermitianOperator spin_operator(Axis axis) {
    switch (axis) {
        case Axis::x:
            return HermitianOperator({0.0, 0.5, 0.5, 0.0});
        case Axis::y:
            return HermitianOperator({0.0, -0.5 * kI, 0.5 * kI, 0.0});
        case Axis::z:
            return HermitianOperator({0.5, 0.0, 0.0, -0.5});
    }
    throw DomainError("spin_operator: unknown axis");
}

/// H = b0 I_z + bx I_x.
inline HermitianOperator hamiltonian(double b0, double bx) {
    if (!std::isfinite(b0) || !std::isfinite(bx))
        throw DomainError("hamiltonian: fields must be finite");
    return HermitianOperator({0.5 * b0, 0.5 * bx, 0.5 * bx, -0.5 * b0});
}

inline ComplexMatrix2 commutator(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return a * b - b * a;
}

inline ComplexMatrix2 commutator(const HermitianOperator& a, const HermitianOperator& b) {
    return commutator(a.matrix(), b.matrix());
}

inline Eigendecomposition eigendecompose(const HermitianOperator& h) {
    return detail::eigendecompose_hermitian(h.matrix());
}

inline Eigendecomposition eigendecompose(const DensityMatrix& rho) {
    return detail::eigendecompose_hermitian(rho.matrix());
}

inline BlochVector bloch_from_state(const DensityMatrix& rho) {
    const auto& m = rho.matrix();
    return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

/// rho = (I + r.sigma) / 2. Rejects |r| > 1 + 1e-12.
inline DensityMatrix state_from_bloch(const BlochVector& r) {
    if (!(r.norm() <= 1.0 + 1e-12))
        throw DomainError("state_from_bloch: Bloch vector longer than one");
    const complex off{0.5 * r.rx, -0.5 * r.ry};
    return DensityMatrix({0.5 * (1.0 + r.rz), off, std::conj(off), 0.5 * (1.0 - r.rz)});
}

/// Level splitting of b0 I_z + b I_x.
inline double energy_gap(double b0, double b) { return std::hypot(b0, b); }

}  // namespace friction
