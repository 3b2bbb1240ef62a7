#pragma once

// Gibbs states, entropies and the friction-work bookkeeping of a closed
// forward-backward protocol. Entropies are in nats.

#include <algorithm>
#include <cmath>
#include <string>

#include "friction/error.hpp"
#include "friction/spin_core.hpp"

namespace friction {

struct GibbsState {
    DensityMatrix state;
    double beta = 0.0;
    double partition_function = 2.0;
};

/// exp(-beta h) / Z, built in the eigenbasis of h. beta = 0 gives exactly I/2.
inline GibbsState gibbs_state(const HermitianOperator& h, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw DomainError("gibbs_state: beta must be finite and non-negative");
    if (beta == 0.0) return {DensityMatrix(), 0.0, 2.0};

    const auto eig = eigendecompose(h);
    const double e0 = eig.eigenvalues[0];
    // Shifted by the ground energy so the weights stay in (0, 1].
    const double w0 = 1.0;
    const double w1 = std::exp(-beta * (eig.eigenvalues[1] - e0));
    const double zs = w0 + w1;
    const double p0 = w0 / zs;
    const double p1 = w1 / zs;
    return {DensityMatrix(p0 * eig.projector(0) + p1 * eig.projector(1)), beta,
            zs * std::exp(-beta * e0)};
}

namespace detail {

inline double x_log_x(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

/// -tr(rho ln rho), with 0 ln 0 = 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    const auto eig = eigendecompose(rho);
    return -(detail::x_log_x(eig.eigenvalues[0]) + detail::x_log_x(eig.eigenvalues[1]));
}

/// Both evaluations of S(rho || sigma) plus the conditioning of sigma.
struct RelativeEntropyEvaluation {
    double direct = 0.0;    ///< tr[rho ln rho - rho ln sigma] via matrix logarithms
    double spectral = 0.0;  ///< sum_i p_i ln p_i - sum_ij p_i ln q_j |<psi_i|phi_j>|^2
    bool near_singular = false;
};

/// Smallest sigma eigenvalue treated as nonzero.
inline constexpr double kRankThreshold = 1e-12;
/// Below this smallest eigenvalue sigma is flagged as near-singular.
inline constexpr double kNearSingularThreshold = 1e-8;
/// Required agreement of the two evaluations for well-conditioned sigma.
inline constexpr double kDualFormTolerance = 1e-10;

/// Computes both forms and cross-checks them.
///
/// Throws DivergenceError when sigma is rank deficient and rho has weight on
/// its kernel, IntegrityError when the two forms disagree.
inline RelativeEntropyEvaluation evaluate_relative_entropy(const DensityMatrix& rho,
                                                           const DensityMatrix& sigma) {
    const auto er = eigendecompose(rho);
    const auto es = eigendecompose(sigma);

    // ln on the support only; the kernel terms are weighted by zero.
    auto log_support = [](double x) { return x > kRankThreshold ? std::log(x) : 0.0; };

    for (int j = 0; j < 2; ++j) {
        if (es.eigenvalues[j] > kRankThreshold) continue;
        const auto& v = es.eigenvectors[j];
        const auto rv0 = rho.matrix()(0, 0) * v[0] + rho.matrix()(0, 1) * v[1];
        const auto rv1 = rho.matrix()(1, 0) * v[0] + rho.matrix()(1, 1) * v[1];
        const double weight = (std::conj(v[0]) * rv0 + std::conj(v[1]) * rv1).real();
        if (weight > kRankThreshold)
            throw DivergenceError("relative_entropy: first state has support outside the second");
    }

    RelativeEntropyEvaluation out;
    out.near_singular = es.eigenvalues[0] < kNearSingularThreshold;

    const ComplexMatrix2 log_rho = er.apply([](double x) { return x > 0.0 ? std::log(x) : 0.0; });
    const ComplexMatrix2 log_sigma = es.apply(log_support);
    out.direct = (rho.matrix() * (log_rho - log_sigma)).trace().real();

    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double p = er.eigenvalues[i];
        s += detail::x_log_x(p);
        if (p <= 0.0) continue;
        for (int j = 0; j < 2; ++j) {
            const complex overlap = std::conj(er.eigenvectors[i][0]) * es.eigenvectors[j][0] +
                                    std::conj(er.eigenvectors[i][1]) * es.eigenvectors[j][1];
            s -= p * log_support(es.eigenvalues[j]) * std::norm(overlap);
        }
    }
    out.spectral = s;

    double tol = kDualFormTolerance;
    if (out.near_singular)
        tol *= std::max(1.0, std::abs(std::log(std::max(es.eigenvalues[0], kRankThreshold))));
    if (!(std::abs(out.direct - out.spectral) <= tol))
        throw IntegrityError("relative_entropy: direct and spectral forms disagree");
    return out;
}

/// S(rho || sigma) = tr[rho ln rho - rho ln sigma].
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return evaluate_relative_entropy(rho, sigma).direct;
}

struct FrictionReport {
    double relative_entropy = 0.0;  ///< S(rho2 || rho0), nats
    double friction_work = 0.0;     ///< tr[H1 rho2] - tr[H1 rho0]
    double heat_to_bath = 0.0;      ///< heat on re-thermalizing rho2 -> rho0, = -friction_work
    double energy_initial = 0.0;    ///< tr[H1 rho0]
    double energy_final = 0.0;      ///< tr[H1 rho2]
    double identity_defect = 0.0;   ///< |S - beta * friction_work|
};

/// Allowed |S - beta w_fric| for a unitarily connected rho2.
inline constexpr double kFrictionIdentityTolerance = 1e-8;

/// Friction bookkeeping for a state rho2 that returned to Hamiltonian h1.
/// Throws IntegrityError when S != beta * w_fric beyond tolerance.
inline FrictionReport friction_report(const DensityMatrix& rho2, const GibbsState& gibbs0,
                                      const HermitianOperator& h1) {
    FrictionReport r;
    r.relative_entropy = relative_entropy(rho2, gibbs0.state);
    r.energy_initial = h1.expectation(gibbs0.state.matrix());
    r.energy_final = h1.expectation(rho2.matrix());
    r.friction_work = r.energy_final - r.energy_initial;
    r.heat_to_bath = -r.friction_work;
    r.identity_defect = std::abs(r.relative_entropy - gibbs0.beta * r.friction_work);
    if (!(r.identity_defect < kFrictionIdentityTolerance))
        throw IntegrityError("friction_report: S(rho2||rho0) != beta * w_fric (defect " +
                             std::to_string(r.identity_defect) + ")");
    return r;
}

}  // namespace friction
