#pragma once

// Kubo conductivity in the relaxation-time approximation, evaluated either by
// an exact spectral sum or by Chebyshev-Gauss quadrature of the 2D moments of
// the current-current correlation measure.
//
// Units: e = hbar = 1, carrier charge 1. Conductivities are complex.

#include "bilayer/error.hpp"
#include "bilayer/kpm.hpp"
#include "bilayer/operator.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace bilayer {

struct TransportConfig {
    double beta{250.0};     // inverse temperature
    double mu{0.0};         // chemical potential
    double tau_rel{250.0};  // relaxation time
    double omega_hat{0.0};  // drive frequency

    void validate() const {
        if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
        if (!(tau_rel > 0.0)) throw ConfigError("tau", "must be > 0");
        if (!std::isfinite(mu)) throw ConfigError("mu", "must be finite");
        if (!std::isfinite(omega_hat)) throw ConfigError("omega", "must be finite");
    }
};

struct Eigensystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXcd vectors; // unitary, columns are eigenvectors
};

/// H = V diag(lambda) V^dagger. Real symmetric input takes the real solver.
inline Eigensystem eigendecompose(const SupercellOperator& op) {
    const long p = op.params ? op.params->p : -1;
    const long q = op.params ? op.params->q : -1;
    if (op.H.rows() != op.H.cols() || op.H.rows() == 0) throw EigensolverFailure(p, q, "matrix must be square and non-empty");
    if (!op.H.allFinite()) throw EigensolverFailure(p, q, "matrix has non-finite entries");
    Eigensystem es;
    if (op.H.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.H.real());
        if (solver.info() != Eigen::Success) throw EigensolverFailure(p, q, "no convergence");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.H);
        if (solver.info() != Eigen::Success) throw EigensolverFailure(p, q, "no convergence");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors();
    }
    return es;
}

/// J = V^dagger dH V, Hermitian part.
inline Eigen::MatrixXcd current_in_eigenbasis(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& dH) {
    if (V.rows() != dH.rows() || dH.rows() != dH.cols() || V.cols() != V.rows())
        throw OutOfDomain("current_in_eigenbasis: shape mismatch");
    Eigen::MatrixXcd J = V.adjoint() * dH * V;
    return 0.5 * (J + J.adjoint());
}

/// Chebyshev matrix A_mi = T_m(x_i), (M+1) x N.
inline Eigen::MatrixXd chebyshev_matrix(std::span<const double> x, int M) {
    Eigen::MatrixXd A(M + 1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto t = chebyshev_values(x[i], M);
        for (int m = 0; m <= M; ++m) A(m, static_cast<Eigen::Index>(i)) = t[m];
    }
    return A;
}

/// M_mn = (1/N) sum_ij T_m(x_i) |J_ij|^2 T_n(x_j), computed as A K A^T / N.
inline Eigen::MatrixXd ccc_moments(std::span<const double> lambda_hat, const Eigen::MatrixXcd& J, int M) {
    const auto N = static_cast<Eigen::Index>(lambda_hat.size());
    if (J.rows() != N || J.cols() != N) throw OutOfDomain("ccc_moments: shape mismatch");
    const Eigen::MatrixXd A = chebyshev_matrix(lambda_hat, M);
    Eigen::MatrixXd K = J.cwiseAbs2();
    K = 0.5 * (K + K.transpose()).eval();
    Eigen::MatrixXd out = (A * K * A.transpose()) / static_cast<double>(N);
    return 0.5 * (out + out.transpose());
}

namespace detail {

// 1 / (1 + e^x) without overflow.
inline double occupation(double x) {
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

// Difference quotient (f(E') - f(E)) / (E - E') given both occupations.
// Near-equal energies use the exact factorization through expm1 so that no
// cancellation occurs; below `delta_deg` the analytic limit -f' at the midpoint.
inline double fermi_difference_quotient(double E, double Ep, double fE, double fEp, const TransportConfig& tc,
                                        double delta_deg) {
    const double delta = E - Ep;
    if (std::abs(delta) < delta_deg) {
        const double fm = occupation(tc.beta * (0.5 * (E + Ep) - tc.mu));
        return tc.beta * fm * (1.0 - fm);
    }
    const double bd = tc.beta * delta;
    if (std::abs(bd) < 0.5) {
        const double one_minus_fEp = occupation(-tc.beta * (Ep - tc.mu));
        return fE * one_minus_fEp * std::expm1(bd) / delta;
    }
    return (fEp - fE) / delta;
}

inline Complex integrand_from(double E, double Ep, double fE, double fEp, const TransportConfig& tc,
                              double delta_deg) {
    const double quotient = fermi_difference_quotient(E, Ep, fE, fEp, tc, delta_deg);
    return quotient / Complex{1.0 / tc.tau_rel, -(E - Ep) - tc.omega_hat};
}

} // namespace detail

inline double fermi_dirac(double E, const TransportConfig& tc) { return detail::occupation(tc.beta * (E - tc.mu)); }

/// Degenerate-pair threshold relative to the spectral half-width a.
inline double degeneracy_threshold(double a) { return 1e-8 * a; }

/// Phi(E, E') = [(f(E') - f(E)) / (E - E')] / (1/tau - i(E - E') - i omega).
inline Complex kubo_integrand(double E, double Ep, const TransportConfig& tc, double delta_deg) {
    return detail::integrand_from(E, Ep, fermi_dirac(E, tc), fermi_dirac(Ep, tc), tc, delta_deg);
}

/// Quadrature weights Gamma_kl that depend only on the Hamiltonian. Reusable
/// for any (beta, mu, tau_rel, omega_hat).
struct ConductivityWeights {
    double a{1.0};
    double b{0.0};
    int M{0};
    std::vector<double> x;   // rescaled nodes, descending
    Eigen::MatrixXd Gamma;   // M x M

    std::vector<double> energies() const {
        std::vector<double> e(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) e[k] = a * x[k] + b;
        return e;
    }
};

/// Gamma_kl = sum_mn c_m c_n M_mn g_m g_n cos(pi m (k+1/2)/M) cos(pi n (l+1/2)/M),
/// c_0 = 1, c_m = 2 otherwise.
inline ConductivityWeights conductivity_weights(const SpectralMoments& sm, TransformMethod method = TransformMethod::fast) {
    if (!sm.ccc) throw OutOfDomain("conductivity_weights: current-current moments are missing");
    const int M = sm.M;
    if (M < 1) throw OutOfDomain("conductivity_weights: degree must be >= 1");
    const Eigen::MatrixXd& ccc = *sm.ccc;
    if (ccc.rows() != M + 1 || ccc.cols() != M + 1) throw OutOfDomain("conductivity_weights: ccc must be (M+1)x(M+1)");
    const auto g = jackson_coefficients(M);

    ConductivityWeights w;
    w.a = sm.a;
    w.b = sm.b;
    w.M = M;
    w.x = chebyshev_gauss_nodes(M);
    w.Gamma.resize(M, M);

    if (method == TransformMethod::fast) {
        const auto n = static_cast<std::size_t>(M) * static_cast<std::size_t>(M);
        auto in = detail::fftw_buffer(n);
        auto out = detail::fftw_buffer(n);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < M; ++k) in[static_cast<std::size_t>(m) * M + k] = ccc(m, k) * g[m] * g[k];
        detail::run_fftw(
            [&] { return fftw_plan_r2r_2d(M, M, in.get(), out.get(), FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE); });
        for (int k = 0; k < M; ++k)
            for (int l = 0; l < M; ++l) w.Gamma(k, l) = out[static_cast<std::size_t>(k) * M + l];
    } else {
        Eigen::MatrixXd C(M + 1, M);
        for (int m = 0; m <= M; ++m)
            for (int k = 0; k < M; ++k) C(m, k) = (m == 0 ? 1.0 : 2.0) * g[m] * detail::node_cosine(m, k, M);
        w.Gamma = C.transpose() * ccc * C;
    }
    return w;
}

/// sigma = (1/M^2) sum_kl Gamma_kl Phi(E_k, E_l).
inline Complex conductivity_kpm(const ConductivityWeights& w, const TransportConfig& tc) {
    tc.validate();
    const auto E = w.energies();
    std::vector<double> f(E.size());
    for (std::size_t k = 0; k < E.size(); ++k) f[k] = fermi_dirac(E[k], tc);
    const double delta = degeneracy_threshold(w.a);
    Complex acc{};
    for (int k = 0; k < w.M; ++k) {
        Complex row{};
        for (int l = 0; l < w.M; ++l) row += w.Gamma(k, l) * detail::integrand_from(E[k], E[l], f[k], f[l], tc, delta);
        acc += row;
    }
    return acc / (static_cast<double>(w.M) * static_cast<double>(w.M));
}

inline Complex conductivity_kpm(const SpectralMoments& sm, const TransportConfig& tc) {
    return conductivity_kpm(conductivity_weights(sm), tc);
}

/// sigma = (1/N) sum_ij Phi(lambda_i, lambda_j) |J_ij|^2, no polynomial truncation.
inline Complex conductivity_exact(std::span<const double> lambda, const Eigen::MatrixXcd& J, const TransportConfig& tc,
                                  double delta_deg) {
    tc.validate();
    const auto N = static_cast<Eigen::Index>(lambda.size());
    if (J.rows() != N || J.cols() != N) throw OutOfDomain("conductivity_exact: shape mismatch");
    std::vector<double> f(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) f[i] = fermi_dirac(lambda[i], tc);
    Complex acc{};
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            const double k2 = std::norm(J(i, j));
            if (k2 == 0.0) continue;
            acc += k2 * detail::integrand_from(lambda[i], lambda[j], f[i], f[j], tc, delta_deg);
        }
    }
    return acc / static_cast<double>(N);
}

/// Threshold scaled from the spectral half-width of `lambda`.
inline Complex conductivity_exact(std::span<const double> lambda, const Eigen::MatrixXcd& J, const TransportConfig& tc) {
    if (lambda.empty()) return {};
    const auto r = rescale_bounds(lambda);
    return conductivity_exact(lambda, J, tc, degeneracy_threshold(r.a));
}

} // namespace bilayer
