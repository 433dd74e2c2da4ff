#pragma once

// Kernel polynomial method: Chebyshev moments of the density of states,
// Jackson damping, and evaluation on Chebyshev-Gauss nodes.
//
// Node weights use the (2 - delta_{m,0}) convention of the reconstruction
//   nu(E) = [mu_0 + 2 sum_{m>=1} mu_m g_m T_m(x)] / (pi sqrt(a^2 - (E-b)^2)),
// so gamma_k = pi sqrt(a^2 - (E_k-b)^2) nu(E_k) and (1/M) sum_k gamma_k = mu_0.

#include "bilayer/error.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bilayer {

inline constexpr double kDefaultRescaleMargin = 0.01;
inline constexpr double kMinRescaleScale = 1e-12;

struct Rescaling {
    double a{1.0};  // half-width
    double b{0.0};  // center

    double to_unit(double E) const noexcept { return (E - b) / a; }
    double to_energy(double x) const noexcept { return a * x + b; }
};

struct SpectralMoments {
    double a{1.0};
    double b{0.0};
    int M{0};
    std::vector<double> mu;              // mu[0..M]
    std::optional<Eigen::MatrixXd> ccc;  // current-current moments, (M+1)x(M+1)

    Rescaling rescaling() const noexcept { return {a, b}; }
};

/// Maps [min, max] of the spectrum into [-(1-epsilon), 1-epsilon].
inline Rescaling rescale_bounds(std::span<const double> eigs, double epsilon = kDefaultRescaleMargin) {
    if (eigs.empty()) throw OutOfDomain("rescale_bounds: empty spectrum");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw OutOfDomain("rescale_bounds: epsilon must lie in (0, 1)");
    const auto [lo, hi] = std::minmax_element(eigs.begin(), eigs.end());
    Rescaling r;
    r.b = 0.5 * (*hi + *lo);
    r.a = std::max((*hi - *lo) / (2.0 * (1.0 - epsilon)), kMinRescaleScale);
    return r;
}

/// [T_0(x), ..., T_M(x)] by the three-term recursion.
inline std::vector<double> chebyshev_values(double x, int M) {
    if (!(std::abs(x) <= 1.0)) throw OutOfDomain("chebyshev_values: |x| > 1");
    if (M < 0) throw OutOfDomain("chebyshev_values: negative degree");
    std::vector<double> t(static_cast<std::size_t>(M) + 1);
    t[0] = 1.0;
    if (M >= 1) t[1] = x;
    for (int m = 1; m < M; ++m) t[m + 1] = 2.0 * x * t[m] - t[m - 1];
    return t;
}

/// Jackson damping factors g_0..g_M.
inline std::vector<double> jackson_coefficients(int M) {
    if (M < 0) throw OutOfDomain("jackson_coefficients: negative degree");
    std::vector<double> g(static_cast<std::size_t>(M) + 1);
    g[0] = 1.0;
    const double np1 = M + 1.0;
    const double th = std::numbers::pi / np1;
    const double cot = std::cos(th) / std::sin(th);
    for (int m = 1; m <= M; ++m) {
        const double phi = th * m;
        g[m] = ((M - m + 1) * std::cos(phi) + std::sin(phi) * cot) / np1;
    }
    return g;
}

/// mu_m = (1/N) sum_j T_m((lambda_j - b)/a).
inline SpectralMoments dos_moments(std::span<const double> eigs, double a, double b, int M) {
    if (eigs.empty()) throw OutOfDomain("dos_moments: empty spectrum");
    if (M < 0) throw OutOfDomain("dos_moments: negative degree");
    SpectralMoments sm;
    sm.a = a;
    sm.b = b;
    sm.M = M;
    sm.mu.assign(static_cast<std::size_t>(M) + 1, 0.0);
    for (double lambda : eigs) {
        const double x = (lambda - b) / a;
        if (!(std::abs(x) < 1.0))
            throw OutOfDomain("dos_moments: eigenvalue " + std::to_string(lambda) +
                              " falls outside (-1, 1) after rescaling; wrong (a, b)");
        const auto t = chebyshev_values(x, M);
        for (int m = 0; m <= M; ++m) sm.mu[m] += t[m];
    }
    const double inv_n = 1.0 / static_cast<double>(eigs.size());
    for (double& v : sm.mu) v *= inv_n;
    return sm;
}

/// Rescaled Chebyshev-Gauss abscissas x_k = cos(pi (k + 1/2) / M), descending in k.
inline std::vector<double> chebyshev_gauss_nodes(int M) {
    std::vector<double> x(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) x[k] = std::cos(std::numbers::pi * (k + 0.5) / M);
    return x;
}

namespace detail {

// cos(pi * m * (k + 1/2) / M) with the integer part of the angle reduced exactly.
inline double node_cosine(long m, long k, long M) {
    const long num = (m * (2 * k + 1)) % (4 * M);
    return std::cos(std::numbers::pi * static_cast<double>(num) / (2.0 * static_cast<double>(M)));
}

// The FFTW planner is not thread safe; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(double* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<double[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
    auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * std::max<std::size_t>(n, 1)));
    if (!p) throw EnvironmentError("fftw_malloc failed");
    return FftwBuffer(p);
}

// Runs an r2r plan created under the planner lock. FFTW_ESTIMATE keeps the plan,
// and therefore the rounding, identical from run to run.
template <class MakePlan>
void run_fftw(MakePlan&& make_plan) {
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = make_plan();
    }
    if (!plan) throw EnvironmentError("FFTW could not create a cosine-transform plan");
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

} // namespace detail

/// y_k = c_0 + 2 sum_{m=1}^{M-1} c_m cos(pi m (k+1/2)/M), k = 0..M-1 (DCT-III).
inline std::vector<double> cosine_transform_fast(std::span<const double> c, int M) {
    auto in = detail::fftw_buffer(static_cast<std::size_t>(M));
    auto out = detail::fftw_buffer(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) in[m] = m < static_cast<int>(c.size()) ? c[m] : 0.0;
    detail::run_fftw([&] { return fftw_plan_r2r_1d(M, in.get(), out.get(), FFTW_REDFT01, FFTW_ESTIMATE); });
    return {out.get(), out.get() + M};
}

/// Same transform by direct O(M^2) summation; terms with m >= M are included.
inline std::vector<double> cosine_transform_direct(std::span<const double> c, int M) {
    std::vector<double> y(static_cast<std::size_t>(M), 0.0);
    for (int k = 0; k < M; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m)
            acc += (m == 0 ? 1.0 : 2.0) * c[m] * detail::node_cosine(static_cast<long>(m), k, M);
        y[k] = acc;
    }
    return y;
}

enum class TransformMethod { fast, direct };

struct DosNodes {
    std::vector<double> x;      // rescaled abscissas, descending
    std::vector<double> gamma;  // gamma_k = pi sqrt(a^2 - (E_k - b)^2) nu(E_k)
};

inline DosNodes dos_nodes(const SpectralMoments& sm, std::span<const double> damping,
                          TransformMethod method = TransformMethod::fast) {
    if (sm.M < 1) throw OutOfDomain("dos_nodes: degree must be >= 1");
    if (sm.mu.size() != static_cast<std::size_t>(sm.M) + 1 || damping.size() != sm.mu.size())
        throw OutOfDomain("dos_nodes: moment and damping lengths must be M+1");
    std::vector<double> c(sm.mu.size());
    for (std::size_t m = 0; m < c.size(); ++m) c[m] = sm.mu[m] * damping[m];
    DosNodes out;
    out.x = chebyshev_gauss_nodes(sm.M);
    out.gamma = method == TransformMethod::fast ? cosine_transform_fast(c, sm.M) : cosine_transform_direct(c, sm.M);
    return out;
}

inline DosNodes dos_nodes(const SpectralMoments& sm, TransformMethod method = TransformMethod::fast) {
    const auto g = jackson_coefficients(sm.M);
    return dos_nodes(sm, g, method);
}

inline double dos_reconstruct(const SpectralMoments& sm, std::span<const double> damping, double E) {
    const double x = (E - sm.b) / sm.a;
    if (!(std::abs(x) < 1.0)) throw EdgeSingularity(E);
    const auto t = chebyshev_values(x, sm.M);
    double acc = sm.mu[0] * damping[0];
    for (int m = 1; m <= sm.M; ++m) acc += 2.0 * sm.mu[m] * damping[m] * t[m];
    const double d = E - sm.b;
    return acc / (std::numbers::pi * std::sqrt(sm.a * sm.a - d * d));
}

/// Jackson-damped density of states at energy E.
inline double dos_reconstruct(const SpectralMoments& sm, double E) {
    const auto g = jackson_coefficients(sm.M);
    return dos_reconstruct(sm, g, E);
}

/// Density at node k from its weight: nu(E_k) = gamma_k / (pi a sqrt(1 - x_k^2)).
inline double node_density(const Rescaling& r, double x, double gamma) {
    return gamma / (std::numbers::pi * r.a * std::sqrt(1.0 - x * x));
}

/// n_j = (1/M) sum over nodes k with x_k <= x_j of gamma_k. Nodes are descending,
/// so this is a suffix sum; n_0 carries the total weight mu_0.
inline std::vector<double> integrated_dos(std::span<const double> x, std::span<const double> gamma) {
    if (x.size() != gamma.size()) throw OutOfDomain("integrated_dos: size mismatch");
    const auto M = x.size();
    std::vector<double> n(M, 0.0);
    double acc = 0.0;
    for (std::size_t k = M; k-- > 0;) {
        acc += gamma[k];
        n[k] = acc / static_cast<double>(M);
    }
    return n;
}

/// Integrated density of states at energy E: weight of all nodes at or below E.
inline double integrated_dos_at(const Rescaling& r, std::span<const double> x, std::span<const double> gamma,
                                double E) {
    double acc = 0.0;
    for (std::size_t k = x.size(); k-- > 0;) {
        if (r.to_energy(x[k]) > E) break;
        acc += gamma[k];
    }
    return acc / static_cast<double>(x.size());
}

} // namespace bilayer
