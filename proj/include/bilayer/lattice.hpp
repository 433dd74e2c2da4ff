#pragma once

// Geometry of the two chains: rational supercells, ratio scans and
// minimal-image arithmetic on a periodic line.

#include "bilayer/error.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace bilayer {

/// Lattice constants of the two chains. Chain 1 sits on ell1*Z, chain 2 on ell2*Z.
struct LatticeConstants {
    double ell1{1.0};
    double ell2{1.0};

    friend bool operator==(const LatticeConstants&, const LatticeConstants&) = default;
};

/// Rational approximant with p sites of chain 1 and q sites of chain 2 in one period.
struct SupercellParams {
    long p{0};
    long q{0};
    double ell1{0.0};   // sqrt(q/p)
    double ell2{0.0};   // sqrt(p/q)
    double alpha{0.0};  // ell2/ell1 = p/q
    double L{0.0};      // sqrt(pq) = p*ell1 = q*ell2

    long N() const noexcept { return p + q; }
    LatticeConstants lattice() const noexcept { return {ell1, ell2}; }

    friend bool operator==(const SupercellParams&, const SupercellParams&) = default;
};

inline constexpr long kMinChainSites = 3;

/// Supercell for p sites on chain 1 and q on chain 2, normalized so ell1*ell2 = 1.
/// Rings shorter than three sites would fold the +ell and -ell hops onto one bond.
inline SupercellParams supercell_params(long p, long q) {
    if (p < kMinChainSites || q < kMinChainSites) throw SupercellTooSmall(p, q);
    const auto dp = static_cast<double>(p);
    const auto dq = static_cast<double>(q);
    SupercellParams sp;
    sp.p = p;
    sp.q = q;
    sp.ell1 = std::sqrt(dq / dp);
    sp.ell2 = std::sqrt(dp / dq);
    sp.alpha = dp / dq;
    sp.L = std::sqrt(dp * dq);
    return sp;
}

/// Every (p, N-p) with alpha_min <= p/(N-p) <= alpha_max, ascending in p.
/// Pairs are not reduced to lowest terms: repeated ratios yield distinct supercells.
inline std::vector<std::pair<long, long>> scan_ratios(long N, double alpha_min, double alpha_max) {
    std::vector<std::pair<long, long>> out;
    if (N < 2 || !(alpha_min < alpha_max)) return out;
    for (long p = 1; p < N; ++p) {
        const double ratio = static_cast<double>(p) / static_cast<double>(N - p);
        if (ratio >= alpha_min && ratio <= alpha_max) out.emplace_back(p, N - p);
    }
    return out;
}

/// Representative of (y - x) mod L in [-L/2, L/2).
inline double min_image_displacement(double x, double y, double L) {
    double d = y - x;
    d -= L * std::floor(d / L + 0.5);
    if (d >= 0.5 * L) d -= L;
    if (d < -0.5 * L) d += L;
    return d;
}

/// Point of the torus R/ell*Z, reduced to [-ell/2, ell/2).
inline double reduce_to_cell(double gamma, double ell) { return min_image_displacement(0.0, gamma, ell); }

/// Rational ratios are always commensurate; the scan approximates incommensurate
/// ratios by these. Kept so call sites can state that assumption explicitly.
inline constexpr bool is_commensurate(long p, long q) noexcept { return p > 0 && q > 0; }

} // namespace bilayer
