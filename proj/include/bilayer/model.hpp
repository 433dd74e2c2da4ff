#pragma once

// Two first-neighbor chains coupled by a Gaussian interlayer hopping.

#include "bilayer/algebra.hpp"
#include "bilayer/error.hpp"
#include "bilayer/lattice.hpp"
#include "bilayer/operator.hpp"

#include <cmath>
#include <string>

namespace bilayer {

struct ModelParams {
    double W{0.5};              // interlayer amplitude
    double sigma{0.25};         // interlayer length scale
    double cutoff_sigmas{6.0};  // hard cutoff of the Gaussian, in units of sigma

    double cutoff() const noexcept { return cutoff_sigmas * sigma; }

    void validate() const {
        if (!(W >= 0.0)) throw ConfigError("W", "must be >= 0");
        if (!(sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
        if (!(cutoff_sigmas > 0.0)) throw ConfigError("cutoff_sigmas", "must be > 0");
    }
};

/// Toy Hamiltonian h: unit first-neighbor hopping on each chain and
/// W exp(-d^2 / 2 sigma^2) between chains, zero beyond cutoff_sigmas*sigma.
inline AlgebraElement toy_hamiltonian(const ModelParams& mp, const LatticeConstants& lat) {
    mp.validate();
    auto neighbor = [](double, long step) { return std::labs(step) == 1 ? Complex{1.0} : Complex{}; };
    const double W = mp.W;
    const double s = mp.sigma;
    auto gaussian = [W, s](double d) { return Complex{W * std::exp(-0.5 * (d / s) * (d / s))}; };
    return {lat, IntraKernel(neighbor, 1), InterKernel(gaussian, mp.cutoff()), InterKernel(gaussian, mp.cutoff()),
            IntraKernel(neighbor, 1)};
}

inline AlgebraElement toy_hamiltonian(const ModelParams& mp, const SupercellParams& sp) {
    return toy_hamiltonian(mp, sp.lattice());
}

/// Periodic supercell matrix of the toy model with chain 1 on gamma1 + ell1*Z
/// and chain 2 on gamma2 + ell2*Z (scan default: both zero).
inline SupercellOperator assemble_supercell(const ModelParams& mp, const SupercellParams& sp, double gamma1 = 0.0,
                                            double gamma2 = 0.0) {
    if (sp.p < kMinChainSites || sp.q < kMinChainSites) throw SupercellTooSmall(sp.p, sp.q);
    return represent_at_offsets(toy_hamiltonian(mp, sp), gamma1, gamma2, PeriodicTruncation{sp});
}

/// Approximate periodic derivation: (dH)_xy = i X(y - x) H_xy with X the
/// minimal-image sawtooth, L-periodic and equal to the identity on (-L/2, L/2).
inline Eigen::MatrixXcd assemble_current(const SupercellOperator& op) {
    const Eigen::Index n = op.size();
    Eigen::MatrixXcd dH = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            if (op.H(r, c) == Complex{}) continue;
            dH(r, c) = Complex{0.0, op.displacement(r, c)} * op.H(r, c);
        }
    }
    return dH;
}

} // namespace bilayer
