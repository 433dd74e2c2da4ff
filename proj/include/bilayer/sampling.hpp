#pragma once

// Random compactly supported algebra elements and pointwise comparison, used
// by the invariant checks and the test suites.

#include "bilayer/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace bilayer {

/// Random element with smooth kernels: intra blocks are trigonometric in the
/// torus argument, inter blocks are C^1 bumps vanishing at their support edge.
inline AlgebraElement random_element(std::mt19937_64& rng, const LatticeConstants& lat) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<long> reach_dist(0, 2);
    std::uniform_real_distribution<double> radius_dist(0.4, 2.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    auto intra = [&](double ell_other) {
        const long reach = reach_dist(rng);
        std::vector<Complex> c, d;
        std::vector<double> phase;
        for (long k = -reach; k <= reach; ++k) {
            c.emplace_back(u(rng), u(rng));
            d.emplace_back(u(rng), u(rng));
            phase.push_back(std::numbers::pi * u(rng));
        }
        return IntraKernel(
            [c, d, phase, reach, ell_other](double gamma, long k) {
                const auto i = static_cast<std::size_t>(k + reach);
                return c[i] + d[i] * std::cos(two_pi * gamma / ell_other + phase[i]);
            },
            reach);
    };
    auto inter = [&] {
        const double r = radius_dist(rng);
        const Complex amp{u(rng), u(rng)};
        const double wave = 2.0 * u(rng);
        const double shift = 0.3 * u(rng);
        return InterKernel(
            [r, amp, wave, shift](double d) {
                const double s = d / r;
                const double bump = (1.0 - s * s) * (1.0 - s * s);
                return amp * bump * std::polar(1.0 + shift * s, wave * d);
            },
            r);
    };
    IntraKernel f11 = intra(lat.ell2);
    InterKernel f12 = inter();
    InterKernel f21 = inter();
    IntraKernel f22 = intra(lat.ell1);
    return {lat, std::move(f11), std::move(f12), std::move(f21), std::move(f22)};
}

/// Evaluation points for all four blocks.
struct BlockSamples {
    std::vector<std::pair<double, long>> intra1;  // (gamma2, m)
    std::vector<double> inter12;
    std::vector<double> inter21;
    std::vector<std::pair<double, long>> intra2;  // (gamma1, n)
};

inline BlockSamples random_block_samples(std::mt19937_64& rng, const LatticeConstants& lat, int count, long max_step,
                                         double max_displacement) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_int_distribution<long> step(-max_step, max_step);
    BlockSamples s;
    for (int i = 0; i < count; ++i) {
        s.intra1.emplace_back(u(rng) * lat.ell2, step(rng));
        s.inter12.push_back(2.0 * u(rng) * max_displacement);
        s.inter21.push_back(2.0 * u(rng) * max_displacement);
        s.intra2.emplace_back(u(rng) * lat.ell1, step(rng));
    }
    return s;
}

/// max |f - g| over the sample points of every block.
inline double max_block_difference(const AlgebraElement& f, const AlgebraElement& g, const BlockSamples& s) {
    double worst = 0.0;
    for (const auto& [gamma, m] : s.intra1) worst = std::max(worst, std::abs(f.f11(gamma, m) - g.f11(gamma, m)));
    for (double q : s.inter12) worst = std::max(worst, std::abs(f.f12(q) - g.f12(q)));
    for (double p : s.inter21) worst = std::max(worst, std::abs(f.f21(p) - g.f21(p)));
    for (const auto& [gamma, n] : s.intra2) worst = std::max(worst, std::abs(f.f22(gamma, n) - g.f22(gamma, n)));
    return worst;
}

/// Pointwise sum of two elements over the same lattice.
inline AlgebraElement element_sum(const AlgebraElement& f, const AlgebraElement& g) {
    if (!(f.lattice() == g.lattice())) throw LatticeMismatch();
    auto intra = [](const IntraKernel& a, const IntraKernel& b, bool first, const AlgebraElement& fe,
                    const AlgebraElement& ge) -> IntraKernel {
        if (a.empty() && b.empty()) return {};
        return IntraKernel(
            [fe, ge, first](double gamma, long k) {
                return first ? fe.f11(gamma, k) + ge.f11(gamma, k) : fe.f22(gamma, k) + ge.f22(gamma, k);
            },
            std::max(a.reach(), b.reach()));
    };
    auto inter = [](const InterKernel& a, const InterKernel& b, bool upper, const AlgebraElement& fe,
                    const AlgebraElement& ge) -> InterKernel {
        if (a.empty() && b.empty()) return {};
        return InterKernel(
            [fe, ge, upper](double d) { return upper ? fe.f12(d) + ge.f12(d) : fe.f21(d) + ge.f21(d); },
            std::max(a.radius(), b.radius()));
    };
    return {f.lattice(), intra(f.block11(), g.block11(), true, f, g), inter(f.block12(), g.block12(), true, f, g),
            inter(f.block21(), g.block21(), false, f, g), intra(f.block22(), g.block22(), false, f, g)};
}

} // namespace bilayer
