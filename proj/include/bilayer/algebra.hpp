#pragma once

// Bilayer groupoid C*-algebra for two one-dimensional chains.
//
// An element is a 2x2 block of kernels. With the row site placed at the origin:
//   f11(gamma2, m)  intra-chain-1 hop by m*ell1; gamma2 is the offset of chain 2
//                   seen from the row site, a point of R/ell2*Z
//   f12(q)          hop from chain 1 to a chain-2 site at displacement q
//   f21(p)          hop from chain 2 to a chain-1 site at displacement p
//   f22(gamma1, n)  intra-chain-2 hop by n*ell2; gamma1 in R/ell1*Z
// Intra-chain displacements are carried as integer step counts so that the
// lattice sums are exact. Every kernel has a finite support and evaluates to
// exactly zero outside it.

#include "bilayer/error.hpp"
#include "bilayer/lattice.hpp"
#include "bilayer/operator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

namespace bilayer {

using IntraFunction = std::function<Complex(double gamma, long step)>;
using InterFunction = std::function<Complex(double displacement)>;

/// Intra-chain kernel supported on |step| <= reach. A default-constructed kernel is zero.
class IntraKernel {
public:
    IntraKernel() = default;
    IntraKernel(IntraFunction fn, long reach)
        : fn_(std::make_shared<const IntraFunction>(std::move(fn))), reach_(std::max(reach, 0L)) {}

    bool empty() const noexcept { return !fn_; }
    long reach() const noexcept { return empty() ? 0 : reach_; }

    Complex operator()(double gamma, long step) const {
        if (empty() || std::labs(step) > reach_) return {};
        return (*fn_)(gamma, step);
    }

private:
    std::shared_ptr<const IntraFunction> fn_;
    long reach_{0};
};

/// Inter-chain kernel supported on |displacement| <= radius. A default-constructed kernel is zero.
class InterKernel {
public:
    InterKernel() = default;
    InterKernel(InterFunction fn, double radius)
        : fn_(std::make_shared<const InterFunction>(std::move(fn))), radius_(std::max(radius, 0.0)) {}

    bool empty() const noexcept { return !fn_; }
    double radius() const noexcept { return empty() ? 0.0 : radius_; }

    Complex operator()(double d) const {
        if (empty() || std::abs(d) > radius_) return {};
        return (*fn_)(d);
    }

private:
    std::shared_ptr<const InterFunction> fn_;
    double radius_{0.0};
};

/// Immutable element of the bilayer algebra. Copies share the kernels.
class AlgebraElement {
public:
    AlgebraElement(LatticeConstants lat, IntraKernel f11, InterKernel f12, InterKernel f21, IntraKernel f22)
        : lat_(lat), f11_(std::move(f11)), f12_(std::move(f12)), f21_(std::move(f21)), f22_(std::move(f22)) {}

    static AlgebraElement zero(LatticeConstants lat) { return {lat, {}, {}, {}, {}}; }

    static AlgebraElement identity(LatticeConstants lat) {
        auto delta = [](double, long step) { return step == 0 ? Complex{1.0} : Complex{}; };
        return {lat, IntraKernel(delta, 0), {}, {}, IntraKernel(delta, 0)};
    }

    const LatticeConstants& lattice() const noexcept { return lat_; }
    double ell1() const noexcept { return lat_.ell1; }
    double ell2() const noexcept { return lat_.ell2; }

    // Block evaluation. Torus arguments are reduced to [-ell/2, ell/2) first.
    Complex f11(double gamma2, long m) const { return f11_(reduce_to_cell(gamma2, lat_.ell2), m); }
    Complex f12(double q) const { return f12_(q); }
    Complex f21(double p) const { return f21_(p); }
    Complex f22(double gamma1, long n) const { return f22_(reduce_to_cell(gamma1, lat_.ell1), n); }

    const IntraKernel& block11() const noexcept { return f11_; }
    const InterKernel& block12() const noexcept { return f12_; }
    const InterKernel& block21() const noexcept { return f21_; }
    const IntraKernel& block22() const noexcept { return f22_; }

    double support_radius11() const noexcept { return static_cast<double>(f11_.reach()) * lat_.ell1; }
    double support_radius12() const noexcept { return f12_.radius(); }
    double support_radius21() const noexcept { return f21_.radius(); }
    double support_radius22() const noexcept { return static_cast<double>(f22_.reach()) * lat_.ell2; }

    double max_support_radius() const noexcept {
        return std::max({support_radius11(), support_radius12(), support_radius21(), support_radius22()});
    }

private:
    LatticeConstants lat_;
    IntraKernel f11_;
    InterKernel f12_;
    InterKernel f21_;
    IntraKernel f22_;
};

namespace detail {

// Slack used when enumerating lattice points against a real support radius.
// Kernels still cut off at their exact radius.
inline constexpr double kSupportSlack = 1e-9;

// Integers j with |offset + j*ell| <= radius.
inline std::pair<long, long> lattice_window(double offset, double ell, double radius) {
    const double r = radius * (1.0 + kSupportSlack) + kSupportSlack;
    return {static_cast<long>(std::ceil((-r - offset) / ell)), static_cast<long>(std::floor((r - offset) / ell))};
}

inline long steps_within(double radius, double ell) {
    return static_cast<long>(std::floor(radius / ell * (1.0 + kSupportSlack) + kSupportSlack));
}

} // namespace detail

/// Convolution product of two elements, composed lazily.
inline AlgebraElement star_product(const AlgebraElement& f, const AlgebraElement& g) {
    if (!(f.lattice() == g.lattice())) throw LatticeMismatch();
    const double l1 = f.ell1();
    const double l2 = f.ell2();

    // (f*g)_11(gamma2, m)
    IntraKernel b11;
    {
        const bool intra = !f.block11().empty() && !g.block11().empty();
        const bool inter = !f.block12().empty() && !g.block21().empty();
        if (intra || inter) {
            long reach = 0;
            if (intra) reach = f.block11().reach() + g.block11().reach();
            if (inter) reach = std::max(reach, detail::steps_within(f.support_radius12() + g.support_radius21(), l1));
            b11 = IntraKernel(
                [f, g, l1, l2, intra, inter](double gamma2, long m) {
                    Complex acc{};
                    if (intra) {
                        const long r = f.block11().reach();
                        for (long k = -r; k <= r; ++k) acc += f.f11(gamma2, k) * g.f11(gamma2 - k * l1, m - k);
                    }
                    if (inter) {
                        const auto [lo, hi] = detail::lattice_window(gamma2, l2, f.support_radius12());
                        for (long j = lo; j <= hi; ++j) {
                            const double qp = gamma2 + j * l2;
                            acc += f.f12(qp) * g.f21(m * l1 - qp);
                        }
                    }
                    return acc;
                },
                reach);
        }
    }

    // (f*g)_12(q)
    InterKernel b12;
    {
        const bool left = !f.block11().empty() && !g.block12().empty();
        const bool right = !f.block12().empty() && !g.block22().empty();
        if (left || right) {
            double radius = 0.0;
            if (left) radius = f.support_radius11() + g.support_radius12();
            if (right) radius = std::max(radius, f.support_radius12() + g.support_radius22());
            b12 = InterKernel(
                [f, g, l1, l2, left, right](double q) {
                    Complex acc{};
                    if (left) {
                        const long r = f.block11().reach();
                        for (long k = -r; k <= r; ++k) acc += f.f11(q, k) * g.f12(q - k * l1);
                    }
                    if (right) {
                        const auto [lo, hi] = detail::lattice_window(-q, l2, f.support_radius12());
                        for (long j = lo; j <= hi; ++j) {
                            const double np = j * l2;
                            acc += f.f12(q - np) * g.f22(np - q, j);
                        }
                    }
                    return acc;
                },
                radius);
        }
    }

    // (f*g)_21(p)
    InterKernel b21;
    {
        const bool left = !f.block22().empty() && !g.block21().empty();
        const bool right = !f.block21().empty() && !g.block11().empty();
        if (left || right) {
            double radius = 0.0;
            if (left) radius = f.support_radius22() + g.support_radius21();
            if (right) radius = std::max(radius, f.support_radius21() + g.support_radius11());
            b21 = InterKernel(
                [f, g, l1, l2, left, right](double p) {
                    Complex acc{};
                    if (left) {
                        const long r = f.block22().reach();
                        for (long j = -r; j <= r; ++j) acc += f.f22(p, j) * g.f21(p - j * l2);
                    }
                    if (right) {
                        const auto [lo, hi] = detail::lattice_window(-p, l1, f.support_radius21());
                        for (long i = lo; i <= hi; ++i) {
                            const double mp = i * l1;
                            acc += f.f21(p - mp) * g.f11(mp - p, i);
                        }
                    }
                    return acc;
                },
                radius);
        }
    }

    // (f*g)_22(gamma1, n)
    IntraKernel b22;
    {
        const bool intra = !f.block22().empty() && !g.block22().empty();
        const bool inter = !f.block21().empty() && !g.block12().empty();
        if (intra || inter) {
            long reach = 0;
            if (intra) reach = f.block22().reach() + g.block22().reach();
            if (inter) reach = std::max(reach, detail::steps_within(f.support_radius21() + g.support_radius12(), l2));
            b22 = IntraKernel(
                [f, g, l1, l2, intra, inter](double gamma1, long n) {
                    Complex acc{};
                    if (intra) {
                        const long r = f.block22().reach();
                        for (long k = -r; k <= r; ++k) acc += f.f22(gamma1, k) * g.f22(gamma1 - k * l2, n - k);
                    }
                    if (inter) {
                        const auto [lo, hi] = detail::lattice_window(gamma1, l1, f.support_radius21());
                        for (long i = lo; i <= hi; ++i) {
                            const double pp = gamma1 + i * l1;
                            acc += f.f21(pp) * g.f12(n * l2 - pp);
                        }
                    }
                    return acc;
                },
                reach);
        }
    }

    return {f.lattice(), std::move(b11), std::move(b12), std::move(b21), std::move(b22)};
}

inline AlgebraElement adjoint(const AlgebraElement& f) {
    const double l1 = f.ell1();
    const double l2 = f.ell2();
    IntraKernel b11, b22;
    InterKernel b12, b21;
    if (!f.block11().empty())
        b11 = IntraKernel([f, l1](double g2, long m) { return std::conj(f.f11(g2 - m * l1, -m)); }, f.block11().reach());
    if (!f.block21().empty())
        b12 = InterKernel([f](double q) { return std::conj(f.f21(-q)); }, f.support_radius21());
    if (!f.block12().empty())
        b21 = InterKernel([f](double p) { return std::conj(f.f12(-p)); }, f.support_radius12());
    if (!f.block22().empty())
        b22 = IntraKernel([f, l2](double g1, long n) { return std::conj(f.f22(g1 - n * l2, -n)); }, f.block22().reach());
    return {f.lattice(), std::move(b11), std::move(b12), std::move(b21), std::move(b22)};
}

/// Derivation along the chains: multiplies each kernel by i times its displacement.
inline AlgebraElement derive_parallel(const AlgebraElement& f) {
    static constexpr Complex I{0.0, 1.0};
    const double l1 = f.ell1();
    const double l2 = f.ell2();
    IntraKernel b11, b22;
    InterKernel b12, b21;
    if (!f.block11().empty())
        b11 = IntraKernel([f, l1](double g, long m) { return I * (m * l1) * f.f11(g, m); }, f.block11().reach());
    if (!f.block12().empty())
        b12 = InterKernel([f](double q) { return I * q * f.f12(q); }, f.support_radius12());
    if (!f.block21().empty())
        b21 = InterKernel([f](double p) { return I * p * f.f21(p); }, f.support_radius21());
    if (!f.block22().empty())
        b22 = IntraKernel([f, l2](double g, long n) { return I * (n * l2) * f.f22(g, n); }, f.block22().reach());
    return {f.lattice(), std::move(b11), std::move(b12), std::move(b21), std::move(b22)};
}

/// Derivation across the layers (unit interlayer distance): kills the diagonal
/// blocks, multiplies f12 by +i and f21 by -i.
inline AlgebraElement derive_perpendicular(const AlgebraElement& f) {
    static constexpr Complex I{0.0, 1.0};
    InterKernel b12, b21;
    if (!f.block12().empty()) b12 = InterKernel([f](double q) { return I * f.f12(q); }, f.support_radius12());
    if (!f.block21().empty()) b21 = InterKernel([f](double p) { return -I * f.f21(p); }, f.support_radius21());
    return {f.lattice(), {}, std::move(b12), std::move(b21), {}};
}

// ---------------------------------------------------------------------------
// Transversal and representations

/// Point of the canonical transversal: a site of `layer` sits at the origin and
/// the other chain is shifted by `gamma` (reduced to its fundamental domain).
struct Configuration {
    Layer layer{Layer::one};
    double gamma{0.0};

    static Configuration make(Layer layer, double gamma, const LatticeConstants& lat) {
        const double ell = layer == Layer::one ? lat.ell2 : lat.ell1;
        return {layer, reduce_to_cell(gamma, ell)};
    }

    /// (chain-1 offset, chain-2 offset) of the global geometry.
    std::pair<double, double> offsets() const noexcept {
        return layer == Layer::one ? std::pair{0.0, gamma} : std::pair{gamma, 0.0};
    }
};

struct OpenTruncation {
    double radius{0.0};
};

struct PeriodicTruncation {
    SupercellParams params;
};

using Truncation = std::variant<OpenTruncation, PeriodicTruncation>;

namespace detail {

inline std::vector<Site> open_sites(const LatticeConstants& lat, double s1, double s2, double radius) {
    std::vector<Site> sites;
    const auto [lo1, hi1] = lattice_window(s1, lat.ell1, radius);
    for (long k = lo1; k <= hi1; ++k) sites.push_back({Layer::one, s1 + k * lat.ell1});
    const auto [lo2, hi2] = lattice_window(s2, lat.ell2, radius);
    for (long j = lo2; j <= hi2; ++j) sites.push_back({Layer::two, s2 + j * lat.ell2});
    return sites;
}

inline std::vector<Site> periodic_sites(const SupercellParams& sp, double s1, double s2) {
    std::vector<Site> sites;
    sites.reserve(static_cast<std::size_t>(sp.N()));
    for (long k = 0; k < sp.p; ++k) sites.push_back({Layer::one, s1 + k * sp.ell1});
    for (long j = 0; j < sp.q; ++j) sites.push_back({Layer::two, s2 + j * sp.ell2});
    return sites;
}

} // namespace detail

/// Matrix of pi_omega(f) on a finite site set, for the hull point where chain 1
/// sits on s1 + ell1*Z and chain 2 on s2 + ell2*Z.
inline SupercellOperator represent_at_offsets(const AlgebraElement& f, double s1, double s2, const Truncation& trunc) {
    const LatticeConstants& lat = f.lattice();
    SupercellOperator op;
    if (const auto* open = std::get_if<OpenTruncation>(&trunc)) {
        if (!(open->radius >= std::min(lat.ell1, lat.ell2))) throw EmptyTruncation(open->radius);
        op.sites = detail::open_sites(lat, s1, s2, open->radius);
        if (op.sites.empty()) throw EmptyTruncation(open->radius);
    } else {
        const auto& sp = std::get<PeriodicTruncation>(trunc).params;
        if (!(sp.lattice() == lat)) throw LatticeMismatch();
        op.sites = detail::periodic_sites(sp, s1, s2);
        op.period = sp.L;
        op.params = sp;
    }

    const auto n = static_cast<Eigen::Index>(op.sites.size());
    op.H = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Site& row = op.sites[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < n; ++c) {
            const Site& col = op.sites[static_cast<std::size_t>(c)];
            const double d = op.displacement(r, c);
            Complex v;
            if (row.layer == Layer::one && col.layer == Layer::one) {
                v = f.f11(s2 - row.x, std::lround(d / lat.ell1));
            } else if (row.layer == Layer::one) {
                v = f.f12(d);
            } else if (col.layer == Layer::one) {
                v = f.f21(d);
            } else {
                v = f.f22(s1 - row.x, std::lround(d / lat.ell2));
            }
            op.H(r, c) = v;
        }
    }
    return op;
}

inline SupercellOperator represent(const AlgebraElement& f, const Configuration& cfg, const Truncation& trunc) {
    const auto [s1, s2] = cfg.offsets();
    return represent_at_offsets(f, s1, s2, trunc);
}

// ---------------------------------------------------------------------------
// Trace and ergodic averages

/// Trace per unit volume: (ell1+ell2)^-1 [int f11(g,0) dg over ell2*T + int f22(g,0) dg over ell1*T],
/// each torus integral by the n_quad-point rectangle rule.
inline Complex trace_per_unit_volume(const AlgebraElement& f, int n_quad) {
    if (n_quad < 1) throw OutOfDomain("trace_per_unit_volume: n_quad must be >= 1");
    const double l1 = f.ell1();
    const double l2 = f.ell2();
    Complex int11{}, int22{};
    for (int j = 0; j < n_quad; ++j) {
        const double t = -0.5 + static_cast<double>(j) / n_quad;
        int11 += f.f11(t * l2, 0);
        int22 += f.f22(t * l1, 0);
    }
    return (int11 * (l2 / n_quad) + int22 * (l1 / n_quad)) / (l1 + l2);
}

/// Average of a function on the transversal along the orbit of `cfg`, over the
/// sites of both chains inside [-r, r].
template <class F>
Complex birkhoff_average(F&& f_scalar, const Configuration& cfg, const LatticeConstants& lat, double r) {
    if (!(r > 0.0)) throw OutOfDomain("birkhoff_average: r must be positive");
    const auto [s1, s2] = cfg.offsets();
    Complex acc{};
    long count = 0;
    const auto [lo1, hi1] = detail::lattice_window(s1, lat.ell1, r);
    for (long k = lo1; k <= hi1; ++k) {
        const double a = s1 + k * lat.ell1;
        acc += f_scalar(Configuration::make(Layer::one, s2 - a, lat));
        ++count;
    }
    const auto [lo2, hi2] = detail::lattice_window(s2, lat.ell2, r);
    for (long j = lo2; j <= hi2; ++j) {
        const double a = s2 + j * lat.ell2;
        acc += f_scalar(Configuration::make(Layer::two, s1 - a, lat));
        ++count;
    }
    return count == 0 ? Complex{} : acc / static_cast<double>(count);
}

/// (1/#(ell*Z within B_r)) * sum over n in ell*Z within B_r of exp(2*pi*i*k*n).
inline Complex ergodic_character_sum(double ell, double k, double r) {
    if (!(ell > 0.0) || !(r > 0.0)) throw OutOfDomain("ergodic_character_sum: ell and r must be positive");
    const auto jmax = static_cast<long>(std::floor(r / ell));
    Complex acc{};
    for (long j = -jmax; j <= jmax; ++j) {
        double t = k * (j * ell);
        t -= std::round(t);
        acc += std::polar(1.0, 2.0 * std::numbers::pi * t);
    }
    return acc / static_cast<double>(2 * jmax + 1);
}

/// Largest singular value of a represented truncation; a lower bound on the C*-norm.
inline double truncation_norm(const SupercellOperator& op) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op.H);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

} // namespace bilayer
