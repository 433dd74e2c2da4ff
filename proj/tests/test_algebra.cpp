#include "bilayer/algebra.hpp"
#include "bilayer/model.hpp"
#include "bilayer/sampling.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace bilayer;
using Catch::Matchers::WithinAbs;

namespace {

const LatticeConstants kGolden{1.0 / std::sqrt(std::numbers::phi), std::sqrt(std::numbers::phi)};
const LatticeConstants kUnit{1.0, 1.0};
constexpr Complex I{0.0, 1.0};

AlgebraElement hamiltonian(const LatticeConstants& lat) { return toy_hamiltonian(ModelParams{}, lat); }

double gauss(double d) { return 0.5 * std::exp(-0.5 * (d / 0.25) * (d / 0.25)); }

} // namespace

TEST_CASE("identity is neutral for the product", "[algebra]") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 4; ++i) {
        const auto f = random_element(rng, kGolden);
        const auto s = random_block_samples(rng, kGolden, 30, 3, 3.0);
        const auto one = AlgebraElement::identity(kGolden);
        CHECK(max_block_difference(star_product(one, f), f, s) < 1e-14);
        CHECK(max_block_difference(star_product(f, one), f, s) < 1e-14);
    }
}

TEST_CASE("inter-only factors land on the diagonal blocks", "[algebra]") {
    const LatticeConstants lat{0.8, 1.25};
    auto f12 = [](double q) { return Complex{1.0 - q * q / 4.0, 0.3 * q}; };
    auto g21 = [](double p) { return Complex{std::cos(p), -0.5}; };
    const AlgebraElement f(lat, {}, InterKernel(f12, 2.0), {}, {});
    const AlgebraElement g(lat, {}, {}, InterKernel(g21, 2.0), {});
    const auto fg = star_product(f, g);
    for (double gamma2 : {-0.6, -0.1, 0.0, 0.37, 0.62}) {
        Complex expect{};
        for (long j = -5; j <= 5; ++j) {
            const double qp = gamma2 + j * lat.ell2;
            if (std::abs(qp) <= 2.0) expect += f12(qp) * g21(-qp);
        }
        CHECK(std::abs(fg.f11(gamma2, 0) - expect) < 1e-14);
        CHECK(fg.f12(gamma2) == Complex{});
        CHECK(fg.f21(gamma2) == Complex{});
    }
}

TEST_CASE("toy model square", "[algebra]") {
    const auto h = hamiltonian(kUnit);
    const auto hh = star_product(h, h);
    // Two nearest-neighbour round trips plus the interlayer Gaussian lattice sum.
    const double expect = 2.0 + 0.25 * (1.0 + 2.0 * std::exp(-16.0));
    CHECK_THAT(hh.f11(0.0, 0).real(), WithinAbs(expect, 1e-14));
    CHECK_THAT(hh.f11(0.0, 0).real(), WithinAbs(2.25, 1e-7));
    CHECK(std::abs(hh.f11(0.0, 0).imag()) < 1e-15);
    // Second neighbour: direct path plus the detour through the aligned chain-2 site.
    CHECK_THAT(hh.f11(0.0, 2).real(), WithinAbs(1.0 + 0.25 * std::exp(-16.0), 1e-15));
}

TEST_CASE("adjoint", "[algebra]") {
    std::mt19937_64 rng(11);
    const auto s = random_block_samples(rng, kGolden, 30, 3, 3.0);
    for (int i = 0; i < 4; ++i) {
        const auto f = random_element(rng, kGolden);
        CHECK(max_block_difference(adjoint(adjoint(f)), f, s) < 1e-14);
    }
    const auto h = hamiltonian(kGolden);
    CHECK(max_block_difference(adjoint(h), h, s) < 1e-15);

    const AlgebraElement f(kGolden, {}, InterKernel([](double q) { return std::abs(q) < 1.0 ? I : Complex{}; }, 1.0),
                           {}, {});
    const auto fs = adjoint(f);
    CHECK(fs.block11().empty());
    CHECK(fs.block12().empty());
    CHECK(fs.block22().empty());
    for (double p : {-0.9, -0.2, 0.0, 0.5, 0.99}) CHECK(fs.f21(p) == -I);
    CHECK(fs.f21(1.5) == Complex{});
}

TEST_CASE("parallel derivation", "[algebra]") {
    const auto one = AlgebraElement::identity(kGolden);
    std::mt19937_64 rng(13);
    const auto s = random_block_samples(rng, kGolden, 20, 3, 3.0);
    CHECK(max_block_difference(derive_parallel(one), AlgebraElement::zero(kGolden), s) == 0.0);

    const auto h = hamiltonian(kGolden);
    const auto dh = derive_parallel(h);
    for (double q : {-1.2, -0.3, 0.0, 0.2, 0.7}) CHECK(std::abs(dh.f12(q) - I * q * gauss(q)) < 1e-15);

    const auto lhs = derive_parallel(star_product(h, h));
    const auto rhs = element_sum(star_product(dh, h), star_product(h, dh));
    CHECK(max_block_difference(lhs, rhs, s) < 1e-12);
}

TEST_CASE("perpendicular derivation", "[algebra]") {
    const auto one = AlgebraElement::identity(kGolden);
    std::mt19937_64 rng(17);
    const auto s = random_block_samples(rng, kGolden, 20, 3, 3.0);
    CHECK(max_block_difference(derive_perpendicular(one), AlgebraElement::zero(kGolden), s) == 0.0);

    const auto h = hamiltonian(kGolden);
    const auto dh = derive_perpendicular(h);
    for (double p : {-1.2, -0.3, 0.0, 0.2, 0.7}) CHECK(std::abs(dh.f21(p) + I * gauss(p)) < 1e-15);

    const auto lhs = derive_perpendicular(star_product(h, h));
    const auto rhs = element_sum(star_product(dh, h), star_product(h, dh));
    CHECK(max_block_difference(lhs, rhs, s) < 1e-12);

    // Bounded: same norm as the off-diagonal part on every truncation.
    for (int i = 0; i < 3; ++i) {
        const auto f = random_element(rng, kGolden);
        const AlgebraElement off(kGolden, {}, f.block12(), f.block21(), {});
        const auto cfg = Configuration::make(Layer::one, 0.3 * i, kGolden);
        const double a = truncation_norm(represent(derive_perpendicular(f), cfg, OpenTruncation{8.0}));
        const double b = truncation_norm(represent(off, cfg, OpenTruncation{8.0}));
        CHECK_THAT(a, WithinAbs(b, 1e-12));
    }
}

TEST_CASE("product rejects mismatched lattices", "[algebra]") {
    CHECK_THROWS_AS(star_product(hamiltonian(kUnit), hamiltonian(kGolden)), LatticeMismatch);
}

TEST_CASE("representation", "[algebra]") {
    const auto cfg = Configuration::make(Layer::two, 0.21, kGolden);
    const auto id = represent(AlgebraElement::identity(kGolden), cfg, OpenTruncation{5.0});
    CHECK(id.H.isApprox(Eigen::MatrixXcd::Identity(id.size(), id.size()), 0.0));

    std::mt19937_64 rng(19);
    const auto f = random_element(rng, kGolden);
    const auto sym = element_sum(f, adjoint(f));
    CHECK(hermiticity_defect(represent(sym, cfg, OpenTruncation{6.0}).H) < 1e-14);

    CHECK_THROWS_AS(represent(f, cfg, OpenTruncation{0.1}), EmptyTruncation);
    CHECK_THROWS_AS(represent(f, cfg, PeriodicTruncation{supercell_params(5, 8)}), LatticeMismatch);
}

TEST_CASE("representation is a homomorphism away from the edge", "[algebra]") {
    std::mt19937_64 rng(23);
    constexpr double R = 9.0;
    for (int i = 0; i < 4; ++i) {
        const auto f = random_element(rng, kGolden);
        const auto g = random_element(rng, kGolden);
        const auto cfg = Configuration::make(i % 2 ? Layer::one : Layer::two, 0.17 * i, kGolden);
        const auto pf = represent(f, cfg, OpenTruncation{R});
        const auto pg = represent(g, cfg, OpenTruncation{R});
        const auto pfg = represent(star_product(f, g), cfg, OpenTruncation{R});
        const Eigen::MatrixXcd prod = pf.H * pg.H;
        const double interior = R - (f.max_support_radius() + g.max_support_radius());
        int rows = 0;
        double worst = 0.0;
        for (Eigen::Index r = 0; r < pf.size(); ++r) {
            if (std::abs(pf.sites[static_cast<std::size_t>(r)].x) > interior) continue;
            ++rows;
            worst = std::max(worst, (pfg.H.row(r) - prod.row(r)).cwiseAbs().maxCoeff());
        }
        CHECK(rows > 0);
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("trace per unit volume", "[algebra]") {
    CHECK_THAT(trace_per_unit_volume(AlgebraElement::identity(kGolden), 16).real(), WithinAbs(1.0, 1e-15));
    CHECK(std::abs(trace_per_unit_volume(hamiltonian(kGolden), 64)) == 0.0);

    const auto hh = star_product(hamiltonian(kUnit), hamiltonian(kUnit));
    const double closed = 2.0 + 2.0 * 0.25 * 0.25 * std::sqrt(std::numbers::pi) / 2.0;
    CHECK_THAT(closed, WithinAbs(2.1107784, 5e-8));
    CHECK_THAT(trace_per_unit_volume(hh, 10000).real(), WithinAbs(closed, 1e-10));

    const auto gg = star_product(hamiltonian(kGolden), hamiltonian(kGolden));
    const double closed_g = 2.0 + 2.0 * 0.25 * 0.25 * std::sqrt(std::numbers::pi) / (kGolden.ell1 + kGolden.ell2);
    CHECK_THAT(trace_per_unit_volume(gg, 2000).real(), WithinAbs(closed_g, 1e-10));
}

TEST_CASE("orbit averages", "[algebra]") {
    const auto one = [](const Configuration&) { return Complex{1.0}; };
    CHECK(birkhoff_average(one, Configuration{}, kGolden, 50.0) == Complex{1.0});

    auto character = [](const LatticeConstants& lat) {
        return [lat](const Configuration& c) {
            return c.layer == Layer::one ? std::polar(1.0, 2.0 * std::numbers::pi * c.gamma / lat.ell2) : Complex{};
        };
    };
    const LatticeConstants golden{1.0, std::numbers::phi};
    CHECK(std::abs(birkhoff_average(character(golden), Configuration{}, golden, 1e4)) < 1e-2);

    // Commensurate: the character is constant on chain-1 sites and the chain-2
    // half of the orbit contributes zero.
    for (double r : {3.0, 10.0, 100.0})
        CHECK_THAT(std::abs(birkhoff_average(character(kUnit), Configuration{}, kUnit, r) - 0.5), WithinAbs(0.0, 1e-12));
}

TEST_CASE("ergodic character sums", "[algebra]") {
    for (double r : {1.0, 10.0, 1000.0}) {
        CHECK(ergodic_character_sum(1.0, 1.0, r) == Complex{1.0});
        CHECK(ergodic_character_sum(0.5, 2.0, r) == Complex{1.0});
    }
    const Complex s = ergodic_character_sum(1.0, 0.5, 100.0);
    CHECK_THAT(s.real(), WithinAbs(1.0 / 201.0, 1e-14));
    CHECK_THAT(s.imag(), WithinAbs(0.0, 1e-14));

    const double k = std::numbers::phi;
    const double bound = 2.0 / (std::abs(1.0 - std::polar(1.0, 2.0 * std::numbers::pi * k)) * 2001.0);
    CHECK_THAT(bound, WithinAbs(5.4e-4, 5e-5));
    CHECK(std::abs(ergodic_character_sum(1.0, k, 1000.0)) <= bound);
}
