#include "bilayer/kubo.hpp"
#include "bilayer/model.hpp"
#include "bilayer/sampling.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace bilayer;
using Catch::Matchers::WithinAbs;

TEST_CASE("toy kernels", "[model]") {
    const auto h = toy_hamiltonian(ModelParams{}, LatticeConstants{});
    CHECK(h.f12(0.0) == Complex{0.5});
    CHECK_THAT(h.f12(0.25).real(), WithinAbs(0.3032653, 1e-7));
    CHECK_THAT(h.f21(-0.25).real(), WithinAbs(0.3032653, 1e-7));
    CHECK(h.f12(1.5000001) == Complex{});
    CHECK(h.f11(0.3, 1) == Complex{1.0});
    CHECK(h.f11(0.3, 0) == Complex{});
    CHECK(h.f22(0.3, -1) == Complex{1.0});
    CHECK(h.f22(0.3, 2) == Complex{});

    std::mt19937_64 rng(3);
    const auto s = random_block_samples(rng, h.lattice(), 30, 3, 2.0);
    CHECK(max_block_difference(adjoint(h), h, s) == 0.0);

    CHECK_THROWS_AS(toy_hamiltonian(ModelParams{-1.0, 0.25, 6.0}, LatticeConstants{}), ConfigError);
    CHECK_THROWS_AS(toy_hamiltonian(ModelParams{0.5, 0.0, 6.0}, LatticeConstants{}), ConfigError);
}

TEST_CASE("decoupled supercell is two rings", "[model]") {
    const auto sp = supercell_params(5, 8);
    const auto op = assemble_supercell(ModelParams{0.0, 0.25, 6.0}, sp);
    REQUIRE(op.size() == 13);
    CHECK(op.H.topRightCorner(5, 8).cwiseAbs().maxCoeff() == 0.0);
    CHECK(op.H.bottomLeftCorner(8, 5).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index r = 0; r < 5; ++r) {
        CHECK(op.H(r, (r + 1) % 5) == Complex{1.0});
        CHECK(op.H.row(r).cwiseAbs().sum() == 2.0);
    }
    for (Eigen::Index r = 0; r < 8; ++r) CHECK(op.H.row(5 + r).cwiseAbs().sum() == 2.0);
}

TEST_CASE("aligned sites couple with amplitude W", "[model]") {
    const auto op = assemble_supercell(ModelParams{}, supercell_params(3, 3));
    CHECK(op.H(0, 3) == Complex{0.5});
    CHECK(op.H(1, 4) == Complex{0.5});
    CHECK(op.H(4, 1) == Complex{0.5});
    CHECK(hermiticity_defect(op.H) == 0.0);
}

TEST_CASE("supercell guard", "[model]") {
    SupercellParams sp;
    sp.p = 2;
    sp.q = 11;
    CHECK_THROWS_AS(assemble_supercell(ModelParams{}, sp), SupercellTooSmall);
}

TEST_CASE("current operator", "[model]") {
    for (auto [p, q] : {std::pair{5L, 8L}, {34L, 21L}, {13L, 21L}}) {
        const auto op = assemble_supercell(ModelParams{}, supercell_params(p, q));
        const auto dH = assemble_current(op);
        CHECK(hermiticity_defect(op.H) < 1e-15);
        CHECK(hermiticity_defect(dH) < 1e-15);
        CHECK(dH.diagonal().cwiseAbs().maxCoeff() == 0.0);
        const auto es = eigendecompose(op);
        const auto J = current_in_eigenbasis(es.vectors, dH);
        CHECK(hermiticity_defect(J) < 1e-10);
        CHECK(std::abs(J.trace() - dH.trace()) < 1e-10);
    }
}

TEST_CASE("mean squared hopping near the golden ratio", "[model]") {
    const auto sp = supercell_params(89, 144);
    const auto op = assemble_supercell(ModelParams{}, sp);
    const double tr = (op.H * op.H).trace().real() / static_cast<double>(sp.N());
    const double closed = 2.0 + 2.0 * 0.25 * 0.25 * std::sqrt(std::numbers::pi) / (sp.ell1 + sp.ell2);
    CHECK_THAT(tr, WithinAbs(closed, 1e-3));
}
