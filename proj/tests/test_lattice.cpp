#include "bilayer/lattice.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace bilayer;
using Catch::Matchers::WithinAbs;

TEST_CASE("supercell parameters", "[lattice]") {
    SECTION("symmetric") {
        const auto sp = supercell_params(3, 3);
        CHECK(sp.ell1 == 1.0);
        CHECK(sp.ell2 == 1.0);
        CHECK(sp.alpha == 1.0);
        CHECK(sp.L == 3.0);
        CHECK(sp.N() == 6);
    }
    SECTION("p=6, q=3") {
        const auto sp = supercell_params(6, 3);
        CHECK_THAT(sp.ell1, WithinAbs(0.7071068, 1e-7));
        CHECK_THAT(sp.ell2, WithinAbs(1.4142136, 1e-7));
        CHECK(sp.alpha == 2.0);
        CHECK_THAT(sp.L, WithinAbs(4.2426407, 1e-7));
    }
    SECTION("geometry closes") {
        for (auto [p, q] : {std::pair{5L, 8L}, {597L, 3584L}, {34L, 21L}}) {
            const auto sp = supercell_params(p, q);
            CHECK_THAT(sp.ell1 * sp.ell2, WithinAbs(1.0, 1e-14));
            CHECK_THAT(p * sp.ell1, WithinAbs(sp.L, 1e-10));
            CHECK_THAT(q * sp.ell2, WithinAbs(sp.L, 1e-10));
        }
        CHECK_THAT(supercell_params(597, 3584).alpha, WithinAbs(0.16657, 5e-6));
    }
    SECTION("too small") {
        CHECK_THROWS_AS(supercell_params(2, 11), SupercellTooSmall);
        CHECK_THROWS_AS(supercell_params(11, 2), SupercellTooSmall);
        CHECK_THROWS_AS(supercell_params(0, 5), SupercellTooSmall);
    }
}

TEST_CASE("ratio enumeration", "[lattice]") {
    const auto r13 = scan_ratios(13, 1.0 / 6.0, 6.0);
    REQUIRE(r13.size() == 10);
    CHECK(r13.front() == std::pair{2L, 11L});
    CHECK(r13.back() == std::pair{11L, 2L});

    const auto big = scan_ratios(4181, 1.0 / 6.0, 6.0);
    CHECK(big.front().first == 598);
    CHECK(big.back().first == 3583);
    CHECK(big.size() == 3583 - 598 + 1);

    CHECK(scan_ratios(7, 0.99, 1.01).empty());
    CHECK(scan_ratios(10, 2.0, 1.0).empty());

    // Endpoints are inclusive.
    const auto r = scan_ratios(7, 1.0 / 6.0, 6.0);
    CHECK(r.front() == std::pair{1L, 6L});
    CHECK(r.back() == std::pair{6L, 1L});
}

TEST_CASE("minimal-image displacement", "[lattice]") {
    CHECK(min_image_displacement(1, 9, 10) == -2.0);
    CHECK_THAT(min_image_displacement(0, 0.3, 10), WithinAbs(0.3, 1e-15));
    CHECK(min_image_displacement(0, 5, 10) == -5.0);
    CHECK(min_image_displacement(0, -5, 10) == -5.0);
    CHECK(min_image_displacement(3, 3, 10) == 0.0);
    for (double y = -23.0; y < 23.0; y += 0.37) {
        const double d = min_image_displacement(0.0, y, 4.0);
        CHECK(d >= -2.0);
        CHECK(d < 2.0);
        CHECK_THAT(std::remainder(d - y, 4.0), WithinAbs(0.0, 1e-12));
    }
    CHECK_THAT(reduce_to_cell(0.75, 1.0), WithinAbs(-0.25, 1e-15));
}

TEST_CASE("rational ratios are commensurate", "[lattice]") {
    STATIC_CHECK(is_commensurate(2, 3));
    STATIC_CHECK(is_commensurate(1, 1));
    STATIC_CHECK(is_commensurate(5, 8));
}
