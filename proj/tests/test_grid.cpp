#include "catch_amalgamated.hpp"

#include "biphoton/constants.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/grid.hpp"

using namespace biphoton;

TEST_CASE("grid samples are symmetric about zero offset") {
    const SpectralGrid g = make_grid(816.70, 2.0e14, 4096);
    REQUIRE(g.n == 4096);
    CHECK(g.spacing() == Catch::Approx(4.0e14 / 4095.0));
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{100}, std::size_t{2047}}) {
        CHECK(g.omega(k) == -g.omega(g.mirror(k))); // exact IEEE negation
    }
    CHECK(g.omega(0) == Catch::Approx(-2.0e14).epsilon(1e-14));
    CHECK(g.omega(g.n - 1) == Catch::Approx(2.0e14).epsilon(1e-14));
    CHECK(g.omega(0) == -g.omega(g.n - 1));
}

TEST_CASE("degenerate sample sits at twice the pump wavelength") {
    const SpectralGrid g = make_grid(816.70, 2.0e14, 4097);
    const std::size_t center = 2048;
    CHECK(g.omega(center) == 0.0);
    CHECK(g.signal_wavelength_nm(center) == Catch::Approx(2.0 * 816.70).epsilon(1e-12));
    CHECK(g.omega0 == Catch::Approx(kPi * kSpeedOfLight / 816.70e-9));
}

TEST_CASE("trapezoid quadrature integrates constants exactly") {
    const SpectralGrid g = make_grid(816.70, 1.5e14, 501);
    const double total = trapezoid(g, [](std::size_t) { return 1.0; });
    CHECK(total == Catch::Approx(3.0e14).epsilon(1e-12));
    // linear function integrates to zero by symmetry
    const double odd = trapezoid(g, [&](std::size_t k) { return g.omega(k); });
    CHECK(std::abs(odd) < 1e-3 * 3.0e14);
}

TEST_CASE("grid construction rejects bad parameters") {
    CHECK_THROWS_AS(make_grid(816.70, 2.0e14, 2), ConfigError);
    CHECK_THROWS_AS(make_grid(816.70, 0.0, 64), ConfigError);
    CHECK_THROWS_AS(make_grid(816.70, -1.0, 64), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 2.0e14, 64), ConfigError);
    CHECK_THROWS_AS(make_grid(-5.0, 2.0e14, 64), ConfigError);
}

TEST_CASE("grid equality is field-wise") {
    const SpectralGrid a = make_grid(816.70, 2.0e14, 64);
    const SpectralGrid b = make_grid(816.70, 2.0e14, 64);
    const SpectralGrid c = make_grid(816.70, 2.0e14, 65);
    CHECK(a == b);
    CHECK(!(a == c));
}
