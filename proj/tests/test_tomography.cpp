#include "catch_amalgamated.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "biphoton/tomography.hpp"
#include "test_helpers.hpp"

using namespace biphoton;

TEST_CASE("the projective sequence is the fixed sixteen-setting order") {
    const auto& settings = canonical_settings();
    REQUIRE(settings.size() == 16);
    const char* expected[16] = {"HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
                                "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"};
    for (int i = 0; i < 16; ++i) {
        CHECK(settings[i].id == i + 1);
        CHECK(settings[i].arm1 == expected[i][0]);
        CHECK(settings[i].arm2 == expected[i][1]);
        CHECK(settings[i].ket.norm() == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("analyzer kets match their textbook definitions") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(analyzer_ket('H')(0) == Complex(1, 0));
    CHECK(analyzer_ket('V')(1) == Complex(1, 0));
    CHECK(std::abs(analyzer_ket('D')(0) - Complex(s, 0)) < 1e-15);
    CHECK(std::abs(analyzer_ket('A')(1) - Complex(-s, 0)) < 1e-15);
    CHECK(std::abs(analyzer_ket('R')(1) - Complex(0, -s)) < 1e-15);
    CHECK(std::abs(analyzer_ket('L')(1) - Complex(0, s)) < 1e-15);
    CHECK_THROWS_AS(analyzer_ket('X'), std::invalid_argument);
    // spot-check a product ket: (D, R) -> (1, -i, 1, -i)/2
    const auto& dr = canonical_settings()[8];
    REQUIRE(dr.arm1 == 'D');
    REQUIRE(dr.arm2 == 'R');
    CHECK(std::abs(dr.ket(0) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(dr.ket(1) - Complex(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(dr.ket(2) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(dr.ket(3) - Complex(0.0, -0.5)) < 1e-15);
}

TEST_CASE("the sixteen projectors span the full operator space") {
    Eigen::MatrixXcd design(16, 16);
    const auto& settings = canonical_settings();
    for (int r = 0; r < 16; ++r) {
        const Eigen::Matrix4cd proj = settings[r].ket * settings[r].ket.adjoint();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) design(r, 4 * i + j) = proj(i, j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(design);
    CHECK(svd.singularValues()(15) > 1e-3); // tomographically complete
}

TEST_CASE("projector probabilities match analytic Bell-state values") {
    const TwoQubitDensityMatrix bell = testutil::bell_phi_plus();
    const auto& settings = canonical_settings();
    const auto p = [&](int id) { return setting_probability(bell, settings[id - 1]); };
    CHECK(p(1) == Catch::Approx(0.5).margin(1e-12));  // (H,H)
    CHECK(p(2) == Catch::Approx(0.0).margin(1e-12));  // (H,V)
    CHECK(p(3) == Catch::Approx(0.5).margin(1e-12));  // (V,V)
    CHECK(p(5) == Catch::Approx(0.25).margin(1e-12)); // (R,H)
    CHECK(p(10) == Catch::Approx(0.5).margin(1e-12)); // (D,D)
    CHECK(p(16) == Catch::Approx(0.5).margin(1e-12)); // (R,L)
    double total_hv_basis = p(1) + p(2) + p(3) + p(4);
    CHECK(total_hv_basis == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("simulated counts are deterministic and carry the accidental mean") {
    const TwoQubitDensityMatrix rho = testutil::werner(0.9);
    const auto a = simulate_counts(rho, canonical_settings(), 100.0, 0.25, 60.0, 99);
    const auto b = simulate_counts(rho, canonical_settings(), 100.0, 0.25, 60.0, 99);
    const auto c = simulate_counts(rho, canonical_settings(), 100.0, 0.25, 60.0, 100);
    REQUIRE(a.size() == 16);
    bool any_diff = false;
    for (int i = 0; i < 16; ++i) {
        CHECK(a[i].counts == b[i].counts);
        CHECK(a[i].setting_id == i + 1);
        CHECK(a[i].accidentals == Catch::Approx(0.25 * 60.0));
        CHECK(a[i].time_s == 60.0);
        any_diff |= a[i].counts != c[i].counts;
    }
    CHECK(any_diff);
}

TEST_CASE("high-flux counts concentrate on the projective means") {
    const TwoQubitDensityMatrix rho = testutil::werner(0.9);
    const double flux = 1e6, time_s = 1.0;
    const auto records = simulate_counts(rho, canonical_settings(), flux, 0.0, time_s, 7);
    const auto& settings = canonical_settings();
    for (int i = 0; i < 16; ++i) {
        const double mean = flux * time_s * setting_probability(rho, settings[i]);
        CHECK(std::abs(records[i].counts - mean) <= 5.0 * std::sqrt(mean + 1.0) + 1.0);
    }
}

TEST_CASE("count simulation rejects invalid inputs") {
    const TwoQubitDensityMatrix rho = testutil::bell_phi_plus();
    CHECK_THROWS_AS(simulate_counts(rho, canonical_settings(), 0.0, 0.0, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_counts(rho, canonical_settings(), 10.0, -1.0, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_counts(rho, canonical_settings(), 10.0, 0.0, 0.0, 1),
                    std::invalid_argument);
}
