#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "marginal_lab/bl_distance.hpp"
#include "marginal_lab/errors.hpp"
#include "oracles.hpp"

using namespace marginal_lab;

TEST_CASE("gaussian tail mass matches the chi-square oracle") {
    for (int k = 1; k <= 3; ++k) {
        for (double R : {1.0, 2.5, 4.0}) {
            const double mine = gaussian_tail_mass(k, R, 1.0);
            const double ref = 1.0 - oracle::chi_square_cdf(k, R * R);
            CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
        }
    }
    // scale folds into the radius
    CHECK(gaussian_tail_mass(2, 3.0, 1.5) == doctest::Approx(gaussian_tail_mass(2, 2.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian integral of the unit hat") {
    auto lat = std::make_shared<const SupplementedLattice>(build_lattice(1, 0.05, 3.0));
    const auto hat = [](std::span<const double> x) { return std::max(0.0, 1.0 - std::abs(x[0])); };
    const PLFunction f = pl_approximate(hat, 1.0, lat);
    Rng rng(7);
    const auto [est, err] = gaussian_integral_pl(f, 1.0, 200000, rng);
    const double expect = oracle::expected_unit_tent();
    CHECK(std::abs(est - expect) <= err + 0.01); // hat vs its fine interpolant
    CHECK(std::abs(est) <= f.norm_bound());

    Vec zeros(lat->n_sites(), 0.0);
    const PLFunction z(lat, zeros, 1.0);
    Rng rng2(8);
    const auto [zest, zerr] = gaussian_integral_pl(z, 1.0, 2000, rng2);
    CHECK(zest == 0.0);
    CHECK(zerr <= 1e-12);
    CHECK_THROWS_AS(gaussian_integral_pl(z, 1.0, 10, rng2), insufficient_sample_error);
}

TEST_CASE("certificate for a point mass brackets the dense-grid value") {
    const EmpiricalMeasure mu(1, {0.0}, Vec{1.0});
    Rng rng(42);
    const BLCertificate cert = bl_certified(mu, 1.0, 4.0, 0.1, 1.0, 10000, rng);
    const double oracle_value = oracle::delta0_gaussian_grid(1.0, 200000);
    CHECK(cert.lower - 1e-9 <= oracle_value);
    CHECK(oracle_value <= cert.upper + 1e-9);
    // in one dimension the lower bound is the norm-1 optimum itself, which
    // the distance-to-the-data witness attains up to the pinned shell
    CHECK(cert.lower >= oracle_value - 0.01);
    CHECK(cert.quadrature_error == 0.0);
    CHECK(cert.value == doctest::Approx(2.0 * cert.lower).epsilon(1e-6));
}

TEST_CASE("certificate on a gaussian sample shrinks with sample size") {
    Rng rng(43);
    std::vector<double> pts(10000);
    rng.fill_normal(pts);
    const EmpiricalMeasure mu = EmpiricalMeasure::uniform(1, std::move(pts));
    Rng rng2(44);
    const BLCertificate cert = bl_certified(mu, 1.0, 4.0, 0.1, 1.1, 10000, rng2);
    CHECK(cert.upper <= 0.2);
    CHECK(cert.lower >= 0.0);
    CHECK(cert.lower <= cert.upper);

    // smaller sample: looser value, still a valid bracket
    std::vector<double> few(200);
    Rng rng3(45);
    rng3.fill_normal(few);
    const EmpiricalMeasure mu2 = EmpiricalMeasure::uniform(1, std::move(few));
    const BLCertificate c2 = bl_certified(mu2, 1.0, 4.0, 0.1, 1.3, 10000, rng3);
    CHECK(c2.value >= cert.value);
}

TEST_CASE("certificate error terms follow the construction") {
    const EmpiricalMeasure mu(1, {0.0}, Vec{1.0});
    Rng rng(46);
    const BLCertificate a = bl_certified(mu, 1.0, 4.0, 0.2, 1.0, 10000, rng);
    Rng rng2(46);
    const BLCertificate b = bl_certified(mu, 1.0, 4.0, 0.1, 1.0, 10000, rng2);
    // halving eps halves the pl term
    CHECK(b.pl_error == doctest::Approx(0.5 * a.pl_error).epsilon(1e-12));
    // upper = value + truncation + pl + 2 quadrature (below the metric diameter)
    CHECK(a.upper ==
          doctest::Approx(a.value + a.truncation_error + a.pl_error + 2.0 * a.quadrature_error)
              .epsilon(1e-12));
    CHECK(a.lower >= 0.0);
    CHECK(a.upper <= 2.0);
}

TEST_CASE("two dimensional certificate brackets a planted instance") {
    // product sample of a 2-d standard gaussian; truth is near zero
    Rng rng(47);
    std::vector<double> pts(2 * 4000);
    rng.fill_normal(pts);
    const EmpiricalMeasure mu = EmpiricalMeasure::uniform(2, std::move(pts));
    Rng rng2(48);
    const BLCertificate cert = bl_certified(mu, 1.0, 3.0, 0.5, 1.2, 20000, rng2);
    CHECK(cert.lower >= 0.0);
    CHECK(cert.lower <= 0.1);
    CHECK(cert.upper >= cert.lower);
    CHECK(cert.quadrature_error > 0.0);

    // a far point mass in two dimensions is at distance near the diameter
    const EmpiricalMeasure far(2, {40.0, 0.0}, Vec{1.0});
    Rng rng3(49);
    const BLCertificate fc = bl_certified(far, 1.0, 3.0, 0.5, 800.0, 20000, rng3);
    CHECK(fc.lower >= 0.8); // most gaussian mass is far from the atom
    CHECK(fc.upper <= 2.0);
}

TEST_CASE("certificate input validation") {
    const EmpiricalMeasure mu(1, {0.0}, Vec{1.0});
    Rng rng(50);
    CHECK_THROWS(bl_certified(mu, 1.0, 4.0, 0.1, -1.0, 10000, rng)); // negative bound
    const EmpiricalMeasure mu4(4, {0.0, 0.0, 0.0, 0.0}, Vec{1.0});
    CHECK_THROWS_AS(bl_certified(mu4, 1.0, 2.0, 0.5, 1.0, 10000, rng), dimension_limit_error);
    // B_mu below the sample's second moment is rejected
    const EmpiricalMeasure wide(1, {3.0}, Vec{1.0});
    CHECK_THROWS(bl_certified(wide, 1.0, 4.0, 0.1, 1.0, 10000, rng));
}

TEST_CASE("certificate json carries every field") {
    BLCertificate c;
    c.value = 0.5;
    c.lower = 0.25;
    c.upper = 0.9;
    c.truncation_error = 0.1;
    c.pl_error = 0.2;
    c.quadrature_error = 0.05;
    const std::string j = c.to_json();
    for (const char* key : {"value", "lower", "upper", "truncation_error", "pl_error", "quadrature_error"})
        CHECK(j.find(key) != std::string::npos);
}
