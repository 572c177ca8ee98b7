#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "marginal_lab/errors.hpp"
#include "marginal_lab/rng.hpp"
#include "marginal_lab/stiefel.hpp"

using namespace marginal_lab;

TEST_CASE("haar frames are orthonormal to 1e-10") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const StiefelFrame f = haar_sample(3, 3, rng);
        CHECK(f.orthonormality_defect() <= 1e-10);
    }
    for (int trial = 0; trial < 50; ++trial) {
        const StiefelFrame f = haar_sample(40, 7, rng);
        CHECK(f.orthonormality_defect() <= 1e-10);
    }
}

TEST_CASE("same seed gives the same frame") {
    Rng a(12345), b(12345);
    const StiefelFrame fa = haar_sample(5, 2, a);
    const StiefelFrame fb = haar_sample(5, 2, b);
    CHECK(frame_distance(fa, fb) == 0.0);
}

TEST_CASE("invalid dimensions are rejected") {
    Rng rng(0);
    CHECK_THROWS_AS(haar_sample(3, 4, rng), invalid_dimension_error);
    CHECK_THROWS_AS(haar_sample(3, 0, rng), invalid_dimension_error);
}

TEST_CASE("first-coordinate second moment matches 1/d") {
    // coordinates of a uniform direction are exchangeable and square-sum to
    // one, so E <theta_1, e_1>^2 = 1/d
    const int d = 50;
    const int n = 100000;
    Rng rng(777);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const StiefelFrame f = haar_sample(d, 1, rng);
        const double v = f.column(0)[0] * f.column(0)[0];
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0 / d) <= 4.0 * se);
}

TEST_CASE("projection extracts coordinates for a coordinate frame") {
    std::vector<double> cols(8, 0.0);
    cols[0] = 1.0; // e1
    cols[5] = 1.0; // e2
    const StiefelFrame f(4, 2, cols);
    const Vec p = project(f, std::vector<double>{3.0, -1.0, 7.0, 2.0});
    CHECK(p[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("projection of zero is zero and never expands norms") {
    Rng rng(5);
    const StiefelFrame f = haar_sample(12, 4, rng);
    const Vec zero = project(f, Vec(12, 0.0));
    for (double v : zero) CHECK(v == 0.0);

    for (int trial = 0; trial < 200; ++trial) {
        Vec x(12);
        rng.fill_normal(x);
        const Vec p = project(f, x);
        CHECK(norm2(p) <= norm2(x) + 1e-10);
    }
}

TEST_CASE("projection is linear in x") {
    Rng rng(6);
    const StiefelFrame f = haar_sample(9, 3, rng);
    Vec x(9), y(9);
    rng.fill_normal(x);
    rng.fill_normal(y);
    const double a = 2.25, b = -0.75;
    Vec combo(9);
    for (int i = 0; i < 9; ++i) combo[i] = a * x[i] + b * y[i];
    const Vec px = project(f, x), py = project(f, y), pc = project(f, combo);
    for (int j = 0; j < 3; ++j)
        CHECK(pc[j] == doctest::Approx(a * px[j] + b * py[j]).epsilon(1e-12));
}

TEST_CASE("projection rejects mismatched lengths") {
    Rng rng(2);
    const StiefelFrame f = haar_sample(6, 2, rng);
    CHECK_THROWS_AS(project(f, Vec(5, 0.0)), invalid_dimension_error);
}

TEST_CASE("frame distance: identity, basis vectors, triangle inequality") {
    Rng rng(9);
    const StiefelFrame a = haar_sample(7, 3, rng);
    CHECK(frame_distance(a, a) == 0.0);

    const StiefelFrame e1(2, 1, {1.0, 0.0});
    const StiefelFrame e2(2, 1, {0.0, 1.0});
    CHECK(frame_distance(e1, e2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    for (int trial = 0; trial < 50; ++trial) {
        const StiefelFrame x = haar_sample(6, 2, rng);
        const StiefelFrame y = haar_sample(6, 2, rng);
        const StiefelFrame z = haar_sample(6, 2, rng);
        CHECK(frame_distance(x, z) <= frame_distance(x, y) + frame_distance(y, z) + 1e-10);
    }

    const StiefelFrame wrong = haar_sample(6, 3, rng);
    const StiefelFrame base = haar_sample(6, 2, rng);
    CHECK_THROWS_AS(frame_distance(base, wrong), invalid_dimension_error);
}

TEST_CASE("haar law is rotation invariant for a fixed test statistic") {
    // compare <theta_1, u> moments between plain draws and draws rotated by
    // a fixed signed permutation
    const int d = 8, n = 20000;
    Rng rng(31);
    Vec u(d, 0.0);
    u[0] = 0.6;
    u[3] = 0.8;

    double m1a = 0.0, m2a = 0.0, m1b = 0.0, m2b = 0.0;
    for (int i = 0; i < n; ++i) {
        const StiefelFrame f = haar_sample(d, 2, rng);
        const double t = dot(f.column(0), u);
        m1a += t;
        m2a += t * t;
    }
    for (int i = 0; i < n; ++i) {
        const StiefelFrame f = haar_sample(d, 2, rng);
        // rotated frame: coordinates permuted cyclically, first coordinate negated
        Vec col(d);
        for (int r = 0; r < d; ++r) col[r] = f.column(0)[(r + 1) % d];
        col[0] = -col[0];
        const double t = dot(col, u);
        m1b += t;
        m2b += t * t;
    }
    m1a /= n;
    m1b /= n;
    m2a /= n;
    m2b /= n;
    // sd of t is about 1/sqrt(d); 4 two-sample standard errors
    const double se1 = 4.0 * std::sqrt(2.0 / (d * static_cast<double>(n)));
    CHECK(std::abs(m1a - m1b) <= se1);
    const double se2 = 4.0 * std::sqrt(2.0) * std::sqrt(2.0 / static_cast<double>(n)) / d;
    CHECK(std::abs(m2a - m2b) <= 4.0 * se2 + 1e-3);
}

TEST_CASE("text round trip preserves the frame") {
    Rng rng(44);
    const StiefelFrame f = haar_sample(6, 3, rng);
    std::stringstream ss;
    write_frame_text(f, ss);
    const StiefelFrame g = read_frame_text(ss);
    CHECK(frame_distance(f, g) == 0.0);
}

TEST_CASE("binary serialization is row-major little-endian doubles") {
    Rng rng(45);
    const StiefelFrame f = haar_sample(3, 2, rng);
    std::stringstream ss;
    write_frame_binary(f, ss);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 6 * sizeof(double));
    double first;
    std::memcpy(&first, bytes.data(), sizeof(double));
    CHECK(first == f.column(0)[0]);
    double second;
    std::memcpy(&second, bytes.data() + sizeof(double), sizeof(double));
    CHECK(second == f.column(1)[0]);
}
