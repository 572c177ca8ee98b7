#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "marginal_lab/rng.hpp"
#include "marginal_lab/vec.hpp"

namespace marginal_lab {

// A moment parameter that is either analytically exact or a Monte-Carlo
// estimate carrying its standard error.
struct MomentValue {
    double value = 0.0;
    bool exact = true;
    double std_error = 0.0;
};

// A samplable centered distribution on R^d with moment metadata:
//   sigma2:  E|X|^2 = sigma2 * d
//   A:       E| |X|^2 / sigma2 - d |
//   B:       sup over unit xi of E<X, xi>^2
// Samplers are pure given the rng stream; sources are immutable values.
class VectorSource {
public:
    using Sampler = std::function<void(Rng&, std::span<double>)>;

    VectorSource(int d, std::string name, double sigma2, MomentValue A, MomentValue B, Sampler sampler)
        : d_(d), name_(std::move(name)), sigma2_(sigma2), A_(A), B_(B), sampler_(std::move(sampler)) {}

    int d() const { return d_; }
    const std::string& name() const { return name_; }
    double sigma2() const { return sigma2_; }
    double sigma() const { return std::sqrt(sigma2_); }
    const MomentValue& A() const { return A_; }
    const MomentValue& B() const { return B_; }

    Vec sample(Rng& rng) const {
        Vec x(d_);
        sampler_(rng, x);
        return x;
    }
    void sample_into(Rng& rng, std::span<double> out) const { sampler_(rng, out); }

private:
    int d_;
    std::string name_;
    double sigma2_;
    MomentValue A_;
    MomentValue B_;
    Sampler sampler_;
};

// Uniform on {+-sqrt(d) e_1, ..., +-sqrt(d) e_d}. sigma2 = 1, A = 0, B = 1.
VectorSource make_cross_polytope(int d);

// Standard normal on R^d. sigma2 = 1, B = 1; A is a Monte-Carlo estimate of
// E|chi2_d - d| (fixed internal seed, so the value is deterministic).
VectorSource make_gaussian(int d);

// Uniform on the sphere of radius sqrt(d). sigma2 = 1, A = 0, B = 1.
VectorSource make_sphere(int d);

// Uniform on the isotropic dilate r B_1^d with r = sqrt((d+1)(d+2)/2), which
// makes the covariance the identity. A is a Monte-Carlo estimate.
VectorSource make_l1_ball(int d);

// Uniform on {-1, +1}^d. sigma2 = 1, A = 0, B = 1.
VectorSource make_cube(int d);

// CLI name -> source. Names: cross-polytope | gaussian | sphere | l1-ball | cube.
VectorSource make_source(const std::string& name, int d);

// l1-ball isotropic radius, exposed for tests.
double l1_ball_radius(int d);

struct MomentEstimate {
    double sigma2 = 0.0;
    double sigma2_std_error = 0.0;
    double A = 0.0;
    double A_std_error = 0.0;
    double B = 0.0;
};

// sigma2_hat = mean|X|^2/d, A_hat = mean| |X|^2/sigma2_hat - d |, B_hat = top
// eigenvalue of the empirical second-moment matrix by power iteration
// (relative tolerance 1e-8, matrix never formed).
MomentEstimate estimate_moments(const VectorSource& source, int n, Rng& rng);

// One row per draw, 17-significant-digit floats.
void export_samples_csv(const VectorSource& source, int n, Rng& rng, std::ostream& os);

} // namespace marginal_lab
