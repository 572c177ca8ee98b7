#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "marginal_lab/rng.hpp"
#include "marginal_lab/triangulation.hpp"
#include "marginal_lab/vec.hpp"

namespace marginal_lab {

// A weighted point cloud in R^k with nonnegative weights summing to one.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(int k, std::vector<double> points_flat, Vec weights);

    static EmpiricalMeasure uniform(int k, std::vector<double> points_flat);

    int k() const { return k_; }
    int n() const { return static_cast<int>(weights_.size()); }
    std::span<const double> point(int i) const {
        return {points_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    const Vec& weights() const { return weights_; }

    // CSV: first line is k, then one row per point (k coordinates, weight).
    void write_csv(std::ostream& os) const;
    static EmpiricalMeasure read_csv(std::istream& is);

private:
    int k_;
    std::vector<double> points_;
    Vec weights_;
};

struct BlOptions {
    int support_cap = 2000; // combined distinct support size
};

// Exact bounded-Lipschitz distance between two finitely supported measures:
// the optimum of  max sum (mu_i - nu_i) f_i  over |f_i| <= 1 and
// |f_i - f_j| <= |x_i - x_j|. Solved through its mass-transport dual
// (shipping at Euclidean cost, creation/destruction at unit cost).
double bl_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const BlOptions& options = {});

struct BlEstimate {
    double estimate = 0.0; // distance of the sample to a fresh Gaussian cloud
    double baseline = 0.0; // distance between two fresh Gaussian clouds
    double corrected() const { return std::max(0.0, estimate - baseline); }
};

// Empirical distance of `sample` to sigma Z from m Gaussian draws, plus the
// pure-sampling-noise floor measured on two independent Gaussian clouds of
// the same sizes. The support cap defaults to whatever the instance needs.
BlEstimate bl_empirical_gaussian(const EmpiricalMeasure& sample, double sigma, int m, Rng& rng,
                                 int support_cap = 0);

// Monte-Carlo integral of f against the centered Gaussian of scale sigma,
// with the 4 sigma / sqrt(n) error bound.
std::pair<double, double> gaussian_integral_pl(const PLFunction& f, double sigma, int n_mc, Rng& rng);

struct BLCertificate {
    double value = 0.0;             // lattice LP optimum over the norm-2 class
    double lower = 0.0;             // certified lower bound on d_BL
    double upper = 0.0;             // certified upper bound on d_BL
    double truncation_error = 0.0;  // mass beyond radius R (both measures)
    double pl_error = 0.0;          // piecewise-linear approximation term
    double quadrature_error = 0.0;  // Gaussian-integral error bound

    std::string to_json() const;
};

// Certified bracket on d_BL(mu, sigma Z) via the lattice LP on the
// (k, eps, R) lattice. In one dimension the Gaussian integrals are exact and
// the quadrature term vanishes; in higher dimension they are Monte Carlo
// with n_mc draws. B_mu bounds mu's mean second moment per direction.
BLCertificate bl_certified(const EmpiricalMeasure& mu, double sigma, double R, double eps_lattice,
                           double B_mu, int n_mc, Rng& rng);

struct WitnessBound {
    double lower_bound = 0.0; // 1 - mean f(sigma Z) - 4 se
    double mc_error = 0.0;    // the 4 se term
};

// Lower bound on d_BL(uniform on S, sigma Z) from the witness
// f(x) = (1 - dist(x, S))_+, whose integral against uniform-on-S is exactly
// one. points_flat is |S| x k row-major.
WitnessBound witness_lower_bound(std::span<const double> points_flat, int k, double sigma, int n_mc,
                                 Rng& rng);

// Exact Gaussian mass outside the ball of radius R (k <= 3).
double gaussian_tail_mass(int k, double R, double sigma);

} // namespace marginal_lab
