#pragma once

#include <utility>

namespace marginal_lab {

// Universal constants left unspecified by the theory; every evaluator takes
// them explicitly so sensitivity runs can rescale without recompiling.
struct BoundConstants {
    double c = 1.0;
    double C = 1.0;
    double L = 1.0;
    double c_prime = 1.0;
};

// sigma * (sqrt(k)(A+1) + k) / (d - 1): distance of the annealed projection
// from the Gaussian of matching scale.
double annealed_bound(double sigma, int d, int k, double A);

// C * exp(-c d eps^2 / B): Haar-measure tail for the deviation of the
// conditional distance from its mean.
double concentration_tail(int d, double B, double eps, const BoundConstants& constants = {});

// Expected conditional distance, {full form, simplified form}. The
// simplified form assumes B = 1 and A = O(sqrt(d)).
std::pair<double, double> conditional_bound(int d, int k, double A, double B, double sigma,
                                            const BoundConstants& constants = {});

// 2 exp(-c log(log d) / delta)
double corollary_epsilon(int d, double delta, const BoundConstants& constants = {});

// coefficient * log(d) / log(log(d)): the dimension scale separating the
// near-Gaussian regime from the regime where the cross-polytope witness wins.
double critical_k(double d, double coefficient);

// Volume of the unit ball in R^k: {exact pi^{k/2}/Gamma(k/2+1), large-k
// asymptotic (1/sqrt(k pi)) (2 pi e / k)^{k/2}}.
std::pair<double, double> unit_ball_volume(double k);

// (2 sqrt(2) d / sqrt(k pi)) (e/k)^{k/2}: upper bound on the Gaussian mass of
// the unit neighborhood of the 2d projected cross-polytope vertices.
double sharpness_gaussian_bound(double d, double k);

// (24 sqrt(B)/sqrt(d)) 2^{-2^n / M}
double entropy_number_bound(int n, double M, double B, double d);

// L * sum_n 2^{n/2} e_n with the entropy-number bound above. The sum is
// extended automatically until the next term is below 1e-12 of the total.
double dudley_sum(double M, double B, double d, const BoundConstants& constants = {}, int n_max = 64);

// c * d^{1/(3k+4)} k^{(2k+1)/(6k+8)} B^{(k+1)/(3k+4)}
double choose_R(double d, int k, double B, const BoundConstants& constants = {});

// (c/sqrt(k)) (c' R / (eps sqrt(k)))^k: parameter count of the lattice
// function class.
double lattice_m_bound(double R, double eps, int k, const BoundConstants& constants = {});

} // namespace marginal_lab
