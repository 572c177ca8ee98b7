#include "marginal_lab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace marginal_lab {

double annealed_bound(double sigma, int d, int k, double A) {
    if (d < 2) throw std::domain_error("annealed_bound: d must be >= 2");
    if (k < 1 || A < 0.0 || sigma <= 0.0) throw std::domain_error("annealed_bound: bad arguments");
    return sigma * (std::sqrt(static_cast<double>(k)) * (A + 1.0) + k) / (d - 1.0);
}

double concentration_tail(int d, double B, double eps, const BoundConstants& constants) {
    if (d < 1 || B <= 0.0 || eps < 0.0) throw std::domain_error("concentration_tail: bad arguments");
    return constants.C * std::exp(-constants.c * d * eps * eps / B);
}

std::pair<double, double> conditional_bound(int d, int k, double A, double B, double sigma,
                                            const BoundConstants& constants) {
    if (d < 2 || k < 1 || B <= 0.0) throw std::domain_error("conditional_bound: bad arguments");
    const double kd = static_cast<double>(k);
    const double logd = std::log(static_cast<double>(d));
    const double main_term = (kd * B + B * logd) * std::pow(B, 2.0 / (9.0 * kd + 12.0)) /
                             (std::pow(kd * B, 2.0 / 3.0) * std::pow(static_cast<double>(d), 2.0 / (3.0 * kd + 4.0)));
    const double full = constants.C * (main_term + annealed_bound(sigma, d, k, A));
    const double simplified =
        constants.C * (kd + logd) / (std::pow(kd, 2.0 / 3.0) * std::pow(static_cast<double>(d), 2.0 / (3.0 * kd + 4.0)));
    return {full, simplified};
}

double corollary_epsilon(int d, double delta, const BoundConstants& constants) {
    if (d < 16 || delta <= 0.0) throw std::domain_error("corollary_epsilon: need d >= 16, delta > 0");
    return 2.0 * std::exp(-constants.c * std::log(std::log(static_cast<double>(d))) / delta);
}

double critical_k(double d, double coefficient) {
    // log(log(d)) must be positive
    if (d <= std::exp(1.0) + 1e-9) throw std::domain_error("critical_k: need d > e");
    return coefficient * std::log(d) / std::log(std::log(d));
}

std::pair<double, double> unit_ball_volume(double k) {
    if (k < 1.0) throw std::domain_error("unit_ball_volume: need k >= 1");
    const double exact = std::exp(0.5 * k * std::log(M_PI) - std::lgamma(0.5 * k + 1.0));
    // Stirling form whose ratio to the exact volume tends to one
    const double asymptotic = (1.0 / std::sqrt(k * M_PI)) * std::pow(2.0 * M_PI * M_E / k, 0.5 * k);
    return {exact, asymptotic};
}

double sharpness_gaussian_bound(double d, double k) {
    if (d < 1.0 || k < 1.0) throw std::domain_error("sharpness_gaussian_bound: bad arguments");
    return 2.0 * std::sqrt(2.0) * d / std::sqrt(k * M_PI) * std::pow(M_E / k, 0.5 * k);
}

double entropy_number_bound(int n, double M, double B, double d) {
    if (n < 0 || M < 1.0 || B <= 0.0 || d < 1.0) throw std::domain_error("entropy_number_bound: bad arguments");
    return 24.0 * std::sqrt(B) / std::sqrt(d) * std::exp2(-std::exp2(static_cast<double>(n)) / M);
}

double dudley_sum(double M, double B, double d, const BoundConstants& constants, int n_max) {
    if (M < 1.0 || B <= 0.0 || d < 1.0) throw std::domain_error("dudley_sum: bad arguments");
    double sum = 0.0;
    const int hard_cap = std::max(n_max, 128);
    for (int n = 0; n <= hard_cap; ++n) {
        const double term = std::exp2(0.5 * n) * entropy_number_bound(n, M, B, d);
        sum += term;
        // the summand decays doubly exponentially once 2^n passes M
        if (n > 4 && term < 1e-12 * sum) break;
    }
    return constants.L * sum;
}

double choose_R(double d, int k, double B, const BoundConstants& constants) {
    if (d < 2.0 || k < 1 || B <= 0.0) throw std::domain_error("choose_R: bad arguments");
    const double kd = static_cast<double>(k);
    return constants.c * std::pow(d, 1.0 / (3.0 * kd + 4.0)) *
           std::pow(kd, (2.0 * kd + 1.0) / (6.0 * kd + 8.0)) * std::pow(B, (kd + 1.0) / (3.0 * kd + 4.0));
}

double lattice_m_bound(double R, double eps, int k, const BoundConstants& constants) {
    if (R <= 0.0 || eps <= 0.0 || k < 1) throw std::domain_error("lattice_m_bound: bad arguments");
    const double kd = static_cast<double>(k);
    return constants.c / std::sqrt(kd) * std::pow(constants.c_prime * R / (eps * std::sqrt(kd)), kd);
}

} // namespace marginal_lab
