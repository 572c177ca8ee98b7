#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "marginal_lab/rng.hpp"
#include "marginal_lab/vec.hpp"

namespace marginal_lab {

// An orthonormal k-frame in R^d. Columns are stored contiguously
// (column-major d x k). Immutable after construction; safe to share
// across threads.
class StiefelFrame {
public:
    StiefelFrame(int d, int k, std::vector<double> column_major);

    int d() const { return d_; }
    int k() const { return k_; }

    std::span<const double> column(int j) const {
        return {data_.data() + static_cast<std::size_t>(j) * d_, static_cast<std::size_t>(d_)};
    }
    std::span<const double> data() const { return data_; }

    // Max deviation of <c_i, c_j> from delta_ij.
    double orthonormality_defect() const;

private:
    int d_;
    int k_;
    std::vector<double> data_;
};

// Haar-distributed frame: Gaussian d x k matrix orthonormalized by modified
// Gram-Schmidt with a re-orthogonalization pass. The triangular factor's
// diagonal is positive by construction, which makes the law exactly Haar.
StiefelFrame haar_sample(int d, int k, Rng& rng);

// (<x, c_1>, ..., <x, c_k>)
Vec project(const StiefelFrame& frame, std::span<const double> x);

// rho(a, b) = sqrt(sum_j |a_j - b_j|^2) over columns
double frame_distance(const StiefelFrame& a, const StiefelFrame& b);

// Flat serialization, row-major d x k. Text is one row per line with
// 17-significant-digit floats; binary is little-endian 64-bit floats.
void write_frame_text(const StiefelFrame& frame, std::ostream& os);
void write_frame_binary(const StiefelFrame& frame, std::ostream& os);
StiefelFrame read_frame_text(std::istream& is);

} // namespace marginal_lab
