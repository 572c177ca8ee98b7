#pragma once

#include <stdexcept>
#include <string>

namespace marginal_lab {

// Argument shapes do not match (vector length vs frame dimension, k > d, ...).
struct invalid_dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A size guard was exceeded (LP support cap, lattice memory cap).
struct capacity_error : std::length_error {
    using std::length_error::length_error;
};

// Combinatorial dimension guard (triangulation/lattice k limits).
struct dimension_limit_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct insufficient_sample_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace marginal_lab
