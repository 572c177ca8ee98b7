#include "marginal_lab/stiefel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "marginal_lab/errors.hpp"
#include "marginal_lab/io.hpp"

namespace marginal_lab {

StiefelFrame::StiefelFrame(int d, int k, std::vector<double> column_major)
    : d_(d), k_(k), data_(std::move(column_major)) {
    if (d <= 0 || k <= 0 || k > d)
        throw invalid_dimension_error("StiefelFrame: need 1 <= k <= d, got d=" + std::to_string(d) +
                                      " k=" + std::to_string(k));
    if (data_.size() != static_cast<std::size_t>(d) * k)
        throw invalid_dimension_error("StiefelFrame: data size mismatch");
    for (double x : data_)
        if (!std::isfinite(x)) throw invalid_dimension_error("StiefelFrame: non-finite entry");
}

double StiefelFrame::orthonormality_defect() const {
    double worst = 0.0;
    for (int i = 0; i < k_; ++i) {
        for (int j = i; j < k_; ++j) {
            const double g = dot(column(i), column(j));
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(g - target));
        }
    }
    return worst;
}

StiefelFrame haar_sample(int d, int k, Rng& rng) {
    if (k <= 0 || k > d)
        throw invalid_dimension_error("haar_sample: need 1 <= k <= d, got d=" + std::to_string(d) +
                                      " k=" + std::to_string(k));
    std::vector<double> cols(static_cast<std::size_t>(d) * k);
    rng.fill_normal(cols);

    auto col = [&](int j) { return std::span<double>(cols.data() + static_cast<std::size_t>(j) * d, d); };
    for (int j = 0; j < k; ++j) {
        auto v = col(j);
        // two passes of projection removal keep the Gram matrix at 1e-15 scale
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < j; ++i) {
                auto q = col(i);
                const double c = dot(v, q);
                for (int r = 0; r < d; ++r) v[r] -= c * q[r];
            }
        }
        const double n = norm2(v);
        // Gaussian columns are linearly independent almost surely; n > 0
        for (int r = 0; r < d; ++r) v[r] /= n;
    }
    return StiefelFrame(d, k, std::move(cols));
}

Vec project(const StiefelFrame& frame, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(frame.d()))
        throw invalid_dimension_error("project: vector length " + std::to_string(x.size()) +
                                      " != frame dimension " + std::to_string(frame.d()));
    Vec out(frame.k());
    for (int j = 0; j < frame.k(); ++j) out[j] = dot(x, frame.column(j));
    return out;
}

double frame_distance(const StiefelFrame& a, const StiefelFrame& b) {
    if (a.d() != b.d() || a.k() != b.k())
        throw invalid_dimension_error("frame_distance: shape mismatch");
    double s = 0.0;
    for (int j = 0; j < a.k(); ++j) s += dist_sq(a.column(j), b.column(j));
    return std::sqrt(s);
}

void write_frame_text(const StiefelFrame& frame, std::ostream& os) {
    os << frame.d() << ' ' << frame.k() << '\n';
    for (int r = 0; r < frame.d(); ++r) {
        for (int j = 0; j < frame.k(); ++j) {
            if (j) os << ' ';
            os << format_double(frame.column(j)[r]);
        }
        os << '\n';
    }
}

void write_frame_binary(const StiefelFrame& frame, std::ostream& os) {
    // row-major d x k, little-endian doubles (native on all supported targets)
    for (int r = 0; r < frame.d(); ++r) {
        for (int j = 0; j < frame.k(); ++j) {
            const double x = frame.column(j)[r];
            os.write(reinterpret_cast<const char*>(&x), sizeof(double));
        }
    }
}

StiefelFrame read_frame_text(std::istream& is) {
    int d = 0, k = 0;
    is >> d >> k;
    if (!is || d <= 0 || k <= 0) throw invalid_dimension_error("read_frame_text: bad header");
    std::vector<double> cols(static_cast<std::size_t>(d) * k);
    for (int r = 0; r < d; ++r)
        for (int j = 0; j < k; ++j)
            if (!(is >> cols[static_cast<std::size_t>(j) * d + r]))
                throw invalid_dimension_error("read_frame_text: truncated data");
    return StiefelFrame(d, k, std::move(cols));
}

} // namespace marginal_lab
