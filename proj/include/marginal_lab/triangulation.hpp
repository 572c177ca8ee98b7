#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "marginal_lab/vec.hpp"

namespace marginal_lab {

// Triangulation of the unit cube [0,1]^k produced by the recursive
// construction: triangulate every facet by the (k-1)-dimensional rule, then
// cone each facet simplex to the cube center. The base case is the plain
// edge. Vertex coordinates are stored in half-units (0, 1, 2 for 0, 1/2, 1),
// so the construction is exact integer combinatorics.
struct CubeTriangulation {
    int k = 0;
    std::vector<std::vector<std::int8_t>> vertices; // half-unit coords
    std::vector<std::vector<int>> simplices;        // k+1 vertex ids each
};

// 1 <= k <= 6. Simplex count satisfies s(1) = 1, s(k) = 2k s(k-1).
CubeTriangulation triangulate_cube(int k);

// The eps-cube lattice covering the ball of radius R+1, triangulated cell by
// cell, with the supplementary vertices the construction introduces. Cells
// are included when they intersect the open ball; sites landing outside the
// ball are retained so every simplex stays whole, and are flagged as pinned
// (piecewise-linear functions must vanish there). In one dimension each cell
// is split at its midpoint so sites live on the eps/2 grid there as well.
class SupplementedLattice {
public:
    int k() const { return k_; }
    double eps() const { return eps_; }
    double R() const { return R_; }

    int n_sites() const { return static_cast<int>(site_radius_.size()); }
    std::span<const double> site(int i) const {
        return {positions_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    double site_radius(int i) const { return site_radius_[i]; }
    bool pinned(int i) const { return pinned_[i]; }

    const std::vector<std::vector<int>>& simplices() const { return simplices_; }
    const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
    int max_adjacency_degree() const;

    // Sup-norm interpolation radius of the cell decomposition: every point of
    // a simplex is a vertex average at distance at most this from the point.
    double interp_radius() const { return (k_ == 1) ? eps_ / 4.0 : eps_ / 2.0; }

    // Barycentric decomposition of x in its containing simplex. Returns false
    // when x lies outside the covered cells (the function value there is 0).
    bool barycentric(std::span<const double> x, std::vector<std::pair<int, double>>& out) const;

    friend SupplementedLattice build_lattice(int k, double eps, double R, std::size_t max_sites);

private:
    int k_ = 0;
    double eps_ = 0.0;
    double R_ = 0.0;
    std::vector<double> positions_; // n_sites x k
    std::vector<double> site_radius_;
    std::vector<bool> pinned_;
    std::vector<std::vector<int>> simplices_;
    std::vector<std::vector<int>> adjacency_;
    CubeTriangulation cell_;

    struct CellKey {
        std::int64_t packed;
        bool operator==(const CellKey& o) const { return packed == o.packed; }
    };
    struct CellKeyHash {
        std::size_t operator()(const CellKey& c) const { return std::hash<std::int64_t>()(c.packed); }
    };
    std::int64_t pack_(std::span<const int> coords) const;
    std::vector<std::pair<std::int64_t, std::vector<int>>> cell_sites_sorted_; // packed cell -> site ids
    int find_cell_(std::span<const int> cell) const;
};

// 1 <= k <= 4. Throws capacity_error when the site count would exceed
// max_sites.
SupplementedLattice build_lattice(int k, double eps, double R, std::size_t max_sites = 2'000'000);

// Number of free values indexing the piecewise-linear class on this lattice.
int count_parameters(const SupplementedLattice& lattice);

// A piecewise-linear function given by one value per lattice site, with a
// declared bound on max(sup norm, Lipschitz constant). Construction checks
// the site values against the bound (sup, adjacent-pair slopes, zero outside
// the support ball).
class PLFunction {
public:
    PLFunction(std::shared_ptr<const SupplementedLattice> lattice, Vec values, double norm_bound);

    const SupplementedLattice& lattice() const { return *lattice_; }
    std::shared_ptr<const SupplementedLattice> lattice_ptr() const { return lattice_; }
    const Vec& values() const { return values_; }
    double norm_bound() const { return norm_bound_; }

    // Interpolated value at x; 0 outside the covered cells.
    double operator()(std::span<const double> x) const;

    double sup_value() const;
    // Exact Lipschitz constant: max gradient norm over simplices.
    double lipschitz_constant() const;

    // Text round-trip: header (k, eps, R), one line per site.
    void write_text(std::ostream& os) const;

private:
    std::shared_ptr<const SupplementedLattice> lattice_;
    Vec values_;
    double norm_bound_;
};

// Interpolant of g on the lattice sites: f(site) = g(site), pinned sites 0.
// For g with Lipschitz constant <= beta and support in the (R+1)-ball the
// sup error is at most beta * eps * sqrt(k) / 2.
PLFunction pl_approximate(const std::function<double(std::span<const double>)>& g, double beta,
                          std::shared_ptr<const SupplementedLattice> lattice);

// Multiply site values by the radial taper (1 inside radius R, linear to 0
// on [R, R+1], 0 outside). Doubles the declared norm bound.
PLFunction truncate_pl(const PLFunction& f, double R);

// Taper used by truncate_pl.
double radial_taper(double radius, double R);

} // namespace marginal_lab
