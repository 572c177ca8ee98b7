#include "marginal_lab/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include "marginal_lab/errors.hpp"
#include "marginal_lab/io.hpp"

namespace marginal_lab {

namespace {

using HalfCoord = std::vector<std::int8_t>;

int vertex_id(std::map<HalfCoord, int>& index, std::vector<HalfCoord>& vertices, const HalfCoord& v) {
    auto it = index.find(v);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(v);
    index.emplace(v, id);
    return id;
}

} // namespace

CubeTriangulation triangulate_cube(int k) {
    if (k < 1 || k > 6)
        throw dimension_limit_error("triangulate_cube: need 1 <= k <= 6, got k=" + std::to_string(k));

    CubeTriangulation tri;
    tri.k = k;
    std::map<HalfCoord, int> index;
    std::vector<HalfCoord> vertices;

    if (k == 1) {
        const int a = vertex_id(index, vertices, {0});
        const int b = vertex_id(index, vertices, {2});
        tri.simplices.push_back({a, b});
        tri.vertices = std::move(vertices);
        return tri;
    }

    const CubeTriangulation facet = triangulate_cube(k - 1);
    const int center = vertex_id(index, vertices, HalfCoord(static_cast<std::size_t>(k), 1));
    for (int axis = 0; axis < k; ++axis) {
        for (int side = 0; side <= 2; side += 2) {
            // embed the facet construction: fixed coordinate at `axis`, the
            // remaining axes keep their order
            std::vector<int> embedded(facet.vertices.size());
            for (std::size_t v = 0; v < facet.vertices.size(); ++v) {
                HalfCoord full(static_cast<std::size_t>(k));
                int src = 0;
                for (int a = 0; a < k; ++a) {
                    full[a] = (a == axis) ? static_cast<std::int8_t>(side) : facet.vertices[v][src++];
                }
                embedded[v] = vertex_id(index, vertices, full);
            }
            for (const auto& s : facet.simplices) {
                std::vector<int> cone;
                cone.reserve(s.size() + 1);
                for (int v : s) cone.push_back(embedded[v]);
                cone.push_back(center);
                tri.simplices.push_back(std::move(cone));
            }
        }
    }
    tri.vertices = std::move(vertices);
    return tri;
}

// ---------------------------------------------------------------------------

std::int64_t SupplementedLattice::pack_(std::span<const int> coords) const {
    std::int64_t key = 0;
    for (int c : coords) {
        if (c < -30000 || c > 30000) throw capacity_error("lattice coordinate out of packing range");
        key = (key << 16) | static_cast<std::int64_t>(c + 32768);
    }
    return key;
}

int SupplementedLattice::find_cell_(std::span<const int> cell) const {
    const std::int64_t key = pack_(cell);
    auto it = std::lower_bound(cell_sites_sorted_.begin(), cell_sites_sorted_.end(), key,
                               [](const auto& a, std::int64_t b) { return a.first < b; });
    if (it == cell_sites_sorted_.end() || it->first != key) return -1;
    return static_cast<int>(it - cell_sites_sorted_.begin());
}

SupplementedLattice build_lattice(int k, double eps, double R, std::size_t max_sites) {
    if (k < 1 || k > 4)
        throw dimension_limit_error("build_lattice: need 1 <= k <= 4, got k=" + std::to_string(k));
    if (eps <= 0.0 || R <= 0.0) throw std::invalid_argument("build_lattice: need eps > 0, R > 0");

    SupplementedLattice lat;
    lat.k_ = k;
    lat.eps_ = eps;
    lat.R_ = R;

    // cell triangulation in half-unit coordinates; in 1-d the cell is split
    // at its midpoint so supplements exist there too
    if (k == 1) {
        lat.cell_.k = 1;
        lat.cell_.vertices = {{0}, {1}, {2}};
        lat.cell_.simplices = {{0, 1}, {1, 2}};
    } else {
        lat.cell_ = triangulate_cube(k);
    }

    const double reach = R + 1.0;
    const int j_lo = static_cast<int>(std::floor(-reach / eps)) - 1;
    const int j_hi = static_cast<int>(std::ceil(reach / eps)) + 1;

    // reject hopeless configurations before enumerating the cell box
    {
        const std::size_t per_cell_sites = (k == 1) ? 3u : (1u << k);
        double box = 1.0;
        for (int a = 0; a < k; ++a) box *= static_cast<double>(j_hi - j_lo + 1);
        double ball_cells = 1.0;
        for (int a = 0; a < k; ++a) ball_cells *= (2.0 * reach / eps + 2.0);
        const double estimate = std::min(box, ball_cells) * static_cast<double>(per_cell_sites);
        if (estimate > 8.0 * static_cast<double>(max_sites))
            throw capacity_error("build_lattice: site count would exceed cap at k=" + std::to_string(k) +
                                 " R=" + format_double(R) + " eps=" + format_double(eps));
    }

    // enumerate cells intersecting the open ball of radius R+1
    std::vector<std::vector<int>> cells;
    {
        std::vector<int> j(k, j_lo);
        while (true) {
            double dist_sq = 0.0;
            for (int a = 0; a < k; ++a) {
                const double lo = j[a] * eps, hi = (j[a] + 1) * eps;
                double t = 0.0;
                if (lo > 0.0) t = lo;
                else if (hi < 0.0) t = -hi;
                dist_sq += t * t;
            }
            if (dist_sq < reach * reach) cells.push_back(j);
            int a = k - 1;
            while (a >= 0 && j[a] == j_hi) {
                j[a] = j_lo;
                --a;
            }
            if (a < 0) break;
            ++j[a];
        }
    }

    const std::size_t per_cell = lat.cell_.vertices.size();
    if (cells.size() * per_cell > 4 * max_sites + 16)
        throw capacity_error("build_lattice: site count would exceed cap at k=" + std::to_string(k) +
                             " R=" + format_double(R) + " eps=" + format_double(eps));

    std::unordered_map<std::int64_t, int> site_index;
    std::vector<std::vector<int>> site_ids_per_cell(cells.size());
    const double h = eps / 2.0;

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto& j = cells[ci];
        auto& ids = site_ids_per_cell[ci];
        ids.resize(per_cell);
        for (std::size_t v = 0; v < per_cell; ++v) {
            std::vector<int> g(k);
            for (int a = 0; a < k; ++a) g[a] = 2 * j[a] + lat.cell_.vertices[v][a];
            const std::int64_t key = lat.pack_(g);
            auto it = site_index.find(key);
            if (it != site_index.end()) {
                ids[v] = it->second;
                continue;
            }
            const int id = static_cast<int>(lat.site_radius_.size());
            if (static_cast<std::size_t>(id) >= max_sites)
                throw capacity_error("build_lattice: site count exceeds cap at k=" + std::to_string(k) +
                                     " R=" + format_double(R) + " eps=" + format_double(eps));
            site_index.emplace(key, id);
            double r_sq = 0.0;
            for (int a = 0; a < k; ++a) {
                const double x = g[a] * h;
                lat.positions_.push_back(x);
                r_sq += x * x;
            }
            const double r = std::sqrt(r_sq);
            lat.site_radius_.push_back(r);
            lat.pinned_.push_back(r >= R + 1.0 - 1e-12);
            ids[v] = id;
        }
        for (const auto& s : lat.cell_.simplices) {
            std::vector<int> global;
            global.reserve(s.size());
            for (int v : s) global.push_back(ids[v]);
            lat.simplices_.push_back(std::move(global));
        }
    }

    // adjacency: pairs sharing a simplex
    lat.adjacency_.assign(lat.site_radius_.size(), {});
    for (const auto& s : lat.simplices_) {
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = 0; b < s.size(); ++b)
                if (a != b) lat.adjacency_[s[a]].push_back(s[b]);
    }
    for (auto& nb : lat.adjacency_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    lat.cell_sites_sorted_.reserve(cells.size());
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        lat.cell_sites_sorted_.emplace_back(lat.pack_(cells[ci]), std::move(site_ids_per_cell[ci]));
    std::sort(lat.cell_sites_sorted_.begin(), lat.cell_sites_sorted_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    return lat;
}

int SupplementedLattice::max_adjacency_degree() const {
    std::size_t best = 0;
    for (const auto& nb : adjacency_) best = std::max(best, nb.size());
    return static_cast<int>(best);
}

int count_parameters(const SupplementedLattice& lattice) { return lattice.n_sites(); }

namespace {

// Recursive point location inside one cell, in unit-cube coordinates.
// Appends (cell-local vertex half-coords, weight); the caller converts to
// site ids. `axes` lists the active axes of `full`, `u` their coordinates.
void locate_rec(std::vector<double>& u, std::vector<int>& axes, std::vector<std::int8_t>& full,
                double wmul,
                std::vector<std::pair<std::vector<std::int8_t>, double>>& out) {
    const std::size_t m = axes.size();
    if (m == 1) {
        const int a = axes[0];
        const double x = u[0];
        auto lo = full, hi = full;
        lo[a] = 0;
        hi[a] = 2;
        out.emplace_back(lo, wmul * (1.0 - x));
        out.emplace_back(hi, wmul * x);
        return;
    }
    // cone coordinate toward the dominant facet
    int best = 0;
    double best_abs = std::abs(u[0] - 0.5);
    for (std::size_t i = 1; i < m; ++i) {
        const double a = std::abs(u[i] - 0.5);
        if (a > best_abs) {
            best_abs = a;
            best = static_cast<int>(i);
        }
    }
    auto center = full;
    for (int a : axes) center[a] = 1;
    const double t = 2.0 * best_abs;
    if (t <= 0.0) {
        out.emplace_back(center, wmul);
        return;
    }
    out.emplace_back(center, wmul * (1.0 - t));

    const double v_star = u[best] - 0.5;
    const int axis = axes[best];
    full[axis] = (v_star > 0.0) ? 2 : 0;
    std::vector<double> u2;
    std::vector<int> axes2;
    u2.reserve(m - 1);
    axes2.reserve(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<int>(i) == best) continue;
        u2.push_back(0.5 + (u[i] - 0.5) / t);
        axes2.push_back(axes[i]);
    }
    locate_rec(u2, axes2, full, wmul * t, out);
}

} // namespace

bool SupplementedLattice::barycentric(std::span<const double> x,
                                      std::vector<std::pair<int, double>>& out) const {
    out.clear();
    if (x.size() != static_cast<std::size_t>(k_))
        throw invalid_dimension_error("barycentric: point dimension mismatch");

    std::vector<int> cell(k_);
    std::vector<double> u(k_);
    for (int a = 0; a < k_; ++a) {
        const double c = std::floor(x[a] / eps_);
        cell[a] = static_cast<int>(c);
        u[a] = x[a] / eps_ - c;
    }
    int ci = find_cell_(cell);
    if (ci < 0) {
        // points on the upper face of a covered cell floor into the next one
        bool retry = false;
        for (int a = 0; a < k_; ++a) {
            if (u[a] == 0.0) {
                cell[a] -= 1;
                u[a] = 1.0;
                retry = true;
            }
        }
        if (retry) ci = find_cell_(cell);
        if (ci < 0) return false;
    }
    const auto& ids = cell_sites_sorted_[ci].second;

    if (k_ == 1) {
        // subdivided segment: local vertices 0, 1, 2 at half-steps
        const double s = 2.0 * u[0];
        if (s <= 1.0) {
            out.emplace_back(ids[0], 1.0 - s);
            out.emplace_back(ids[1], s);
        } else {
            out.emplace_back(ids[1], 2.0 - s);
            out.emplace_back(ids[2], s - 1.0);
        }
        return true;
    }

    std::vector<std::pair<std::vector<std::int8_t>, double>> local;
    std::vector<int> axes(k_);
    for (int a = 0; a < k_; ++a) axes[a] = a;
    std::vector<std::int8_t> full(k_, 0);
    locate_rec(u, axes, full, 1.0, local);

    // map local half-coords to site ids through the cell's vertex table
    for (const auto& [coords, w] : local) {
        int found = -1;
        for (std::size_t v = 0; v < cell_.vertices.size(); ++v) {
            if (cell_.vertices[v] == coords) {
                found = static_cast<int>(v);
                break;
            }
        }
        if (found < 0) throw std::logic_error("barycentric: vertex not in cell table");
        out.emplace_back(ids[found], w);
    }
    return true;
}

// ---------------------------------------------------------------------------

PLFunction::PLFunction(std::shared_ptr<const SupplementedLattice> lattice, Vec values, double norm_bound)
    : lattice_(std::move(lattice)), values_(std::move(values)), norm_bound_(norm_bound) {
    const auto& lat = *lattice_;
    if (values_.size() != static_cast<std::size_t>(lat.n_sites()))
        throw invalid_dimension_error("PLFunction: one value per site required");
    if (norm_bound_ < 0.0) throw std::invalid_argument("PLFunction: negative norm bound");
    const double tol = 1e-9 * (1.0 + norm_bound_);
    for (int i = 0; i < lat.n_sites(); ++i) {
        if (std::abs(values_[i]) > norm_bound_ + tol)
            throw std::invalid_argument("PLFunction: site value exceeds norm bound");
        if (lat.pinned(i) && values_[i] != 0.0)
            throw std::invalid_argument("PLFunction: nonzero value outside the support ball");
    }
    for (int i = 0; i < lat.n_sites(); ++i) {
        for (int j : lat.adjacency()[i]) {
            if (j <= i) continue;
            const double d = dist(lat.site(i), lat.site(j));
            if (std::abs(values_[i] - values_[j]) > norm_bound_ * d + tol)
                throw std::invalid_argument("PLFunction: adjacent slope exceeds norm bound");
        }
    }
}

double PLFunction::operator()(std::span<const double> x) const {
    thread_local std::vector<std::pair<int, double>> scratch;
    if (!lattice_->barycentric(x, scratch)) return 0.0;
    double v = 0.0;
    for (const auto& [id, w] : scratch) v += w * values_[id];
    return v;
}

double PLFunction::sup_value() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

double PLFunction::lipschitz_constant() const {
    const auto& lat = *lattice_;
    const int k = lat.k();
    double best = 0.0;
    std::vector<double> A(static_cast<std::size_t>(k) * k), b(k), g(k);
    for (const auto& s : lat.simplices()) {
        const auto v0 = lat.site(s[0]);
        for (int r = 0; r < k; ++r) {
            const auto vr = lat.site(s[r + 1]);
            for (int c = 0; c < k; ++c) A[static_cast<std::size_t>(r) * k + c] = vr[c] - v0[c];
            b[r] = values_[s[r + 1]] - values_[s[0]];
        }
        // Gaussian elimination with partial pivoting on the k x k system
        std::vector<double> M = A, rhs = b;
        bool ok = true;
        for (int c = 0; c < k && ok; ++c) {
            int p = c;
            for (int r = c + 1; r < k; ++r)
                if (std::abs(M[static_cast<std::size_t>(r) * k + c]) >
                    std::abs(M[static_cast<std::size_t>(p) * k + c]))
                    p = r;
            if (std::abs(M[static_cast<std::size_t>(p) * k + c]) < 1e-14) {
                ok = false;
                break;
            }
            if (p != c) {
                for (int j = 0; j < k; ++j)
                    std::swap(M[static_cast<std::size_t>(p) * k + j], M[static_cast<std::size_t>(c) * k + j]);
                std::swap(rhs[p], rhs[c]);
            }
            for (int r = c + 1; r < k; ++r) {
                const double f = M[static_cast<std::size_t>(r) * k + c] / M[static_cast<std::size_t>(c) * k + c];
                for (int j = c; j < k; ++j)
                    M[static_cast<std::size_t>(r) * k + j] -= f * M[static_cast<std::size_t>(c) * k + j];
                rhs[r] -= f * rhs[c];
            }
        }
        if (!ok) continue;
        for (int r = k - 1; r >= 0; --r) {
            double s2 = rhs[r];
            for (int j = r + 1; j < k; ++j) s2 -= M[static_cast<std::size_t>(r) * k + j] * g[j];
            g[r] = s2 / M[static_cast<std::size_t>(r) * k + r];
        }
        best = std::max(best, norm2(g));
    }
    return best;
}

void PLFunction::write_text(std::ostream& os) const {
    const auto& lat = *lattice_;
    os << lat.k() << ' ' << format_double(lat.eps()) << ' ' << format_double(lat.R()) << '\n';
    for (int i = 0; i < lat.n_sites(); ++i) {
        for (int a = 0; a < lat.k(); ++a) os << format_double(lat.site(i)[a]) << ' ';
        os << format_double(values_[i]) << '\n';
    }
}

PLFunction pl_approximate(const std::function<double(std::span<const double>)>& g, double beta,
                          std::shared_ptr<const SupplementedLattice> lattice) {
    const auto& lat = *lattice;
    Vec values(lat.n_sites(), 0.0);
    for (int i = 0; i < lat.n_sites(); ++i) {
        if (lat.pinned(i)) continue;
        values[i] = g(lat.site(i));
    }
    return PLFunction(std::move(lattice), std::move(values), beta);
}

double radial_taper(double radius, double R) {
    if (radius <= R) return 1.0;
    if (radius >= R + 1.0) return 0.0;
    return R + 1.0 - radius;
}

PLFunction truncate_pl(const PLFunction& f, double R) {
    const auto& lat = f.lattice();
    if (R > lat.R())
        throw std::invalid_argument("truncate_pl: lattice support radius too small for this R");
    Vec values = f.values();
    for (int i = 0; i < lat.n_sites(); ++i) values[i] *= radial_taper(lat.site_radius(i), R);
    return PLFunction(f.lattice_ptr(), std::move(values), 2.0 * f.norm_bound());
}

} // namespace marginal_lab
