#include "marginal_lab/mincost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace marginal_lab {

namespace {

struct TreeState {
    std::vector<int> parent;
    std::vector<int> parent_arc;
    std::vector<int> dir; // +1 if parent_arc points v -> parent, -1 otherwise
    std::vector<double> flow;
    std::vector<int> depth;
    std::vector<double> pi;
    std::vector<std::vector<int>> children;

    void erase_child(int p, int c) {
        auto& v = children[p];
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == c) {
                v[i] = v.back();
                v.pop_back();
                return;
            }
        }
    }
};

} // namespace

FlowResult min_cost_flow(int n_nodes, std::span<const double> supply, std::span<const FlowArc> arcs,
                         int hub) {
    if (n_nodes <= 0 || hub < 0 || hub >= n_nodes) throw std::invalid_argument("min_cost_flow: bad hub");
    if (supply.size() != static_cast<std::size_t>(n_nodes))
        throw std::invalid_argument("min_cost_flow: supply size mismatch");

    FlowResult result;
    result.potentials.assign(n_nodes, 0.0);
    if (n_nodes == 1) return result;

    // locate the hub arcs that seed the spanning tree
    std::vector<int> arc_to_hub(n_nodes, -1), arc_from_hub(n_nodes, -1);
    double max_cost = 0.0;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        const FlowArc& arc = arcs[a];
        if (arc.from < 0 || arc.from >= n_nodes || arc.to < 0 || arc.to >= n_nodes || arc.from == arc.to)
            throw std::invalid_argument("min_cost_flow: bad arc");
        if (arc.cost < 0.0) throw std::invalid_argument("min_cost_flow: negative cost");
        max_cost = std::max(max_cost, arc.cost);
        if (arc.to == hub && arc_to_hub[arc.from] < 0) arc_to_hub[arc.from] = static_cast<int>(a);
        if (arc.from == hub && arc_from_hub[arc.to] < 0) arc_from_hub[arc.to] = static_cast<int>(a);
    }
    for (int v = 0; v < n_nodes; ++v) {
        if (v == hub) continue;
        if (arc_to_hub[v] < 0 || arc_from_hub[v] < 0)
            throw std::invalid_argument("min_cost_flow: node lacks hub arcs");
    }

    TreeState t;
    t.parent.assign(n_nodes, -1);
    t.parent_arc.assign(n_nodes, -1);
    t.dir.assign(n_nodes, 0);
    t.flow.assign(n_nodes, 0.0);
    t.depth.assign(n_nodes, 0);
    t.pi.assign(n_nodes, 0.0);
    t.children.assign(n_nodes, {});

    // start from the all-through-hub tree
    for (int v = 0; v < n_nodes; ++v) {
        if (v == hub) continue;
        t.parent[v] = hub;
        t.depth[v] = 1;
        t.children[hub].push_back(v);
        if (supply[v] >= 0.0) {
            t.parent_arc[v] = arc_to_hub[v];
            t.dir[v] = +1;
            t.flow[v] = supply[v];
            t.pi[v] = arcs[arc_to_hub[v]].cost;
        } else {
            t.parent_arc[v] = arc_from_hub[v];
            t.dir[v] = -1;
            t.flow[v] = -supply[v];
            t.pi[v] = -arcs[arc_from_hub[v]].cost;
        }
    }

    const double tol = 1e-11 * (1.0 + max_cost);
    const int m = static_cast<int>(arcs.size());
    const int block = std::max(64, static_cast<int>(std::sqrt(static_cast<double>(m))) + 1);
    const long max_pivots = 400L * n_nodes + 100000L;
    int cursor = 0;

    std::vector<int> chain;
    std::vector<int> stack;

    while (true) {
        // pricing: best arc in the first block that contains a violation
        int enter = -1;
        double best = -tol;
        int scanned = 0;
        while (scanned < m) {
            const int stop = std::min(m, cursor + block);
            for (int a = cursor; a < stop; ++a) {
                const double rc = arcs[a].cost + t.pi[arcs[a].to] - t.pi[arcs[a].from];
                if (rc < best) {
                    best = rc;
                    enter = a;
                }
            }
            scanned += stop - cursor;
            cursor = (stop >= m) ? 0 : stop;
            if (enter >= 0) break;
        }
        if (enter < 0) break; // optimal

        if (result.pivots++ > max_pivots) throw std::runtime_error("min_cost_flow: pivot limit exceeded");

        const int u = arcs[enter].from;
        const int w = arcs[enter].to;
        const double r = best;

        // ratio test along the cycle u -> w -> lca -> u
        int x = u;
        double t_max = std::numeric_limits<double>::infinity();
        int leave = -1;   // node whose parent arc leaves
        bool leave_u_side = false;
        {
            int cu = u, cw = w;
            int du = t.depth[cu], dw = t.depth[cw];
            while (du > dw) {
                if (t.dir[cu] == +1 && t.flow[cu] < t_max) {
                    t_max = t.flow[cu];
                    leave = cu;
                    leave_u_side = true;
                }
                cu = t.parent[cu];
                --du;
            }
            while (dw > du) {
                if (t.dir[cw] == -1 && t.flow[cw] < t_max) {
                    t_max = t.flow[cw];
                    leave = cw;
                    leave_u_side = false;
                }
                cw = t.parent[cw];
                --dw;
            }
            while (cu != cw) {
                if (t.dir[cu] == +1 && t.flow[cu] < t_max) {
                    t_max = t.flow[cu];
                    leave = cu;
                    leave_u_side = true;
                }
                if (t.dir[cw] == -1 && t.flow[cw] < t_max) {
                    t_max = t.flow[cw];
                    leave = cw;
                    leave_u_side = false;
                }
                cu = t.parent[cu];
                cw = t.parent[cw];
            }
            x = cu; // lca
        }
        if (leave < 0) throw std::runtime_error("min_cost_flow: unbounded cycle");
        const double push = t_max;

        // apply the flow change
        for (int v = u; v != x; v = t.parent[v]) t.flow[v] += (t.dir[v] == +1) ? -push : push;
        for (int v = w; v != x; v = t.parent[v]) t.flow[v] += (t.dir[v] == -1) ? -push : push;

        // detach the subtree below the leaving arc and re-root it at the
        // entering arc's endpoint inside it
        const int p = leave_u_side ? u : w;
        const int o = leave_u_side ? w : u;

        chain.clear();
        for (int v = p;; v = t.parent[v]) {
            chain.push_back(v);
            if (v == leave) break;
        }
        t.erase_child(t.parent[leave], leave);
        // reverse parent pointers along the chain
        for (std::size_t i = chain.size(); i-- > 1;) {
            const int q = chain[i];
            const int c = chain[i - 1];
            t.erase_child(q, c);
            t.parent[q] = c;
            t.parent_arc[q] = t.parent_arc[c];
            t.dir[q] = -t.dir[c];
            t.flow[q] = t.flow[c];
            t.children[c].push_back(q);
        }
        t.parent[p] = o;
        t.parent_arc[p] = enter;
        t.dir[p] = (arcs[enter].from == p) ? +1 : -1;
        t.flow[p] = push;
        t.children[o].push_back(p);

        // shift potentials and fix depths on the moved subtree
        const double delta = leave_u_side ? r : -r;
        stack.clear();
        stack.push_back(p);
        t.depth[p] = t.depth[o] + 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            t.pi[v] += delta;
            for (int c : t.children[v]) {
                t.depth[c] = t.depth[v] + 1;
                stack.push_back(c);
            }
        }
    }

    // exact potentials from the final tree (incremental shifts carry
    // rounding), then the objective
    {
        stack.clear();
        stack.push_back(hub);
        t.pi[hub] = 0.0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int c : t.children[v]) {
                const FlowArc& a = arcs[t.parent_arc[c]];
                // rc = cost + pi[to] - pi[from] = 0 on tree arcs
                t.pi[c] = (t.dir[c] == +1) ? a.cost + t.pi[v] : t.pi[v] - a.cost;
                stack.push_back(c);
            }
        }
        double total = 0.0;
        for (int v = 0; v < n_nodes; ++v) {
            if (v == hub) continue;
            total += t.flow[v] * arcs[t.parent_arc[v]].cost;
        }
        result.cost = total;
        result.potentials = t.pi;
    }
    return result;
}

} // namespace marginal_lab
