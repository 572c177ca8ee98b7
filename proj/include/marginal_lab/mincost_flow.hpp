#pragma once

#include <span>
#include <vector>

namespace marginal_lab {

struct FlowArc {
    int from;
    int to;
    double cost; // >= 0
};

struct FlowResult {
    double cost = 0.0;              // optimal total cost
    std::vector<double> potentials; // dual values, potentials[hub] == 0
    int pivots = 0;
};

// Uncapacitated min-cost flow, primal network simplex.
//
//   minimize    sum_a cost_a x_a
//   subject to  sum_{a out of v} x_a - sum_{a into v} x_a = supply_v,  x >= 0
//
// `hub` must be a node with an arc in each direction to every other node
// (the callers build their networks around one slack node, which also gives
// a feasible starting tree without artificial arcs). Supplies must sum to
// zero. The dual values satisfy potentials[u] - potentials[v] <= cost(u,v)
// for every arc, with equality on basic arcs; they are the maximizer of
// sum_v supply_v y_v over that constraint set.
FlowResult min_cost_flow(int n_nodes, std::span<const double> supply, std::span<const FlowArc> arcs,
                         int hub);

} // namespace marginal_lab
