#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "hyctrl/network.hpp"
#include "hyctrl/solution.hpp"
#include "hyctrl/system.hpp"

namespace hyctrl::testing {

inline PiecewiseConstantFn random_pcw(std::mt19937_64& rng, double lo, double hi, int pieces,
                                      double amplitude = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> bp{lo};
    for (int p = 1; p < pieces; ++p)
        bp.push_back(lo + (hi - lo) * (p + 0.3 * u(rng)) / pieces);
    bp.push_back(hi);
    std::vector<double> vals;
    for (int p = 0; p < pieces; ++p) vals.push_back(amplitude * u(rng));
    return PiecewiseConstantFn(std::move(bp), std::move(vals));
}

inline DifferenceSystem random_difference_system(std::mt19937_64& rng, int n, int m,
                                                 bool integer_delays = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> d(0.5, 1.8);
    DifferenceSystem sys;
    sys.K = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return u(rng); });
    sys.B = Eigen::MatrixXd::NullaryExpr(n, m, [&]() { return u(rng); });
    if (integer_delays) {
        std::uniform_int_distribution<int> di(1, 3);
        sys.delays = Eigen::VectorXd::NullaryExpr(n, [&]() { return double(di(rng)); });
    } else {
        sys.delays = Eigen::VectorXd::NullaryExpr(n, [&]() { return d(rng); });
    }
    sys.damping_integrals = Eigen::VectorXd::Zero(n);
    return sys;
}

inline BoundaryState random_boundary_state(std::mt19937_64& rng, const DifferenceSystem& sys,
                                           int pieces) {
    BoundaryState s;
    for (int i = 0; i < sys.n(); ++i)
        s.components.push_back(random_pcw(rng, -sys.delays(i), 0.0, pieces));
    return s;
}

inline ControlSignal random_control(std::mt19937_64& rng, int m, double horizon, int pieces) {
    ControlSignal u;
    u.horizon = horizon;
    for (int r = 0; r < m; ++r) u.channels.push_back(random_pcw(rng, 0.0, horizon, pieces));
    return u;
}

// Two transported modes exchanged at the boundary with a single control on
// the second mode; the delays are 1 and tau2.
inline DifferenceSystem exchange_system(double tau2) {
    DifferenceSystem sys;
    sys.K.resize(2, 2);
    sys.K << 0, 1, 1, 0;
    sys.B.resize(2, 1);
    sys.B << 0, 1;
    sys.delays.resize(2);
    sys.delays << 1.0, tau2;
    sys.damping_integrals = Eigen::VectorXd::Zero(2);
    return sys;
}

// Control that steers the exchange system from (phi0, psi0) to (phi1, psi1)
// in time 1 + tau2: mode 1 is rewritten through the control during [0, 1],
// mode 2 during [1, 1 + tau2].
inline ControlSignal exchange_steering_control(const DifferenceSystem& sys,
                                               const BoundaryState& from,
                                               const BoundaryState& to) {
    const double tau2 = sys.delays(1);
    const double horizon = 1.0 + tau2;
    const PiecewiseConstantFn phi_diff = pcw_sub(to.components[0], from.components[0]);
    const PiecewiseConstantFn psi_diff = pcw_sub(to.components[1], from.components[1]);
    ControlSignal u;
    u.horizon = horizon;
    u.channels.push_back(assemble_piecewise(
        0.0, horizon,
        {PcwTerm{1.0, &phi_diff, -1.0, 0.0, 1.0},
         PcwTerm{1.0, &psi_diff, -1.0 - tau2, 1.0, horizon + 1.0}}));
    return u;
}

// Mixed-direction two-component transport system with piecewise coefficient
// profiles; amplitudes stay at desk scale so damping envelopes remain O(1).
inline HyperbolicSystem random_hyperbolic(std::mt19937_64& rng, bool with_damping) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    HyperbolicSystem sys;
    sys.n_plus = 1;
    sys.speeds.push_back(PiecewiseConstantFn({0.0, 0.3 + 0.3 * std::abs(u(rng)), 1.0},
                                             {0.7 + std::abs(u(rng)), 1.2 + std::abs(u(rng))}));
    sys.speeds.push_back(PiecewiseConstantFn({0.0, 0.55, 1.0},
                                             {-0.8 - std::abs(u(rng)), -1.5 - std::abs(u(rng))}));
    for (int i = 0; i < 2; ++i)
        sys.dampings.push_back(
            with_damping ? PiecewiseConstantFn({0.0, 0.5, 1.0}, {0.6 * u(rng), 0.6 * u(rng)})
                         : PiecewiseConstantFn::constant(0.0, 1.0, 0.0));
    sys.boundary_matrix = Eigen::MatrixXd::NullaryExpr(2, 2, [&]() { return u(rng); });
    sys.control_matrix = Eigen::MatrixXd::NullaryExpr(2, 1, [&]() { return u(rng); });
    return sys;
}

inline PiecewiseConstantFn random_negative_speed(std::mt19937_64& rng, bool integer_delay) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (integer_delay) {
        std::uniform_int_distribution<int> di(1, 3);
        return PiecewiseConstantFn::constant(0.0, 1.0, -1.0 / di(rng));
    }
    // two pieces, both negative
    const double cut = 0.3 + 0.4 * u(rng);
    return PiecewiseConstantFn({0.0, cut, 1.0}, {-0.6 - u(rng), -1.0 - u(rng)});
}

// Disjoint union of directed cycles with the given sizes; vertices and edges
// are laid out cycle by cycle but edge insertion order is shuffled so the
// relabeling logic actually works.
inline FlowGraph cycle_graph(std::mt19937_64& rng, const std::vector<int>& sizes, int controls,
                             bool integer_delays = false, bool with_damping = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FlowGraph g;
    g.vertex_count = std::accumulate(sizes.begin(), sizes.end(), 0);
    std::vector<FlowEdge> edges;
    int base = 0;
    for (int size : sizes) {
        for (int r = 0; r < size; ++r) {
            FlowEdge e{base + r, base + (r + 1) % size, random_negative_speed(rng, integer_delays),
                       with_damping ? PiecewiseConstantFn::constant(0.0, 1.0, 0.5 * u(rng))
                                    : PiecewiseConstantFn::constant(0.0, 1.0, 0.0)};
            edges.push_back(std::move(e));
        }
        base += size;
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    g.edges = std::move(edges);
    g.weights = Eigen::MatrixXd::Zero(g.k(), g.n());
    for (int j = 0; j < g.n(); ++j) g.weights(g.edges[static_cast<std::size_t>(j)].tail, j) = 1.0;
    g.gamma = Eigen::MatrixXd::NullaryExpr(g.k(), controls, [&]() { return u(rng); });
    return g;
}

// A permutation graph plus one extra edge: the extra head vertex gets two
// incoming edges, and the extra tail splits its outgoing weight.
inline FlowGraph obstructed_graph(std::mt19937_64& rng, int vertices) {
    FlowGraph g = cycle_graph(rng, {vertices}, 1);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    const int tail = static_cast<int>(rng() % static_cast<unsigned>(vertices));
    const int head = static_cast<int>(rng() % static_cast<unsigned>(vertices));
    g.edges.push_back(FlowEdge{tail, head, random_negative_speed(rng, false),
                               PiecewiseConstantFn::constant(0.0, 1.0, 0.2)});
    g.weights.conservativeResize(g.k(), g.n());
    const double split = u(rng);
    for (int j = 0; j + 1 < g.n(); ++j)
        if (g.edges[static_cast<std::size_t>(j)].tail == tail) g.weights(tail, j) = 1.0 - split;
    g.weights.col(g.n() - 1).setZero();
    g.weights(tail, g.n() - 1) = split;
    return g;
}

}  // namespace hyctrl::testing
