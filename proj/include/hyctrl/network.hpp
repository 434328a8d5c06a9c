#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hyctrl/controllability.hpp"
#include "hyctrl/system.hpp"

namespace hyctrl {

// Directed transport network. Edge j carries a flow from its tail vertex to
// its head vertex along [0, 1] (leftward speeds by convention: the interval
// coordinate 1 sits at the tail, 0 at the head). Mass arriving at a vertex is
// redistributed to its outgoing edges according to the weights; controls act
// on vertices through gamma and are split the same way.
struct FlowEdge {
    int tail = 0;
    int head = 0;
    PiecewiseConstantFn speed;    // on [0, 1], strictly negative values
    PiecewiseConstantFn damping;  // on [0, 1]
};

struct FlowGraph {
    int vertex_count = 0;
    std::vector<FlowEdge> edges;
    Eigen::MatrixXd weights;  // k x n, w(i, j) = share of vertex i's flow on edge j
    Eigen::MatrixXd gamma;    // k x m, control-to-vertex coefficients

    int k() const { return vertex_count; }
    int n() const { return static_cast<int>(edges.size()); }
    int m() const { return static_cast<int>(gamma.cols()); }
};

struct GraphViolation {
    std::string rule;    // "weight-normalization", "weight-support", "degree", ...
    std::string detail;
};

// Structural checks: weight rows sum to 1, weight support matches the
// outgoing incidence, every vertex has at least one incoming and one
// outgoing edge, edge speeds are negative. Returns all violations found.
std::vector<GraphViolation> validate_graph(const FlowGraph& g);

struct NetworkSystem {
    HyperbolicSystem hyperbolic;
    DifferenceSystem difference;
    Eigen::MatrixXd incidence_out;   // k x n, 1 where vertex is the edge's tail
    Eigen::MatrixXd incidence_in;    // k x n, 1 where vertex is the edge's head
    Eigen::MatrixXd weighted_out;    // k x n
};

// Assembles K = (I_w^-)^T I^+ Z and B = (I_w^-)^T Gamma together with the
// underlying hyperbolic system. Throws std::invalid_argument when
// validate_graph reports violations.
NetworkSystem build_network_system(const FlowGraph& g);

// A vertex with two incoming edges; the matching columns of K are
// proportional, so rank [K, B] < n and the network cannot be controllable.
struct Obstruction {
    int vertex = 0;
    int edge_a = 0;
    int edge_b = 0;
    double column_angle = 0.0;  // angle between the two K columns
};

// Relabeling of the edges into consecutive directed cycles: position r holds
// original edge order[r], and following positions within a block walks each
// cycle head-to-tail.
struct CycleDecomposition {
    int cycle_count = 0;
    std::vector<int> sizes;
    std::vector<int> order;
    std::vector<int> block_start;
};

std::variant<CycleDecomposition, Obstruction> cycle_decomposition(const FlowGraph& g);

// Network data relabeled along its cycle decomposition; K takes the
// block-cyclic form diag(C_h Z_l) and B the vertex-pulled-back gamma rows.
struct CycleSystem {
    CycleDecomposition dec;
    Eigen::VectorXd tau;    // relabeled delays
    Eigen::VectorXd zeta;   // relabeled damping integrals
    Eigen::MatrixXd K;      // relabeled, block form
    Eigen::MatrixXd B;      // relabeled
    std::vector<double> cycle_delay;  // S_l = sum of tau over the cycle
    std::vector<double> cycle_zeta;   // Z_l
    std::vector<double> rho;          // -Z_l / S_l, the spectral abscissa

    int n() const { return static_cast<int>(tau.size()); }
    int m() const { return static_cast<int>(B.cols()); }
    int cycles() const { return dec.cycle_count; }
    int block_start(int l) const { return dec.block_start[static_cast<std::size_t>(l)]; }
    int block_size(int l) const { return dec.sizes[static_cast<std::size_t>(l)]; }

    // diag(e^{p tau_j}) - C_h Z_l over the block of cycle l.
    Eigen::MatrixXcd block_matrix(int l, std::complex<double> p) const;
    // Left-kernel direction of the block at a spectral point, first entry 1.
    Eigen::VectorXcd kernel(int l, std::complex<double> p) const;
    // Same vector embedded in C^n on the block's indices.
    Eigen::VectorXcd kernel_embedded(int l, std::complex<double> p) const;
    // |e^{p S_l + Z_l} - 1|: zero exactly on the spectral lattice of cycle l.
    double spectral_gap(int l, std::complex<double> p) const;
};

CycleSystem make_cycle_system(const FlowGraph& g, const CycleDecomposition& dec);

// Frequencies where the l-th cycle block drops rank: the vertical lattice
// rho_l + i 2 k pi / S_l.
struct SpectralPoint {
    int cycle = 0;
    int k = 0;
    std::complex<double> p;
};

std::vector<SpectralPoint> spectral_set(const CycleSystem& cs, int l, int k_min, int k_max);

// Kernel vector at p; throws NotSpectral when p is not on the lattice of
// cycle l within tol.
Eigen::VectorXcd kernel_vector(const CycleSystem& cs, int l, std::complex<double> p,
                               double tol = 1e-8);

struct NetworkOptions {
    double pass_tol = 1e-6;
    double fail_tol = 1e-10;
    double commensurable_tol = 1e-9;  // rational-ratio detection
    double rho_tol = 1e-9;            // spectral-abscissa coincidence
    double rho_borderline = 1e-6;     // coincidence too close to call
    double spectral_tol = 1e-8;       // lattice membership
    int sample_count = 4096;          // phase sampling for irrational ratios
    int joint_cap = 1024;             // cross-cycle joint lattice enumeration
};

struct CycleMargin {
    int cycle = 0;
    double min_margin = 0.0;
    std::complex<double> at{0.0, 0.0};
    bool exhaustive = false;  // finite pattern enumeration vs sampling
};

struct NetworkReport {
    ControllabilityReport base;
    std::optional<Obstruction> obstruction;
    std::vector<int> cycle_sizes;
    std::vector<CycleMargin> margins;
    int test_points = 0;
};

// Approximate-controllability test specialized to networks: topological
// obstruction first, then rank margins of the control pullback against the
// kernel directions over every spectral point, with exact finite enumeration
// for commensurable delays and sampled phases otherwise.
NetworkReport network_approx_test(const FlowGraph& g, const NetworkOptions& opts = {});

// Exact-controllability test (L^1): per-cycle minimization of the control
// pairing over the closure of the kernel directions. Requires pairwise
// distinct spectral abscissas; coincident ratios yield Inconclusive.
NetworkReport network_exact_test(const FlowGraph& g, const NetworkOptions& opts = {});

}  // namespace hyctrl
