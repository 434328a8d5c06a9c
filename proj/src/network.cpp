#include "hyctrl/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hyctrl/errors.hpp"

namespace hyctrl {

std::vector<GraphViolation> validate_graph(const FlowGraph& g) {
    std::vector<GraphViolation> out;
    if (g.vertex_count < 1) {
        out.push_back({"structure", "graph needs at least one vertex"});
        return out;
    }
    if (g.edges.empty()) {
        out.push_back({"structure", "graph needs at least one edge"});
        return out;
    }
    if (g.weights.rows() != g.k() || g.weights.cols() != g.n())
        out.push_back({"structure", "weight matrix must be k x n"});
    if (g.gamma.rows() != g.k())
        out.push_back({"structure", "gamma must have one row per vertex"});

    std::vector<int> incoming(static_cast<std::size_t>(g.k()), 0);
    std::vector<int> outgoing(static_cast<std::size_t>(g.k()), 0);
    for (int j = 0; j < g.n(); ++j) {
        const FlowEdge& e = g.edges[static_cast<std::size_t>(j)];
        if (e.tail < 0 || e.tail >= g.k() || e.head < 0 || e.head >= g.k()) {
            out.push_back({"structure", "edge " + std::to_string(j) + " references a bad vertex"});
            continue;
        }
        ++outgoing[static_cast<std::size_t>(e.tail)];
        ++incoming[static_cast<std::size_t>(e.head)];
        for (double v : e.speed.values())
            if (!(v < 0.0)) {
                out.push_back({"speed", "edge " + std::to_string(j) +
                                            " must have strictly negative speed"});
                break;
            }
    }
    for (int i = 0; i < g.k(); ++i) {
        if (incoming[static_cast<std::size_t>(i)] == 0)
            out.push_back({"degree", "vertex " + std::to_string(i) + " has no incoming edge"});
        if (outgoing[static_cast<std::size_t>(i)] == 0)
            out.push_back({"degree", "vertex " + std::to_string(i) + " has no outgoing edge"});
    }

    if (g.weights.rows() == g.k() && g.weights.cols() == g.n()) {
        for (int i = 0; i < g.k(); ++i) {
            const double row_sum = g.weights.row(i).sum();
            if (std::abs(row_sum - 1.0) > 1e-12)
                out.push_back({"weight-normalization",
                               "vertex " + std::to_string(i) + " weights sum to " +
                                   std::to_string(row_sum)});
            for (int j = 0; j < g.n(); ++j) {
                const bool is_tail = g.edges[static_cast<std::size_t>(j)].tail == i;
                const double w = g.weights(i, j);
                if (w < 0.0 || w > 1.0)
                    out.push_back({"weight-support", "weight (" + std::to_string(i) + ", " +
                                                         std::to_string(j) + ") outside [0, 1]"});
                if (is_tail && w == 0.0)
                    out.push_back({"weight-support", "outgoing edge " + std::to_string(j) +
                                                         " of vertex " + std::to_string(i) +
                                                         " has zero weight"});
                if (!is_tail && w != 0.0)
                    out.push_back({"weight-support", "vertex " + std::to_string(i) +
                                                         " weights edge " + std::to_string(j) +
                                                         " it does not emit"});
            }
        }
    }
    return out;
}

NetworkSystem build_network_system(const FlowGraph& g) {
    const auto violations = validate_graph(g);
    if (!violations.empty()) {
        std::string msg = "invalid flow graph:";
        for (const auto& v : violations) msg += " [" + v.rule + "] " + v.detail + ";";
        throw std::invalid_argument(msg);
    }

    NetworkSystem out;
    out.incidence_out = Eigen::MatrixXd::Zero(g.k(), g.n());
    out.incidence_in = Eigen::MatrixXd::Zero(g.k(), g.n());
    for (int j = 0; j < g.n(); ++j) {
        out.incidence_out(g.edges[static_cast<std::size_t>(j)].tail, j) = 1.0;
        out.incidence_in(g.edges[static_cast<std::size_t>(j)].head, j) = 1.0;
    }
    out.weighted_out = g.weights;

    HyperbolicSystem hyp;
    hyp.n_plus = 0;  // all flows move from coordinate 1 toward 0
    for (const FlowEdge& e : g.edges) {
        hyp.speeds.push_back(e.speed);
        hyp.dampings.push_back(e.damping);
    }
    hyp.boundary_matrix = out.weighted_out.transpose() * out.incidence_in;
    hyp.control_matrix = out.weighted_out.transpose() * g.gamma;
    hyp.validate();
    out.hyperbolic = hyp;
    out.difference = to_difference_system(hyp);
    return out;
}

std::variant<CycleDecomposition, Obstruction> cycle_decomposition(const FlowGraph& g) {
    const auto violations = validate_graph(g);
    if (!violations.empty()) throw std::invalid_argument("cycle_decomposition: invalid graph");

    std::vector<std::vector<int>> incoming(static_cast<std::size_t>(g.k()));
    for (int j = 0; j < g.n(); ++j)
        incoming[static_cast<std::size_t>(g.edges[static_cast<std::size_t>(j)].head)].push_back(j);
    for (int i = 0; i < g.k(); ++i) {
        const auto& in = incoming[static_cast<std::size_t>(i)];
        if (in.size() >= 2) {
            Obstruction o;
            o.vertex = i;
            o.edge_a = in[0];
            o.edge_b = in[1];
            const Eigen::MatrixXd K = build_network_system(g).difference.K;
            const Eigen::VectorXd a = K.col(o.edge_a);
            const Eigen::VectorXd b = K.col(o.edge_b);
            // angle via the projection residual: stable near zero, where
            // acos of the normalized dot product bottoms out at ~1e-8
            if (a.norm() == 0.0 || b.norm() == 0.0) {
                o.column_angle = 0.0;
            } else {
                const Eigen::VectorXd resid = b - (a.dot(b) / a.squaredNorm()) * a;
                o.column_angle = std::asin(std::min(resid.norm() / b.norm(), 1.0));
            }
            return o;
        }
    }

    // Every vertex has exactly one incoming edge, hence exactly one outgoing
    // edge as well; following "successor = edge leaving my head" walks each
    // directed cycle in increasing label order.
    std::vector<int> out_edge(static_cast<std::size_t>(g.k()), -1);
    for (int j = 0; j < g.n(); ++j)
        out_edge[static_cast<std::size_t>(g.edges[static_cast<std::size_t>(j)].tail)] = j;

    CycleDecomposition dec;
    std::vector<bool> seen(static_cast<std::size_t>(g.n()), false);
    for (int start = 0; start < g.n(); ++start) {
        if (seen[static_cast<std::size_t>(start)]) continue;
        dec.block_start.push_back(static_cast<int>(dec.order.size()));
        int size = 0;
        int e = start;
        do {
            seen[static_cast<std::size_t>(e)] = true;
            dec.order.push_back(e);
            ++size;
            e = out_edge[static_cast<std::size_t>(g.edges[static_cast<std::size_t>(e)].head)];
        } while (e != start);
        dec.sizes.push_back(size);
        ++dec.cycle_count;
    }
    return dec;
}

CycleSystem make_cycle_system(const FlowGraph& g, const CycleDecomposition& dec) {
    const NetworkSystem ns = build_network_system(g);
    const int n = g.n();
    CycleSystem cs;
    cs.dec = dec;
    cs.tau.resize(n);
    cs.zeta.resize(n);
    cs.K.resize(n, n);
    cs.B.resize(n, g.m());
    for (int r = 0; r < n; ++r) {
        const int er = dec.order[static_cast<std::size_t>(r)];
        cs.tau(r) = ns.difference.delays(er);
        cs.zeta(r) = ns.difference.damping_integrals(er);
        cs.B.row(r) = ns.difference.B.row(er);
        for (int c = 0; c < n; ++c)
            cs.K(r, c) = ns.difference.K(er, dec.order[static_cast<std::size_t>(c)]);
    }
    for (int l = 0; l < dec.cycle_count; ++l) {
        double S = 0.0, Z = 0.0;
        for (int r = cs.block_start(l); r < cs.block_start(l) + cs.block_size(l); ++r) {
            S += cs.tau(r);
            Z += cs.zeta(r);
        }
        cs.cycle_delay.push_back(S);
        cs.cycle_zeta.push_back(Z);
        cs.rho.push_back(-Z / S);
    }
    return cs;
}

Eigen::MatrixXcd CycleSystem::block_matrix(int l, std::complex<double> p) const {
    const int h = block_size(l);
    const int s = block_start(l);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(h, h);
    for (int j = 0; j < h; ++j) M(j, j) = std::exp(p * tau(s + j));
    for (int j = 0; j < h; ++j) {
        const int row = (j + 1) % h;  // C_h has ones on the subdiagonal and corner
        M(row, j) -= std::exp(-zeta(s + j));
    }
    return M;
}

Eigen::VectorXcd CycleSystem::kernel(int l, std::complex<double> p) const {
    const int h = block_size(l);
    const int s = block_start(l);
    Eigen::VectorXcd y(h);
    y(0) = 1.0;
    for (int j = 1; j < h; ++j) y(j) = y(j - 1) * std::exp(p * tau(s + j - 1) + zeta(s + j - 1));
    return y;
}

Eigen::VectorXcd CycleSystem::kernel_embedded(int l, std::complex<double> p) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n());
    out.segment(block_start(l), block_size(l)) = kernel(l, p);
    return out;
}

double CycleSystem::spectral_gap(int l, std::complex<double> p) const {
    return std::abs(std::exp(p * cycle_delay[static_cast<std::size_t>(l)] +
                             cycle_zeta[static_cast<std::size_t>(l)]) -
                    1.0);
}

std::vector<SpectralPoint> spectral_set(const CycleSystem& cs, int l, int k_min, int k_max) {
    if (l < 0 || l >= cs.cycles()) throw std::invalid_argument("cycle index out of range");
    std::vector<SpectralPoint> out;
    const double S = cs.cycle_delay[static_cast<std::size_t>(l)];
    for (int k = k_min; k <= k_max; ++k)
        out.push_back({l, k, {cs.rho[static_cast<std::size_t>(l)], 2.0 * M_PI * k / S}});
    return out;
}

Eigen::VectorXcd kernel_vector(const CycleSystem& cs, int l, std::complex<double> p, double tol) {
    if (l < 0 || l >= cs.cycles()) throw std::invalid_argument("cycle index out of range");
    if (cs.spectral_gap(l, p) > tol)
        throw NotSpectral("frequency is not on the spectral lattice of the cycle");
    return cs.kernel(l, p);
}

namespace {

struct TestPoint {
    std::complex<double> p;
    int owner;  // cycle whose lattice generated the point
};

struct MarginOutcome {
    double margin = std::numeric_limits<double>::infinity();
    std::complex<double> at{0.0, 0.0};
    bool borderline_membership = false;
};

// sigma_min of B^T [normalized kernel columns of every cycle singular at p].
MarginOutcome point_margin(const CycleSystem& cs, std::complex<double> p,
                           const NetworkOptions& opts) {
    MarginOutcome out;
    out.at = p;
    std::vector<int> singular;
    for (int l = 0; l < cs.cycles(); ++l) {
        const double gap = cs.spectral_gap(l, p);
        if (gap <= opts.spectral_tol) singular.push_back(l);
        else if (gap <= opts.rho_borderline) out.borderline_membership = true;
    }
    if (singular.empty()) return out;
    Eigen::MatrixXcd Y(cs.n(), static_cast<int>(singular.size()));
    for (std::size_t c = 0; c < singular.size(); ++c) {
        Eigen::VectorXcd y = cs.kernel_embedded(singular[c], p);
        Y.col(static_cast<int>(c)) = y / y.norm();
    }
    const Eigen::MatrixXcd G = cs.B.transpose().cast<std::complex<double>>() * Y;
    if (G.rows() < G.cols()) {
        out.margin = 0.0;
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
    out.margin = svd.singularValues()(svd.singularValues().size() - 1);
    return out;
}

struct LatticePlan {
    std::vector<TestPoint> points;
    bool exhaustive = false;              // pattern coverage is finite and complete
    std::vector<bool> cycle_exhaustive;   // per cycle
    bool borderline = false;
    std::vector<std::string> notes;
};

// Chooses the spectral frequencies to test. Fully commensurable delays give
// a finite complete pattern set per cycle (k over one pattern period, with
// cross-cycle coincidences detected numerically at each point). Otherwise
// each cycle gets its own exhaustive or sampled range, plus joint lattice
// points for spectral-abscissa coincidences with rational period ratios.
LatticePlan plan_lattice(const CycleSystem& cs, const NetworkOptions& opts) {
    LatticePlan plan;
    plan.cycle_exhaustive.assign(static_cast<std::size_t>(cs.cycles()), false);

    // Per-cycle pattern period: S_l / (largest base dividing all in-cycle
    // delays), when the in-cycle delays are commensurable.
    std::vector<long long> period(static_cast<std::size_t>(cs.cycles()), 0);
    for (int l = 0; l < cs.cycles(); ++l) {
        long long lcm = 1;
        bool ok = true;
        const int s = cs.block_start(l);
        for (int j = 0; j < cs.block_size(l); ++j) {
            const auto r = rationalize(cs.tau(s + j) / cs.tau(s), opts.commensurable_tol);
            if (!r || r->first <= 0) {
                ok = false;
                break;
            }
            lcm = std::lcm(lcm, r->second);
            if (lcm > 1000000LL) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        // base = tau(s) / lcm; period = S_l / base
        long long total = 0;
        for (int j = 0; j < cs.block_size(l); ++j) {
            const double ratio = cs.tau(s + j) / (cs.tau(s) / double(lcm));
            const long long nj = std::llround(ratio);
            if (nj <= 0 || std::abs(ratio - double(nj)) > 1e-6 || total > 100000) {
                total = -1;
                break;
            }
            total += nj;
        }
        if (total > 0 && total <= 100000) period[static_cast<std::size_t>(l)] = total;
    }

    for (int l = 0; l < cs.cycles(); ++l) {
        const double S = cs.cycle_delay[static_cast<std::size_t>(l)];
        const double rho = cs.rho[static_cast<std::size_t>(l)];
        long long count = period[static_cast<std::size_t>(l)];
        const bool exhaustive = count > 0 && count <= 4 * opts.sample_count;
        if (!exhaustive) count = opts.sample_count;
        plan.cycle_exhaustive[static_cast<std::size_t>(l)] = exhaustive;
        for (long long k = 0; k < count; ++k)
            plan.points.push_back({{rho, 2.0 * M_PI * double(k) / S}, l});
    }
    plan.exhaustive = std::all_of(plan.cycle_exhaustive.begin(), plan.cycle_exhaustive.end(),
                                  [](bool b) { return b; });

    // Spectral-abscissa coincidences: add joint lattice points when period
    // ratios are rational, flag borderline gaps.
    for (int l1 = 0; l1 < cs.cycles(); ++l1) {
        for (int l2 = l1 + 1; l2 < cs.cycles(); ++l2) {
            const double gap = std::abs(cs.rho[static_cast<std::size_t>(l1)] -
                                        cs.rho[static_cast<std::size_t>(l2)]);
            if (gap > opts.rho_tol && gap <= opts.rho_borderline) {
                plan.borderline = true;
                plan.notes.push_back("cycles " + std::to_string(l1) + " and " +
                                     std::to_string(l2) +
                                     " have nearly coincident spectral abscissas");
                continue;
            }
            if (gap > opts.rho_tol) continue;
            const double S1 = cs.cycle_delay[static_cast<std::size_t>(l1)];
            const double S2 = cs.cycle_delay[static_cast<std::size_t>(l2)];
            const auto ratio = rationalize(S1 / S2, opts.commensurable_tol);
            if (!ratio) continue;  // lattices only share the real point k = 0
            // joint spacing: k1 multiples of the ratio numerator
            const double rho = cs.rho[static_cast<std::size_t>(l1)];
            for (int r = 0; r < opts.joint_cap; ++r)
                plan.points.push_back(
                    {{rho, 2.0 * M_PI * double(r) * double(ratio->first) / S1}, l1});
            if (!plan.cycle_exhaustive[static_cast<std::size_t>(l1)] ||
                !plan.cycle_exhaustive[static_cast<std::size_t>(l2)])
                plan.exhaustive = false;
        }
    }
    return plan;
}

NetworkReport run_network_test(const FlowGraph& g, const NetworkOptions& opts, bool exact) {
    const auto start = std::chrono::steady_clock::now();
    NetworkReport rep;
    rep.base.kind = exact ? "exact" : "approximate";

    auto finish = [&](NetworkReport& r) -> NetworkReport& {
        r.base.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    };

    const auto dec_or_obs = cycle_decomposition(g);
    if (std::holds_alternative<Obstruction>(dec_or_obs)) {
        const auto& o = std::get<Obstruction>(dec_or_obs);
        rep.obstruction = o;
        rep.base.verdict = Verdict::NotControllable;
        rep.base.rank_kb = rank_kb(build_network_system(g).difference);
        rep.base.detail = "vertex " + std::to_string(o.vertex) + " has >= 2 incoming edges (" +
                          std::to_string(o.edge_a) + ", " + std::to_string(o.edge_b) +
                          "); K columns are proportional (angle " +
                          std::to_string(o.column_angle) + ")";
        return finish(rep);
    }

    const auto& dec = std::get<CycleDecomposition>(dec_or_obs);
    const CycleSystem cs = make_cycle_system(g, dec);
    rep.cycle_sizes = dec.sizes;
    rep.base.rank_kb = cs.n();  // cycle blocks are invertible

    if (exact) {
        // The per-cycle closure test needs pairwise distinct abscissas.
        for (int l1 = 0; l1 < cs.cycles(); ++l1)
            for (int l2 = l1 + 1; l2 < cs.cycles(); ++l2)
                if (std::abs(cs.rho[static_cast<std::size_t>(l1)] -
                             cs.rho[static_cast<std::size_t>(l2)]) <= opts.rho_borderline) {
                    rep.base.verdict = Verdict::Inconclusive;
                    rep.base.detail = "cycles " + std::to_string(l1) + " and " +
                                      std::to_string(l2) +
                                      " share their spectral abscissa; the closure test does not "
                                      "separate them";
                    return finish(rep);
                }
        rep.base.notes.push_back("exact verdict is an L^1 statement");
    }

    const LatticePlan plan = plan_lattice(cs, opts);
    rep.base.notes.insert(rep.base.notes.end(), plan.notes.begin(), plan.notes.end());
    rep.test_points = static_cast<int>(plan.points.size());

    std::vector<CycleMargin> margins(static_cast<std::size_t>(cs.cycles()));
    for (int l = 0; l < cs.cycles(); ++l)
        margins[static_cast<std::size_t>(l)] = {
            l, std::numeric_limits<double>::infinity(), {0.0, 0.0},
            plan.cycle_exhaustive[static_cast<std::size_t>(l)]};

    bool hard_failure = false;
    bool borderline = plan.borderline;
    std::complex<double> witness{0.0, 0.0};
    double worst = std::numeric_limits<double>::infinity();
    for (const TestPoint& tp : plan.points) {
        const MarginOutcome mo = point_margin(cs, tp.p, opts);
        if (mo.borderline_membership) borderline = true;
        if (!std::isfinite(mo.margin)) continue;
        auto& cm = margins[static_cast<std::size_t>(tp.owner)];
        if (mo.margin < cm.min_margin) {
            cm.min_margin = mo.margin;
            cm.at = tp.p;
        }
        if (mo.margin < worst) {
            worst = mo.margin;
            witness = tp.p;
        }
        if (mo.margin < opts.fail_tol) hard_failure = true;
    }
    rep.margins = margins;
    rep.base.min_criterion = worst;
    rep.base.argmin = witness;
    if (exact) rep.base.alpha_estimate = worst;

    if (hard_failure) {
        rep.base.verdict = Verdict::NotControllable;
        rep.base.detail = "kernel direction escapes the control range at p = (" +
                          std::to_string(witness.real()) + ", " + std::to_string(witness.imag()) +
                          "i)";
    } else if (plan.exhaustive && !borderline) {
        // Finite complete pattern coverage: a positive margin at every
        // pattern decides controllability outright.
        rep.base.verdict = Verdict::Controllable;
        rep.base.detail = "all spectral patterns enumerated; margins positive";
    } else if (worst <= opts.pass_tol || borderline) {
        rep.base.verdict = Verdict::Inconclusive;
        rep.base.detail = borderline ? "borderline spectral coincidence"
                                     : "margin falls between fail and pass tolerances";
    } else {
        rep.base.verdict = Verdict::Controllable;
        rep.base.detail = plan.exhaustive
                              ? "all spectral patterns enumerated; margins above tolerance"
                              : "sampled spectral patterns keep margins above tolerance";
        if (!plan.exhaustive)
            rep.base.notes.push_back("irrational delay ratios: phase closure sampled, not "
                                     "enumerated");
    }
    return finish(rep);
}

}  // namespace

NetworkReport network_approx_test(const FlowGraph& g, const NetworkOptions& opts) {
    return run_network_test(g, opts, false);
}

NetworkReport network_exact_test(const FlowGraph& g, const NetworkOptions& opts) {
    return run_network_test(g, opts, true);
}

}  // namespace hyctrl
