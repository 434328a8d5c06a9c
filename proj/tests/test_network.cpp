#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "helpers.hpp"
#include "hyctrl/errors.hpp"
#include "hyctrl/network.hpp"

using namespace hyctrl;
using namespace hyctrl::testing;

namespace {

FlowGraph self_loop(double speed = -1.0, double damping = 0.0, double gamma = 1.0) {
    FlowGraph g;
    g.vertex_count = 1;
    g.edges.push_back(FlowEdge{0, 0, PiecewiseConstantFn::constant(0.0, 1.0, speed),
                               PiecewiseConstantFn::constant(0.0, 1.0, damping)});
    g.weights = Eigen::MatrixXd::Ones(1, 1);
    g.gamma = Eigen::MatrixXd::Constant(1, 1, gamma);
    return g;
}

FlowGraph two_cycle(double speed1, double speed2, Eigen::MatrixXd gamma) {
    FlowGraph g;
    g.vertex_count = 2;
    g.edges.push_back(FlowEdge{0, 1, PiecewiseConstantFn::constant(0.0, 1.0, speed1),
                               PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
    g.edges.push_back(FlowEdge{1, 0, PiecewiseConstantFn::constant(0.0, 1.0, speed2),
                               PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
    g.weights = Eigen::MatrixXd::Identity(2, 2);
    g.gamma = std::move(gamma);
    return g;
}

}  // namespace

TEST_CASE("graph validation") {
    SUBCASE("self-loop with unit weight is fine") {
        CHECK(validate_graph(self_loop()).empty());
    }
    SUBCASE("missing incoming edge") {
        FlowGraph g;
        g.vertex_count = 2;
        g.edges.push_back(FlowEdge{0, 0, PiecewiseConstantFn::constant(0.0, 1.0, -1.0),
                                   PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
        g.edges.push_back(FlowEdge{1, 0, PiecewiseConstantFn::constant(0.0, 1.0, -1.0),
                                   PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
        g.weights = Eigen::MatrixXd::Zero(2, 2);
        g.weights(0, 0) = 1.0;
        g.weights(1, 1) = 1.0;
        g.gamma = Eigen::MatrixXd::Zero(2, 1);
        const auto violations = validate_graph(g);
        bool found = false;
        for (const auto& v : violations) found = found || v.rule == "degree";
        CHECK(found);
    }
    SUBCASE("unnormalized weights") {
        FlowGraph g = self_loop();
        g.weights(0, 0) = 0.5;
        const auto violations = validate_graph(g);
        bool found = false;
        for (const auto& v : violations) found = found || v.rule == "weight-normalization";
        CHECK(found);
        CHECK_THROWS_AS(build_network_system(g), std::invalid_argument);
    }
    SUBCASE("positive speed is flagged") {
        FlowGraph g = self_loop(1.0);
        const auto violations = validate_graph(g);
        bool found = false;
        for (const auto& v : violations) found = found || v.rule == "speed";
        CHECK(found);
    }
}

TEST_CASE("network assembly") {
    SUBCASE("self-loop incidence algebra") {
        const auto ns = build_network_system(self_loop());
        CHECK(ns.difference.K(0, 0) == doctest::Approx(1.0));
        CHECK(ns.difference.B(0, 0) == doctest::Approx(1.0));
        CHECK(ns.difference.delays(0) == doctest::Approx(1.0));
    }
    SUBCASE("two-cycle with unit weights is the exchange matrix") {
        const auto ns = build_network_system(two_cycle(-1.0, -std::sqrt(2.0),
                                                       Eigen::MatrixXd::Zero(2, 1)));
        Eigen::MatrixXd want(2, 2);
        want << 0, 1, 1, 0;
        CHECK((ns.difference.K - want).norm() == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("relabeled matrix takes the cyclic block form") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 8; ++trial) {
            const auto g = cycle_graph(rng, {3, 2, 1}, 2);
            const auto dec_or = cycle_decomposition(g);
            REQUIRE(std::holds_alternative<CycleDecomposition>(dec_or));
            const auto& dec = std::get<CycleDecomposition>(dec_or);
            const auto cs = make_cycle_system(g, dec);
            Eigen::MatrixXd want = Eigen::MatrixXd::Zero(cs.n(), cs.n());
            for (int l = 0; l < cs.cycles(); ++l) {
                const int s = cs.block_start(l);
                const int h = cs.block_size(l);
                for (int j = 0; j < h; ++j)
                    want(s + (j + 1) % h, s + j) = std::exp(-cs.zeta(s + j));
            }
            CHECK((cs.K - want).norm() == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("cycle decomposition") {
    std::mt19937_64 rng(10);
    SUBCASE("disjoint cycles of sizes 2 and 1") {
        const auto g = cycle_graph(rng, {2, 1}, 1);
        const auto dec_or = cycle_decomposition(g);
        REQUIRE(std::holds_alternative<CycleDecomposition>(dec_or));
        const auto& dec = std::get<CycleDecomposition>(dec_or);
        CHECK(dec.cycle_count == 2);
        std::vector<int> sizes = dec.sizes;
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<int>{1, 2});
    }
    SUBCASE("single triangle") {
        const auto g = cycle_graph(rng, {3}, 1);
        const auto dec_or = cycle_decomposition(g);
        REQUIRE(std::holds_alternative<CycleDecomposition>(dec_or));
        CHECK(std::get<CycleDecomposition>(dec_or).sizes == std::vector<int>{3});
    }
    SUBCASE("doubled incoming edge produces the obstruction witness") {
        for (int trial = 0; trial < 10; ++trial) {
            const auto g = obstructed_graph(rng, 3 + static_cast<int>(rng() % 3u));
            const auto dec_or = cycle_decomposition(g);
            REQUIRE(std::holds_alternative<Obstruction>(dec_or));
            const auto& obs = std::get<Obstruction>(dec_or);
            CHECK(obs.column_angle < 1e-10);
            const auto ns = build_network_system(g);
            // the two incoming edges at the witness vertex have proportional
            // columns, so the juxtaposed pair loses rank
            CHECK(rank_kb(ns.difference) < ns.difference.n());
            CHECK(g.edges[static_cast<std::size_t>(obs.edge_a)].head == obs.vertex);
            CHECK(g.edges[static_cast<std::size_t>(obs.edge_b)].head == obs.vertex);
        }
    }
}

TEST_CASE("control columns stay inside the range of K") {
    // every control column is a combination of K's columns on a valid graph
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = trial % 2 == 0 ? cycle_graph(rng, {2, 2}, 2)
                                      : obstructed_graph(rng, 4);
        const auto ns = build_network_system(g);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_k(ns.difference.K);
        Eigen::MatrixXd kb(ns.difference.n(), ns.difference.n() + ns.difference.m());
        kb.leftCols(ns.difference.n()) = ns.difference.K;
        kb.rightCols(ns.difference.m()) = ns.difference.B;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_kb(kb);
        CHECK(qr_k.rank() == qr_kb.rank());
    }
}

TEST_CASE("spectral lattice") {
    std::mt19937_64 rng(22);
    SUBCASE("closed forms") {
        // zero damping, total delay 2: points i k pi
        FlowGraph g = two_cycle(-1.0, -1.0, Eigen::MatrixXd::Zero(2, 1));
        const auto dec = std::get<CycleDecomposition>(cycle_decomposition(g));
        const auto cs = make_cycle_system(g, dec);
        const auto pts = spectral_set(cs, 0, -2, 2);
        for (const auto& sp : pts) {
            CHECK(sp.p.real() == doctest::Approx(0.0));
            CHECK(sp.p.imag() == doctest::Approx(sp.k * M_PI));
        }
    }
    SUBCASE("damping shifts the abscissa") {
        FlowGraph g = self_loop(-1.0, std::log(2.0));
        const auto dec = std::get<CycleDecomposition>(cycle_decomposition(g));
        const auto cs = make_cycle_system(g, dec);
        const auto pts = spectral_set(cs, 0, 0, 0);
        CHECK(pts[0].p.real() == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
        CHECK(pts[0].p.imag() == 0.0);  // k = 0 point is real
    }
    SUBCASE("determinant collapses on the lattice and not between") {
        for (int trial = 0; trial < 10; ++trial) {
            const auto g = cycle_graph(rng, {1 + static_cast<int>(rng() % 4u)}, 1);
            const auto dec = std::get<CycleDecomposition>(cycle_decomposition(g));
            const auto cs = make_cycle_system(g, dec);
            const double S = cs.cycle_delay[0];
            for (const auto& sp : spectral_set(cs, 0, -5, 4)) {
                const Eigen::MatrixXcd A = cs.block_matrix(0, sp.p);
                double scale = 1.0;
                for (int j = 0; j < cs.block_size(0); ++j)
                    scale *= std::max(std::exp(sp.p.real() * cs.tau(j)),
                                      std::exp(-cs.zeta(j)));
                CHECK(std::abs(A.determinant()) <= 1e-9 * scale);
                // rank drops by exactly one (scales guarded for 1x1 blocks,
                // whose only singular value is already the vanishing one)
                Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
                const auto sv = svd.singularValues();
                if (cs.block_size(0) > 1)
                    CHECK(sv(sv.size() - 2) > 1e-6 * sv(0));
                CHECK(sv(sv.size() - 1) <= 1e-9 * (sv(0) + 1.0) * cs.block_size(0));
                // kernel vector annihilates from the left under the
                // unconjugated pairing
                const auto y = kernel_vector(cs, 0, sp.p);
                CHECK((y.transpose() * A).norm() <= 1e-10 * y.norm() * (A.norm() + 1.0));
                // midpoints stay uniformly regular
                const auto mid = sp.p + std::complex<double>(0.0, M_PI / S);
                CHECK(std::abs(cs.block_matrix(0, mid).determinant()) > 1e-3);
            }
        }
    }
    SUBCASE("kernel vector structure") {
        FlowGraph g = two_cycle(-1.0, -0.5, Eigen::MatrixXd::Zero(2, 1));
        const auto dec = std::get<CycleDecomposition>(cycle_decomposition(g));
        const auto cs = make_cycle_system(g, dec);
        const auto sp = spectral_set(cs, 0, 1, 1)[0];
        const auto y = kernel_vector(cs, 0, sp.p);
        CHECK(y(0) == std::complex<double>(1.0, 0.0));
        const std::complex<double> want = std::exp(sp.p * cs.tau(0) + cs.zeta(0));
        CHECK(std::abs(y(1) - want) < 1e-12);
        CHECK_THROWS_AS(kernel_vector(cs, 0, sp.p + std::complex<double>(0.4, 0.3)),
                        NotSpectral);
    }
}

TEST_CASE("network approximate controllability") {
    std::mt19937_64 rng(30);
    SUBCASE("exchange network with one vertex control is controllable") {
        Eigen::MatrixXd gamma(2, 1);
        gamma << 0, 1;
        const auto g = two_cycle(-1.0, -std::sqrt(2.0), gamma);
        const auto rep = network_approx_test(g);
        CHECK(rep.base.verdict == Verdict::Controllable);
        CHECK(rep.cycle_sizes == std::vector<int>{2});
    }
    SUBCASE("no control cannot be controllable") {
        const auto g = two_cycle(-1.0, -0.5, Eigen::MatrixXd::Zero(2, 1));
        const auto rep = network_approx_test(g);
        CHECK(rep.base.verdict == Verdict::NotControllable);
    }
    SUBCASE("obstruction reports the witness") {
        const auto g = obstructed_graph(rng, 4);
        const auto rep = network_approx_test(g);
        CHECK(rep.base.verdict == Verdict::NotControllable);
        REQUIRE(rep.obstruction.has_value());
        CHECK(rep.obstruction->column_angle < 1e-10);
    }
    SUBCASE("twin cycles sharing one control line fail") {
        // two identical self-loops, a single control feeding only the first
        FlowGraph g;
        g.vertex_count = 2;
        for (int v = 0; v < 2; ++v)
            g.edges.push_back(FlowEdge{v, v, PiecewiseConstantFn::constant(0.0, 1.0, -1.0),
                                       PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
        g.weights = Eigen::MatrixXd::Identity(2, 2);
        g.gamma = Eigen::MatrixXd::Zero(2, 1);
        g.gamma(0, 0) = 1.0;
        const auto rep = network_approx_test(g);
        CHECK(rep.base.verdict == Verdict::NotControllable);

        // separate controls on each loop restore controllability
        FlowGraph g2 = g;
        g2.gamma = Eigen::MatrixXd::Identity(2, 2);
        CHECK(network_approx_test(g2).base.verdict == Verdict::Controllable);
    }
}

TEST_CASE("network exact controllability") {
    std::mt19937_64 rng(31);
    SUBCASE("single self-loop is exactly controllable iff its control row is nonzero") {
        CHECK(network_exact_test(self_loop(-1.0, 0.3, 2.0)).base.verdict ==
              Verdict::Controllable);
        CHECK(network_exact_test(self_loop(-1.0, 0.3, 0.0)).base.verdict ==
              Verdict::NotControllable);
    }
    SUBCASE("commensurable two-cycle phases enumerate exactly") {
        Eigen::MatrixXd gamma(2, 1);
        gamma << 0, 1;
        const auto g = two_cycle(-1.0, -1.0, gamma);
        const auto rep = network_exact_test(g);
        CHECK(rep.base.verdict == Verdict::Controllable);
        REQUIRE(!rep.margins.empty());
        CHECK(rep.margins[0].exhaustive);
        // kernel (1, +-e^{p tau}) against gamma = (0,1): margin 1/sqrt(2)
        CHECK(rep.margins[0].min_margin == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    }
    SUBCASE("coincident abscissas fall back to inconclusive") {
        FlowGraph g;
        g.vertex_count = 2;
        for (int v = 0; v < 2; ++v)
            g.edges.push_back(FlowEdge{v, v, PiecewiseConstantFn::constant(0.0, 1.0, -1.0),
                                       PiecewiseConstantFn::constant(0.0, 1.0, 0.0)});
        g.weights = Eigen::MatrixXd::Identity(2, 2);
        g.gamma = Eigen::MatrixXd::Identity(2, 2);
        CHECK(network_exact_test(g).base.verdict == Verdict::Inconclusive);
    }
}

TEST_CASE("network and generic verdicts agree on commensurable instances") {
    std::mt19937_64 rng(32);
    int agreements = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> sizes;
        sizes.push_back(1 + static_cast<int>(rng() % 3u));
        if (trial % 2 == 0) sizes.push_back(1 + static_cast<int>(rng() % 2u));
        const auto g = cycle_graph(rng, sizes, 1 + static_cast<int>(rng() % 2u),
                                   /*integer_delays=*/true, /*with_damping=*/false);
        const auto net = network_approx_test(g);
        const auto ns = build_network_system(g);
        const auto aug = commensurable_reduce(ns.difference);
        REQUIRE(aug.has_value());
        const Verdict kalman =
            aug->controllable() ? Verdict::Controllable : Verdict::NotControllable;
        CHECK(net.base.verdict == kalman);
        agreements += net.base.verdict == kalman ? 1 : 0;
    }
    CHECK(agreements == 20);
}
