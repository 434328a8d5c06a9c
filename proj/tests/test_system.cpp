#include <doctest.h>

#include <cmath>
#include <random>

#include "hyctrl/errors.hpp"
#include "hyctrl/system.hpp"

using namespace hyctrl;

namespace {

HyperbolicSystem scalar_system(PiecewiseConstantFn speed, PiecewiseConstantFn damping,
                               bool positive) {
    HyperbolicSystem sys;
    sys.speeds.push_back(std::move(speed));
    sys.dampings.push_back(std::move(damping));
    sys.boundary_matrix = Eigen::MatrixXd::Identity(1, 1);
    sys.control_matrix = Eigen::MatrixXd::Zero(1, 1);
    sys.n_plus = positive ? 1 : 0;
    return sys;
}

PiecewiseConstantFn unit_const(double v) { return PiecewiseConstantFn::constant(0.0, 1.0, v); }

HyperbolicSystem random_two_component(std::mt19937_64& rng, bool with_damping) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    HyperbolicSystem sys;
    sys.n_plus = 1;
    sys.speeds.push_back(PiecewiseConstantFn({0.0, 0.3 + 0.3 * std::abs(u(rng)), 1.0},
                                             {0.7 + std::abs(u(rng)), 1.2 + std::abs(u(rng))}));
    sys.speeds.push_back(PiecewiseConstantFn({0.0, 0.55, 1.0},
                                             {-0.8 - std::abs(u(rng)), -1.5 - std::abs(u(rng))}));
    for (int i = 0; i < 2; ++i)
        sys.dampings.push_back(with_damping
                                   ? PiecewiseConstantFn({0.0, 0.5, 1.0}, {u(rng), u(rng)})
                                   : unit_const(0.0));
    sys.boundary_matrix = Eigen::MatrixXd::NullaryExpr(2, 2, [&]() { return u(rng); });
    sys.control_matrix = Eigen::MatrixXd::NullaryExpr(2, 1, [&]() { return u(rng); });
    return sys;
}

BoundaryState random_state(std::mt19937_64& rng, const DifferenceSystem& sys, int pieces) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BoundaryState s;
    for (int i = 0; i < sys.n(); ++i) {
        const double tau = sys.delays(i);
        std::vector<double> bp{-tau}, vals;
        for (int p = 1; p < pieces; ++p) bp.push_back(-tau + tau * p / pieces + 0.05 * tau * u(rng) / pieces);
        bp.push_back(0.0);
        for (int p = 0; p < pieces; ++p) vals.push_back(u(rng));
        s.components.emplace_back(std::move(bp), std::move(vals));
    }
    return s;
}

}  // namespace

TEST_CASE("travel times from constant and piecewise speeds") {
    // constant speed -2 crosses in 1/2
    auto a = scalar_system(unit_const(-2.0), unit_const(0.0), false);
    CHECK(compute_delays(a)(0) == doctest::Approx(0.5).epsilon(1e-15));

    // 1 on [0, 1/2], 2 on [1/2, 1] -> 3/4
    auto b = scalar_system(PiecewiseConstantFn({0.0, 0.5, 1.0}, {1.0, 2.0}), unit_const(0.0),
                           true);
    CHECK(compute_delays(b)(0) == doctest::Approx(0.75).epsilon(1e-15));

    auto c = scalar_system(unit_const(1.0), unit_const(0.0), true);
    CHECK(compute_delays(c)(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("invalid speeds are rejected") {
    CHECK_THROWS_AS(compute_delays(scalar_system(unit_const(0.0), unit_const(0.0), true)),
                    InvalidSpeed);
    // declared positive but negative-valued
    CHECK_THROWS_AS(compute_delays(scalar_system(unit_const(-1.0), unit_const(0.0), true)),
                    InvalidSpeed);
}

TEST_CASE("damping integrals") {
    auto a = scalar_system(unit_const(1.0), unit_const(0.0), true);
    CHECK(compute_damping_integrals(a)(0) == 0.0);

    auto b = scalar_system(unit_const(1.0), unit_const(1.0), true);
    CHECK(compute_damping_integrals(b)(0) == doctest::Approx(1.0).epsilon(1e-15));

    auto c = scalar_system(unit_const(-1.0), PiecewiseConstantFn({0.0, 0.5, 1.0}, {2.0, 0.0}),
                           false);
    CHECK(compute_damping_integrals(c)(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reduction to the delay system") {
    SUBCASE("zero damping keeps the boundary matrix") {
        std::mt19937_64 rng(3);
        auto sys = random_two_component(rng, false);
        const auto d = to_difference_system(sys);
        CHECK((d.K - sys.boundary_matrix).norm() == 0.0);
        CHECK((d.B - sys.control_matrix).norm() == 0.0);
    }
    SUBCASE("damping scales columns by e^{-zeta}") {
        HyperbolicSystem sys;
        sys.n_plus = 2;
        sys.speeds = {unit_const(1.0), unit_const(1.0)};
        sys.dampings = {unit_const(std::log(2.0)), unit_const(std::log(3.0))};
        sys.boundary_matrix = Eigen::MatrixXd::Identity(2, 2);
        sys.control_matrix = Eigen::MatrixXd::Zero(2, 1);
        const auto d = to_difference_system(sys);
        CHECK(d.K(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(d.K(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(d.K(0, 1) == 0.0);
    }
    SUBCASE("two-mode exchange fixture") {
        HyperbolicSystem sys;
        sys.n_plus = 0;
        sys.speeds = {unit_const(-1.0), unit_const(-std::sqrt(2.0))};
        sys.dampings = {unit_const(0.0), unit_const(0.0)};
        sys.boundary_matrix.resize(2, 2);
        sys.boundary_matrix << 0, 1, 1, 0;
        sys.control_matrix.resize(2, 1);
        sys.control_matrix << 0, 1;
        const auto d = to_difference_system(sys);
        CHECK(d.K(0, 1) == 1.0);
        CHECK(d.K(1, 0) == 1.0);
        CHECK(d.delays(0) == doctest::Approx(1.0));
        CHECK(d.delays(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(d.total_delay() == doctest::Approx(1.0 + 1.0 / std::sqrt(2.0)));
    }
}

TEST_CASE("characteristic coordinate endpoints and monotonicity") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = random_two_component(rng, true);
        const auto tau = compute_delays(sys);
        for (int i = 0; i < 2; ++i) {
            const bool fwd = sys.positive_direction(i);
            CHECK(psi(sys, i, fwd ? 0.0 : 1.0) == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(psi(sys, i, fwd ? 1.0 : 0.0) == doctest::Approx(tau(i)).epsilon(1e-12));
            double prev = psi(sys, i, 0.0);
            for (int s = 1; s <= 20; ++s) {
                const double cur = psi(sys, i, s / 20.0);
                if (fwd) CHECK(cur > prev);
                else CHECK(cur < prev);
                prev = cur;
            }
            for (int s = 0; s <= 20; ++s) {
                const double x = s / 20.0;
                CHECK(psi_inverse(sys, i, psi(sys, i, x)) == doctest::Approx(x).epsilon(1e-11));
            }
        }
        // delays sit between the speed extremes
        for (int i = 0; i < 2; ++i) {
            double lo = 1e300, hi = 0.0;
            for (double v : sys.speeds[static_cast<std::size_t>(i)].values()) {
                lo = std::min(lo, std::abs(v));
                hi = std::max(hi, std::abs(v));
            }
            CHECK(tau(i) >= 1.0 / hi - 1e-12);
            CHECK(tau(i) <= 1.0 / lo + 1e-12);
        }
    }
}

TEST_CASE("profile maps: undamped closed forms") {
    SUBCASE("rightward unit speed: y(t) = r(-t)") {
        auto sys = scalar_system(unit_const(1.0), unit_const(0.0), true);
        PiecewiseConstantFn r({0.0, 0.25, 1.0}, {2.0, -1.0});
        const auto y = state_to_boundary(sys, std::vector<PiecewiseConstantFn>{r});
        for (int s = 1; s < 40; ++s) {
            const double t = -s / 41.0;
            CHECK(y.components[0].value(t) == doctest::Approx(r.value(-t)).epsilon(1e-14));
        }
    }
    SUBCASE("leftward unit speed: y(t) = r(1 + t)") {
        auto sys = scalar_system(unit_const(-1.0), unit_const(0.0), false);
        PiecewiseConstantFn r({0.0, 0.7, 1.0}, {3.0, 5.0});
        const auto y = state_to_boundary(sys, std::vector<PiecewiseConstantFn>{r});
        for (int s = 1; s < 40; ++s) {
            const double t = -s / 41.0;
            CHECK(y.components[0].value(t) == doctest::Approx(r.value(1.0 + t)).epsilon(1e-14));
        }
    }
}

TEST_CASE("profile maps invert each other") {
    std::mt19937_64 rng(17);
    SUBCASE("piecewise round trip without damping") {
        for (int trial = 0; trial < 5; ++trial) {
            const auto sys = random_two_component(rng, false);
            const auto d = to_difference_system(sys);
            const auto phi = random_state(rng, d, 4);
            const auto round = state_to_boundary(sys, boundary_to_state(sys, phi));
            for (int i = 0; i < 2; ++i)
                for (int s = 1; s < 60; ++s) {
                    const double t = -d.delays(i) * (s + 0.31) / 61.0;
                    CHECK(round.components[static_cast<std::size_t>(i)].value(t) ==
                          doctest::Approx(phi.components[static_cast<std::size_t>(i)].value(t))
                              .epsilon(1e-12));
                }
        }
    }
    SUBCASE("damped round trip stays exact (rates cancel)") {
        for (int trial = 0; trial < 5; ++trial) {
            const auto sys = random_two_component(rng, true);
            const auto d = to_difference_system(sys);
            const auto phi = random_state(rng, d, 3);
            const auto profile = boundary_to_state(sys, phi);
            const auto round = state_to_boundary(sys, profile);  // collapses exactly
            for (int i = 0; i < 2; ++i)
                for (int s = 1; s < 60; ++s) {
                    const double t = -d.delays(i) * (s + 0.43) / 61.0;
                    CHECK(round.components[static_cast<std::size_t>(i)].value(t) ==
                          doctest::Approx(phi.components[static_cast<std::size_t>(i)].value(t))
                              .epsilon(1e-12));
                }
        }
    }
    SUBCASE("pointwise inverse with damping, both directions") {
        for (int trial = 0; trial < 5; ++trial) {
            const auto sys = random_two_component(rng, true);
            const auto d = to_difference_system(sys);
            const auto phi = random_state(rng, d, 3);
            const auto profile = boundary_to_state(sys, phi);
            std::uniform_real_distribution<double> u(0.01, 0.99);
            for (int s = 0; s < 50; ++s) {
                const int i = static_cast<int>(rng() % 2);
                const double x = u(rng);
                CHECK(boundary_to_state_value(sys, phi, i, x) ==
                      doctest::Approx(profile[static_cast<std::size_t>(i)].value(x))
                          .epsilon(1e-12));
                const double t = -d.delays(i) * u(rng);
                CHECK(state_to_boundary_value(sys, profile, i, t) ==
                      doctest::Approx(phi.components[static_cast<std::size_t>(i)].value(t))
                          .epsilon(1e-12));
            }
        }
    }
    SUBCASE("genuinely exponential image refuses to collapse") {
        auto sys = scalar_system(unit_const(1.0), unit_const(1.0), true);
        PiecewiseConstantFn r({0.0, 1.0}, {1.0});
        CHECK_THROWS_AS(state_to_boundary(sys, std::vector<PiecewiseConstantFn>{r}),
                        std::domain_error);
        // but the exact profile form is available
        const auto prof = state_to_boundary_profile(
            sys, PdeProfile{PiecewiseExpFn::from_constant(r)});
        CHECK(prof[0].value(-0.5) == doctest::Approx(std::exp(0.5)).epsilon(1e-13));
    }
}

TEST_CASE("state norms") {
    DifferenceSystem d;
    d.K = Eigen::MatrixXd::Zero(2, 2);
    d.B = Eigen::MatrixXd::Zero(2, 1);
    d.delays.resize(2);
    d.delays << 1.0, 2.0;
    d.damping_integrals = Eigen::VectorXd::Zero(2);
    BoundaryState s;
    s.components.push_back(PiecewiseConstantFn::constant(-1.0, 0.0, 3.0));
    s.components.push_back(PiecewiseConstantFn::constant(-2.0, 0.0, -1.0));
    s.check_domains(d);
    CHECK(s.sigma_norm(2.0) == doctest::Approx(std::sqrt(9.0 + 2.0)));
    CHECK(s.sigma_norm(1.0) == doctest::Approx(5.0));
    BoundaryState bad;
    bad.components.push_back(PiecewiseConstantFn::constant(-1.0, 0.0, 0.0));
    bad.components.push_back(PiecewiseConstantFn::constant(-1.0, 0.0, 0.0));
    CHECK_THROWS_AS(bad.check_domains(d), std::domain_error);
}
