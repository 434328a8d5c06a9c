#include "hyctrl/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyctrl/errors.hpp"

namespace hyctrl {

namespace {

constexpr double kUnitTol = 1e-9;

void check_unit_domain(const PiecewiseConstantFn& f, const std::string& what) {
    if (std::abs(f.domain_lo()) > kUnitTol || std::abs(f.domain_hi() - 1.0) > kUnitTol)
        throw std::invalid_argument(what + " must be defined on [0, 1]");
}

// Integrate op(speed, damping) over [a, b] exactly on the merged piece grid.
template <typename Op>
double integrate_pair(const PiecewiseConstantFn& speed, const PiecewiseConstantFn& damping,
                      double a, double b, Op op) {
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> grid;
    grid.push_back(a);
    for (double x : speed.breakpoints())
        if (x > a && x < b) grid.push_back(x);
    for (double x : damping.breakpoints())
        if (x > a && x < b) grid.push_back(x);
    grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double w = grid[j + 1] - grid[j];
        if (w <= 0.0) continue;
        const double mid = 0.5 * (grid[j] + grid[j + 1]);
        acc += op(speed.value(mid), damping.value(mid)) * w;
    }
    return sign * acc;
}

}  // namespace

void HyperbolicSystem::validate() const {
    const int dim = n();
    if (dim < 1) throw std::invalid_argument("system needs at least one component");
    if (n_plus < 0 || n_plus > dim)
        throw std::invalid_argument("n_plus must lie in [0, n]");
    if (static_cast<int>(dampings.size()) != dim)
        throw std::invalid_argument("damping profile count must equal n");
    if (boundary_matrix.rows() != dim || boundary_matrix.cols() != dim)
        throw std::invalid_argument("boundary matrix must be n x n");
    if (control_matrix.rows() != dim)
        throw std::invalid_argument("control matrix must have n rows");
    if (q < 1.0) throw std::invalid_argument("norm parameter q must be >= 1");
    for (int i = 0; i < dim; ++i) {
        check_unit_domain(speeds[i], "speed profile " + std::to_string(i));
        check_unit_domain(dampings[i], "damping profile " + std::to_string(i));
        for (double v : speeds[i].values()) {
            if (v == 0.0)
                throw InvalidSpeed("speed profile " + std::to_string(i) + " vanishes");
            if (positive_direction(i) != (v > 0.0))
                throw InvalidSpeed("speed profile " + std::to_string(i) +
                                   " changes sign against its declared direction");
        }
    }
}

void DifferenceSystem::validate() const {
    const int dim = n();
    if (dim < 1) throw std::invalid_argument("system needs at least one component");
    if (K.rows() != dim || K.cols() != dim) throw std::invalid_argument("K must be n x n");
    if (B.rows() != dim) throw std::invalid_argument("B must have n rows");
    for (int i = 0; i < dim; ++i)
        if (!(delays(i) > 0.0)) throw std::invalid_argument("delays must be strictly positive");
}

double BoundaryState::sigma_norm(double q) const {
    double acc = 0.0;
    for (const auto& c : components) acc += std::pow(c.lq_norm(q), q);
    return std::pow(acc, 1.0 / q);
}

BoundaryState BoundaryState::zero(const DifferenceSystem& sys) {
    BoundaryState s;
    s.components.reserve(sys.n());
    for (int i = 0; i < sys.n(); ++i)
        s.components.push_back(PiecewiseConstantFn::constant(-sys.delays(i), 0.0, 0.0));
    return s;
}

void BoundaryState::check_domains(const DifferenceSystem& sys) const {
    if (n() != sys.n()) throw std::domain_error("state component count mismatch");
    for (int i = 0; i < n(); ++i) {
        const double tau = sys.delays(i);
        const double tol = 1e-9 * std::max(1.0, tau);
        if (std::abs(components[i].domain_lo() + tau) > tol ||
            std::abs(components[i].domain_hi()) > tol)
            throw std::domain_error("state component " + std::to_string(i) +
                                    " must live on [-tau_i, 0]");
    }
}

Eigen::VectorXd compute_delays(const HyperbolicSystem& sys) {
    sys.validate();
    Eigen::VectorXd tau(sys.n());
    for (int i = 0; i < sys.n(); ++i)
        tau(i) = integrate_pair(sys.speeds[i], sys.dampings[i], 0.0, 1.0,
                                [](double lam, double) { return 1.0 / std::abs(lam); });
    return tau;
}

Eigen::VectorXd compute_damping_integrals(const HyperbolicSystem& sys) {
    sys.validate();
    Eigen::VectorXd zeta(sys.n());
    for (int i = 0; i < sys.n(); ++i)
        zeta(i) = integrate_pair(sys.speeds[i], sys.dampings[i], 0.0, 1.0,
                                 [](double lam, double d) { return d / std::abs(lam); });
    return zeta;
}

DifferenceSystem to_difference_system(const HyperbolicSystem& sys) {
    DifferenceSystem d;
    d.delays = compute_delays(sys);
    d.damping_integrals = compute_damping_integrals(sys);
    d.K = sys.boundary_matrix * (-d.damping_integrals).array().exp().matrix().asDiagonal();
    d.B = sys.control_matrix;
    return d;
}

double travel_time(const HyperbolicSystem& sys, int i, double a, double b) {
    return integrate_pair(sys.speeds[i], sys.dampings[i], a, b,
                          [](double lam, double) { return 1.0 / lam; });
}

double damping_line_integral(const HyperbolicSystem& sys, int i, double a, double b) {
    return integrate_pair(sys.speeds[i], sys.dampings[i], a, b,
                          [](double lam, double d) { return d / lam; });
}

double psi(const HyperbolicSystem& sys, int i, double x) {
    // psi' = 1/lambda_i in both directions; only the anchor differs.
    if (sys.positive_direction(i)) return travel_time(sys, i, 0.0, x);
    return -travel_time(sys, i, x, 1.0);
}

double psi_inverse(const HyperbolicSystem& sys, int i, double s) {
    const PiecewiseConstantFn& lam = sys.speeds[i];
    const double tau = integrate_pair(lam, lam, 0.0, 1.0,
                                      [](double l, double) { return 1.0 / std::abs(l); });
    const double slack = 1e-9 * std::max(1.0, tau);
    if (s < -slack || s > tau + slack)
        throw std::domain_error("psi_inverse argument outside [0, tau_i]");
    s = std::clamp(s, 0.0, tau);
    const auto& bp = lam.breakpoints();
    double acc = sys.positive_direction(i) ? 0.0 : tau;
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        const double w = bp[j + 1] - bp[j];
        const double slope = 1.0 / lam.value(0.5 * (bp[j] + bp[j + 1]));
        const double next = acc + slope * w;
        const bool inside = slope > 0.0 ? (s <= next + slack && s >= acc - slack)
                                        : (s >= next - slack && s <= acc + slack);
        if (inside || j + 2 == bp.size())
            return std::clamp(bp[j] + (s - acc) / slope, 0.0, 1.0);
        acc = next;
    }
    return 1.0;
}

double damping_exponent(const HyperbolicSystem& sys, int i, double x) {
    if (sys.positive_direction(i)) return -damping_line_integral(sys, i, 0.0, x);
    return damping_line_integral(sys, i, x, 1.0);
}

namespace {

double damping_rate(const HyperbolicSystem& sys, int i, double x) {
    // d/dx of damping_exponent, constant on each merged coefficient piece
    return -sys.dampings[i].value(x) / sys.speeds[i].value(x);
}

}  // namespace

PdeProfile boundary_to_state(const HyperbolicSystem& sys, const BoundaryState& y) {
    sys.validate();
    PdeProfile r;
    r.reserve(sys.n());
    for (int i = 0; i < sys.n(); ++i) {
        std::vector<double> grid{0.0, 1.0};
        for (double b : sys.speeds[i].breakpoints()) grid.push_back(b);
        for (double b : sys.dampings[i].breakpoints()) grid.push_back(b);
        for (double b : y.components[i].breakpoints()) {
            const double x = psi_inverse(sys, i, -b);
            if (x > 1e-12 && x < 1.0 - 1e-12) grid.push_back(x);
        }
        std::sort(grid.begin(), grid.end());
        std::vector<double> bp{0.0};
        for (double x : grid)
            if (x > bp.back() + 1e-12 && x < 1.0 - 1e-12) bp.push_back(x);
        bp.push_back(1.0);

        std::vector<double> coefs(bp.size() - 1), rates(bp.size() - 1);
        for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
            const double mid = 0.5 * (bp[j] + bp[j + 1]);
            const double v = y.components[i].value(-psi(sys, i, mid));
            coefs[j] = v * std::exp(damping_exponent(sys, i, bp[j]));
            rates[j] = damping_rate(sys, i, mid);
        }
        r.emplace_back(std::move(bp), std::move(coefs), std::move(rates));
    }
    return r;
}

double boundary_to_state_value(const HyperbolicSystem& sys, const BoundaryState& y, int i,
                               double x) {
    return std::exp(damping_exponent(sys, i, x)) * y.components[i].value(-psi(sys, i, x));
}

std::vector<PiecewiseExpFn> state_to_boundary_profile(const HyperbolicSystem& sys,
                                                      const PdeProfile& r) {
    sys.validate();
    if (static_cast<int>(r.size()) != sys.n())
        throw std::domain_error("profile component count mismatch");
    std::vector<PiecewiseExpFn> out;
    out.reserve(sys.n());
    const Eigen::VectorXd taus = compute_delays(sys);
    for (int i = 0; i < sys.n(); ++i) {
        const double tau = taus(i);
        std::vector<double> grid{-tau, 0.0};
        auto add_x = [&](double x) {
            const double t = -psi(sys, i, x);
            if (t > -tau + 1e-12 * std::max(1.0, tau) && t < -1e-12) grid.push_back(t);
        };
        for (double b : r[i].breakpoints()) add_x(b);
        for (double b : sys.speeds[i].breakpoints()) add_x(b);
        for (double b : sys.dampings[i].breakpoints()) add_x(b);
        std::sort(grid.begin(), grid.end());
        std::vector<double> bp{-tau};
        for (double t : grid)
            if (t > bp.back() + 1e-12 * std::max(1.0, tau) && t < -1e-12 * std::max(1.0, tau))
                bp.push_back(t);
        bp.push_back(0.0);

        std::vector<double> coefs(bp.size() - 1), rates(bp.size() - 1);
        const auto& rbp = r[i].breakpoints();
        for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
            const double mid = 0.5 * (bp[j] + bp[j + 1]);
            const double xmid = psi_inverse(sys, i, -mid);
            // x(t) is affine on the piece with slope -lambda; the source rate
            // and the damping rate cancel exactly on round trips.
            auto it = std::upper_bound(rbp.begin(), rbp.end(), xmid);
            std::size_t pj = it == rbp.begin() ? 0 : static_cast<std::size_t>(it - rbp.begin()) - 1;
            pj = std::min(pj, r[i].rates().size() - 1);
            const double dxdt = -sys.speeds[i].value(xmid);
            rates[j] = (r[i].rates()[pj] - damping_rate(sys, i, xmid)) * dxdt;
            // Anchor the coefficient at the piece midpoint: interior points
            // avoid reading the wrong side of a source breakpoint.
            const double fmid = std::exp(-damping_exponent(sys, i, xmid)) * r[i].value(xmid);
            coefs[j] = fmid * std::exp(-rates[j] * (mid - bp[j]));
        }
        out.emplace_back(std::move(bp), std::move(coefs), std::move(rates));
    }
    return out;
}

double state_to_boundary_value(const HyperbolicSystem& sys, const PdeProfile& r, int i,
                               double t) {
    const double x = psi_inverse(sys, i, -t);
    return std::exp(-damping_exponent(sys, i, x)) * r[i].value(x);
}

BoundaryState state_to_boundary(const HyperbolicSystem& sys, const PdeProfile& r) {
    BoundaryState y;
    for (auto& f : state_to_boundary_profile(sys, r)) y.components.push_back(f.to_constant(1e-10));
    return y;
}

BoundaryState state_to_boundary(const HyperbolicSystem& sys,
                                const std::vector<PiecewiseConstantFn>& r) {
    PdeProfile profile;
    profile.reserve(r.size());
    for (const auto& f : r) profile.push_back(PiecewiseExpFn::from_constant(f));
    return state_to_boundary(sys, profile);
}

}  // namespace hyctrl
