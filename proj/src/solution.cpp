#include "hyctrl/solution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "hyctrl/errors.hpp"

namespace hyctrl {

Eigen::VectorXd ControlSignal::value(double t) const {
    Eigen::VectorXd v(m());
    for (int r = 0; r < m(); ++r) v(r) = channels[static_cast<std::size_t>(r)].value(t);
    return v;
}

double ControlSignal::lq_norm(double q) const {
    if (channels.empty()) return 0.0;
    std::vector<double> grid{channels[0].domain_lo(), channels[0].domain_hi()};
    for (const auto& c : channels)
        for (double b : c.breakpoints()) grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double w = grid[j + 1] - grid[j];
        if (w <= 0.0) continue;
        acc += std::pow(value(0.5 * (grid[j] + grid[j + 1])).norm(), q) * w;
    }
    return std::pow(acc, 1.0 / q);
}

ControlSignal ControlSignal::zero(int m, double horizon) {
    ControlSignal u;
    u.horizon = horizon;
    for (int r = 0; r < m; ++r)
        u.channels.push_back(PiecewiseConstantFn::constant(0.0, horizon, 0.0));
    return u;
}

void ControlSignal::validate() const {
    for (const auto& c : channels) {
        const double tol = 1e-9 * std::max(1.0, horizon);
        if (std::abs(c.domain_lo()) > tol || std::abs(c.domain_hi() - horizon) > tol)
            throw std::domain_error("control channel must be defined on [0, horizon]");
    }
}

Trajectory::Trajectory(DifferenceSystem sys, BoundaryState initial, ControlSignal control,
                       double horizon)
    : sys_(std::move(sys)), initial_(std::move(initial)), control_(std::move(control)),
      horizon_(horizon) {
    sys_.validate();
    initial_.check_domains(sys_);
    if (control_.channels.empty()) control_ = ControlSignal::zero(sys_.m(), horizon_);
    control_.validate();
    if (control_.m() != sys_.m()) throw std::invalid_argument("control channel count mismatch");
    if (horizon_ < 0.0) throw std::invalid_argument("horizon must be nonnegative");
    if (control_.horizon < horizon_ - 1e-9 * std::max(1.0, horizon_))
        throw std::domain_error("control horizon shorter than trajectory horizon");
}

namespace {

// Recursion state for one top-level query time. Node l carries y(base - tau.l)
// as a full vector; components at negative times read the initial data.
struct DescentMemo {
    const DifferenceSystem& sys;
    const BoundaryState& initial;
    const ControlSignal& control;
    double base;
    std::unordered_map<MultiIndex, Eigen::VectorXd, MultiIndexHash> memo;

    const Eigen::VectorXd& node(MultiIndex& l) {
        auto it = memo.find(l);
        if (it != memo.end()) return it->second;
        double time = base;
        for (int i = 0; i < sys.n(); ++i) time -= l[static_cast<std::size_t>(i)] * sys.delays(i);
        Eigen::VectorXd w(sys.n());
        for (int j = 0; j < sys.n(); ++j) {
            const double arg = time - sys.delays(j);
            if (arg < 0.0) {
                w(j) = initial.components[static_cast<std::size_t>(j)].value(arg);
            } else {
                l[static_cast<std::size_t>(j)] += 1;
                w(j) = node(l)(j);
                l[static_cast<std::size_t>(j)] -= 1;
            }
        }
        Eigen::VectorXd y = sys.K * w;
        if (sys.m() > 0) y += sys.B * control.value(time);
        return memo.emplace(l, std::move(y)).first->second;
    }
};

}  // namespace

double Trajectory::value(int i, double t) const {
    if (i < 0 || i >= sys_.n()) throw std::invalid_argument("component index out of range");
    const double tol = 1e-9 * std::max(1.0, horizon_);
    if (t > horizon_ + tol || t < -sys_.delays(i) - tol)
        throw OutOfHorizon("time " + std::to_string(t) + " outside [-tau_i, horizon]");
    if (t < 0.0) return initial_.components[static_cast<std::size_t>(i)].value(t);
    DescentMemo d{sys_, initial_, control_, std::min(t, horizon_), {}};
    MultiIndex root(static_cast<std::size_t>(sys_.n()), 0);
    return d.node(root)(i);
}

Eigen::VectorXd Trajectory::values(double t) const {
    const double tol = 1e-9 * std::max(1.0, horizon_);
    if (t < -tol || t > horizon_ + tol) throw OutOfHorizon("time outside [0, horizon]");
    DescentMemo d{sys_, initial_, control_, std::clamp(t, 0.0, horizon_), {}};
    MultiIndex root(static_cast<std::size_t>(sys_.n()), 0);
    return d.node(root);
}

BoundaryState Trajectory::state_at(double t) const {
    const double tol = 1e-9 * std::max(1.0, horizon_);
    if (t < -tol || t > horizon_ + tol) throw OutOfHorizon("time outside [0, horizon]");
    t = std::clamp(t, 0.0, horizon_);

    // Candidate breakpoint offsets: initial-data and control breakpoints
    // shifted by every reachable delay combination.
    std::vector<double> base_offsets{0.0};
    for (const auto& c : initial_.components)
        for (double b : c.breakpoints()) base_offsets.push_back(b);
    for (const auto& c : control_.channels)
        for (double b : c.breakpoints()) base_offsets.push_back(b);

    const auto lattice = multi_indices_within(sys_.delays, t + sys_.max_delay());
    BoundaryState out;
    out.components.reserve(static_cast<std::size_t>(sys_.n()));
    for (int i = 0; i < sys_.n(); ++i) {
        const double tau = sys_.delays(i);
        const double lo = t - tau;
        std::vector<double> cand{lo, t};
        for (const MultiIndex& l : lattice) {
            double shift = 0.0;
            for (int k = 0; k < sys_.n(); ++k)
                shift += l[static_cast<std::size_t>(k)] * sys_.delays(k);
            for (double b : base_offsets) {
                const double s = shift + b;
                if (s > lo && s < t) cand.push_back(s);
            }
        }
        std::sort(cand.begin(), cand.end());
        const double merge = 1e-12 * std::max(1.0, t + tau);
        std::vector<double> bp{lo};
        for (double s : cand)
            if (s > bp.back() + merge && s < t - merge) bp.push_back(s);
        bp.push_back(t);
        std::vector<double> vals(bp.size() - 1);
        for (std::size_t j = 0; j + 1 < bp.size(); ++j)
            vals[j] = value(i, 0.5 * (bp[j] + bp[j + 1]));
        for (double& s : bp) s -= t;  // re-anchor to [-tau_i, 0]
        out.components.emplace_back(std::move(bp), std::move(vals));
    }
    return out;
}

namespace {

double dot_tau(const Eigen::VectorXd& delays, const MultiIndex& l) {
    double acc = 0.0;
    for (int i = 0; i < delays.size(); ++i) acc += l[static_cast<std::size_t>(i)] * delays(i);
    return acc;
}

// Marks a window whose upper constraint is inactive on the domain.
constexpr double kOpenEnd = std::numeric_limits<double>::infinity();

}  // namespace

BoundaryState flow_apply(const DifferenceSystem& sys, XiTable& table, double T,
                         const BoundaryState& phi) {
    sys.validate();
    phi.check_domains(sys);
    if (T < 0.0) throw std::invalid_argument("flow time must be nonnegative");
    const auto lattice = multi_indices_within(sys.delays, T + sys.max_delay());

    BoundaryState out;
    out.components.reserve(static_cast<std::size_t>(sys.n()));
    MultiIndex shifted(static_cast<std::size_t>(sys.n()), 0);
    for (int i = 0; i < sys.n(); ++i) {
        const double tau_i = sys.delays(i);
        std::vector<PcwTerm> terms;
        // Initial data not yet consumed passes through unchanged.
        if (T < tau_i)
            terms.push_back(PcwTerm{1.0, &phi.components[static_cast<std::size_t>(i)], T, -tau_i,
                                    -T});
        for (const MultiIndex& l : lattice) {
            const double tl = dot_tau(sys.delays, l);
            for (int j = 0; j < sys.n(); ++j) {
                if (l[static_cast<std::size_t>(j)] < 1) continue;
                for (int k = 0; k < sys.n(); ++k)
                    shifted[static_cast<std::size_t>(k)] =
                        l[static_cast<std::size_t>(k)] - (k == j ? 1 : 0);
                const double coef = (table.xi(shifted) * table.K())(i, j);
                if (coef == 0.0) continue;
                // active where -tau_j <= T + s - tau.l < 0
                const double wlo = std::max(tl - T - sys.delays(j), -tau_i);
                const double whi = tl - T > 0.0 ? kOpenEnd : tl - T;
                if (!(whi > wlo)) continue;
                terms.push_back(PcwTerm{coef, &phi.components[static_cast<std::size_t>(j)],
                                        T - tl, wlo, whi});
            }
        }
        out.components.push_back(assemble_piecewise(-tau_i, 0.0, terms));
    }
    return out;
}

BoundaryState flow_apply(const DifferenceSystem& sys, double T, const BoundaryState& phi) {
    XiTable table(sys.K);
    return flow_apply(sys, table, T, phi);
}

BoundaryState endpoint_apply(const DifferenceSystem& sys, XiTable& table, double T,
                             const ControlSignal& u) {
    sys.validate();
    u.validate();
    if (T < 0.0) throw std::invalid_argument("endpoint time must be nonnegative");
    if (u.horizon < T - 1e-9 * std::max(1.0, T))
        throw std::domain_error("control horizon shorter than endpoint time");
    if (u.m() != sys.m()) throw std::invalid_argument("control channel count mismatch");

    const auto lattice = multi_indices_within(sys.delays, T);
    BoundaryState out;
    out.components.reserve(static_cast<std::size_t>(sys.n()));
    for (int i = 0; i < sys.n(); ++i) {
        const double tau_i = sys.delays(i);
        std::vector<PcwTerm> terms;
        for (const MultiIndex& l : lattice) {
            const double tl = dot_tau(sys.delays, l);
            const Eigen::RowVectorXd row = table.xi(l).row(i) * sys.B;
            for (int r = 0; r < sys.m(); ++r) {
                if (row(r) == 0.0) continue;
                // active where tau.l <= T + t (and t <= 0 by the domain)
                const double wlo = std::max(tl - T, -tau_i);
                if (wlo > 0.0) continue;
                terms.push_back(PcwTerm{row(r), &u.channels[static_cast<std::size_t>(r)], T - tl,
                                        wlo, kOpenEnd});
            }
        }
        out.components.push_back(assemble_piecewise(-tau_i, 0.0, terms));
    }
    return out;
}

BoundaryState endpoint_apply(const DifferenceSystem& sys, double T, const ControlSignal& u) {
    XiTable table(sys.K);
    return endpoint_apply(sys, table, T, u);
}

ControlSignal endpoint_dual_apply(const DifferenceSystem& sys, XiTable& table, double T,
                                  const BoundaryState& y) {
    sys.validate();
    y.check_domains(sys);
    if (T < 0.0) throw std::invalid_argument("dual endpoint time must be nonnegative");

    const auto lattice = multi_indices_within(sys.delays, T);
    ControlSignal out;
    out.horizon = T;
    out.channels.reserve(static_cast<std::size_t>(sys.m()));
    for (int r = 0; r < sys.m(); ++r) {
        std::vector<PcwTerm> terms;
        for (const MultiIndex& l : lattice) {
            const double tl = dot_tau(sys.delays, l);
            const Eigen::MatrixXd xiB = table.xi(l) * sys.B;
            for (int j = 0; j < sys.n(); ++j) {
                const double coef = xiB(j, r);
                if (coef == 0.0) continue;
                // active where -tau_j <= t - T + tau.l < 0
                const double wlo = std::max(T - tl - sys.delays(j), 0.0);
                const double whi = std::min(T - tl, T);
                if (!(whi > wlo)) continue;
                terms.push_back(PcwTerm{coef, &y.components[static_cast<std::size_t>(j)],
                                        tl - T, wlo, whi});
            }
        }
        out.channels.push_back(assemble_piecewise(0.0, T, terms));
    }
    return out;
}

ControlSignal endpoint_dual_apply(const DifferenceSystem& sys, double T, const BoundaryState& y) {
    XiTable table(sys.K);
    return endpoint_dual_apply(sys, table, T, y);
}

double state_pairing(const BoundaryState& a, const BoundaryState& b) {
    if (a.n() != b.n()) throw std::invalid_argument("state_pairing: component count mismatch");
    double acc = 0.0;
    for (int i = 0; i < a.n(); ++i) {
        const auto& f = a.components[static_cast<std::size_t>(i)];
        const auto& g = b.components[static_cast<std::size_t>(i)];
        acc += pcw_combine(f, g, [](double x, double y) { return x * y; }).integral();
    }
    return acc;
}

double control_pairing(const ControlSignal& a, const ControlSignal& b) {
    if (a.m() != b.m()) throw std::invalid_argument("control_pairing: channel count mismatch");
    double acc = 0.0;
    for (int r = 0; r < a.m(); ++r) {
        const auto& f = a.channels[static_cast<std::size_t>(r)];
        const auto& g = b.channels[static_cast<std::size_t>(r)];
        acc += pcw_combine(f, g, [](double x, double y) { return x * y; }).integral();
    }
    return acc;
}

std::pair<ControlSignal, ControlSignal> reduce_control_time(const DifferenceSystem& sys,
                                                            const ControlSignal& u, double T) {
    sys.validate();
    u.validate();
    const double t_star = sys.total_delay();
    const double tol = 1e-9 * std::max(1.0, t_star);
    if (T < t_star - tol || T > t_star + sys.min_delay() + tol)
        throw OutOfReductionWindow("reduction requires T in [T*, T* + tau_min]");
    if (u.horizon < T - tol) throw std::domain_error("control horizon shorter than T");
    const double excess = std::max(T - t_star, 0.0);

    const AlphaCoefficients alpha = char_coefficients(sys.K);
    ControlSignal u1, u2;
    u1.horizon = u2.horizon = t_star;
    for (int r = 0; r < sys.m(); ++r) {
        const auto& chan = u.channels[static_cast<std::size_t>(r)];
        u1.channels.push_back(
            assemble_piecewise(0.0, t_star, {PcwTerm{1.0, &chan, excess, 0.0, kOpenEnd}}));
        std::vector<PcwTerm> terms;
        const int n = sys.n();
        MultiIndex k(static_cast<std::size_t>(n), 0);
        for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
            double tk = 0.0;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) tk += sys.delays(i);
            const double a = alpha.alpha(mask);
            if (a == 0.0) continue;
            // active where s < tau.k <= s + excess
            terms.push_back(PcwTerm{-a, &chan, excess - tk, tk - excess, tk});
        }
        u2.channels.push_back(assemble_piecewise(0.0, t_star, terms));
    }
    return {std::move(u1), std::move(u2)};
}

double pde_value(const HyperbolicSystem& hyp, const Trajectory& traj, int i, double t, double x) {
    return std::exp(damping_exponent(hyp, i, x)) * traj.value(i, t - psi(hyp, i, x));
}

PdeProfile reconstruct_pde(const HyperbolicSystem& hyp, const Trajectory& traj, double t) {
    return boundary_to_state(hyp, traj.state_at(t));
}

double check_characteristics(const HyperbolicSystem& hyp,
                             const std::function<double(int, double, double)>& field,
                             double horizon, const std::vector<CharacteristicSample>& samples) {
    hyp.validate();
    double worst = 0.0;
    for (const auto& s : samples) {
        if (s.i < 0 || s.i >= hyp.n()) throw std::domain_error("sample component out of range");
        const double x2 = s.x + s.h;
        if (s.x < 0.0 || s.x > 1.0 || x2 < 0.0 || x2 > 1.0)
            throw std::domain_error("sample leaves the spatial domain");
        const double t2 = s.t + travel_time(hyp, s.i, s.x, x2);
        if (s.t < 0.0 || s.t > horizon || t2 < 0.0 || t2 > horizon)
            throw std::domain_error("sample leaves the time domain");
        const double damp = std::exp(-damping_line_integral(hyp, s.i, s.x, x2));
        worst = std::max(worst, std::abs(field(s.i, t2, x2) - damp * field(s.i, s.t, s.x)));
    }
    return worst;
}

double check_characteristics(const HyperbolicSystem& hyp, const Trajectory& traj,
                             const std::vector<CharacteristicSample>& samples) {
    return check_characteristics(
        hyp, [&](int i, double t, double x) { return pde_value(hyp, traj, i, t, x); },
        traj.horizon(), samples);
}

}  // namespace hyctrl
