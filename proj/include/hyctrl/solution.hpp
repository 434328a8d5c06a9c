#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hyctrl/system.hpp"
#include "hyctrl/xi.hpp"

namespace hyctrl {

// m-channel control on [0, horizon], each channel piecewise constant.
struct ControlSignal {
    std::vector<PiecewiseConstantFn> channels;
    double horizon = 0.0;

    int m() const { return static_cast<int>(channels.size()); }
    Eigen::VectorXd value(double t) const;
    double lq_norm(double q) const;  // (integral of |u(t)|_2^q)^(1/q), exact

    static ControlSignal zero(int m, double horizon);
    void validate() const;
};

// Solution of the delay difference equation with given initial state and
// control. Evaluation is exact: values at t >= 0 are obtained by unwinding
// the recursion down to the initial data, memoizing on the multi-index of
// delay steps so every reachable time is computed once per query. Negative
// times return the initial data directly.
class Trajectory {
public:
    Trajectory(DifferenceSystem sys, BoundaryState initial, ControlSignal control,
               double horizon);

    const DifferenceSystem& system() const { return sys_; }
    const BoundaryState& initial() const { return initial_; }
    const ControlSignal& control() const { return control_; }
    double horizon() const { return horizon_; }

    // y_i(t) for t in [-tau_i, horizon]; throws OutOfHorizon outside.
    double value(int i, double t) const;
    Eigen::VectorXd values(double t) const;  // all components, t >= 0

    // The state y_[t] as exact piecewise-constant functions: candidate
    // breakpoints are the lattice shifts of the initial-data and control
    // breakpoints, and piece values are read off the recursion at midpoints.
    BoundaryState state_at(double t) const;

private:
    DifferenceSystem sys_;
    BoundaryState initial_;
    ControlSignal control_;
    double horizon_;
};

// State transport over time T with zero control. Beyond the paths through
// the recursion, initial data not yet consumed (T + s < 0) passes through
// unchanged, so flow over T = 0 is the identity.
BoundaryState flow_apply(const DifferenceSystem& sys, XiTable& table, double T,
                         const BoundaryState& phi);
BoundaryState flow_apply(const DifferenceSystem& sys, double T, const BoundaryState& phi);

// State reached at time T from the zero state under control u (u must cover
// [0, T]).
BoundaryState endpoint_apply(const DifferenceSystem& sys, XiTable& table, double T,
                             const ControlSignal& u);
BoundaryState endpoint_apply(const DifferenceSystem& sys, double T, const ControlSignal& u);

// Adjoint of the endpoint map: takes a state density y and produces the
// control-side function on [0, T] pairing with u as <Eu, y> = <u, E*y>.
ControlSignal endpoint_dual_apply(const DifferenceSystem& sys, XiTable& table, double T,
                                  const BoundaryState& y);
ControlSignal endpoint_dual_apply(const DifferenceSystem& sys, double T, const BoundaryState& y);

// Exact duality pairings (piecewise-constant integrands).
double state_pairing(const BoundaryState& a, const BoundaryState& b);
double control_pairing(const ControlSignal& a, const ControlSignal& b);

// Rewrites a control on [0, T], with T in [T*, T* + tau_min] and
// T* = tau_1 + ... + tau_n, as an equivalent pair (u1, u2) on [0, T*] with
// endpoint(T, u) = endpoint(T*, u1 + u2):
//   u1(s) = u(s + T - T*),
//   u2(s) = -sum over k in {0,1}^n \ {0} with s < tau.k <= s + T - T*
//               of alpha_k u(s - tau.k + T - T*).
// Throws OutOfReductionWindow outside the admissible window; callers iterate
// the reduction for larger horizons.
std::pair<ControlSignal, ControlSignal> reduce_control_time(const DifferenceSystem& sys,
                                                            const ControlSignal& u, double T);

// PDE solution value along the characteristic representation,
//   R_i(t, x) = exp(damping_exponent(i, x)) * y_i(t - psi_i(x)),
// evaluated exactly through the trajectory.
double pde_value(const HyperbolicSystem& hyp, const Trajectory& traj, int i, double t, double x);

// Space slice of the reconstructed PDE solution at time t (equals the
// boundary-to-state map applied to y_[t]).
PdeProfile reconstruct_pde(const HyperbolicSystem& hyp, const Trajectory& traj, double t);

// One characteristic-identity sample: component i, base point (t, x), and a
// space offset h. The residual compares transport along the characteristic
// with the damping-weighted value at the base point.
struct CharacteristicSample {
    int i;
    double t;
    double x;
    double h;
};

// Max residual of the characteristic identity over the samples; each sample
// must keep t + travel time inside [0, horizon] and x + h inside [0, 1].
// The field accessor allows checking externally supplied (e.g. corrupted)
// solution values against the same identity.
double check_characteristics(const HyperbolicSystem& hyp, const Trajectory& traj,
                             const std::vector<CharacteristicSample>& samples);
double check_characteristics(const HyperbolicSystem& hyp,
                             const std::function<double(int, double, double)>& field,
                             double horizon, const std::vector<CharacteristicSample>& samples);

}  // namespace hyctrl
