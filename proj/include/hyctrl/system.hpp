#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hyctrl/piecewise.hpp"

namespace hyctrl {

// Coupled one-dimensional transport system on [0, 1]:
//
//   d_t R + Lambda(x) d_x R + D(x) R = 0,
//   (R^+(t,0), R^-(t,1)) = M (R^+(t,1), R^-(t,0)) + B u(t),
//
// with Lambda = diag(speeds), D = diag(dampings), both piecewise constant.
// Components 1..n_plus travel rightward (speed > 0), the rest leftward
// (speed < 0). Piecewise-constant profiles keep every travel time, damping
// integral, and characteristic change of variables in closed form.
struct HyperbolicSystem {
    std::vector<PiecewiseConstantFn> speeds;    // each on [0, 1], signed, never 0
    std::vector<PiecewiseConstantFn> dampings;  // each on [0, 1]
    Eigen::MatrixXd boundary_matrix;            // n x n
    Eigen::MatrixXd control_matrix;             // n x m
    int n_plus = 0;                             // number of positive-speed components
    double q = 2.0;                             // norm parameter, metadata only

    int n() const { return static_cast<int>(speeds.size()); }
    int m() const { return static_cast<int>(control_matrix.cols()); }
    bool positive_direction(int i) const { return i < n_plus; }

    // Throws InvalidSpeed / std::invalid_argument on structural violations.
    void validate() const;
};

// Delay difference equation
//
//   y(t) = K (y_1(t - tau_1), ..., y_n(t - tau_n))^T + B u(t),  t >= 0.
//
// Produced from a HyperbolicSystem by integrating damping along
// characteristics (K = M diag(e^{-zeta})), or assembled directly.
struct DifferenceSystem {
    Eigen::MatrixXd K;                  // n x n
    Eigen::MatrixXd B;                  // n x m
    Eigen::VectorXd delays;             // tau, all > 0
    Eigen::VectorXd damping_integrals;  // zeta

    int n() const { return static_cast<int>(delays.size()); }
    int m() const { return static_cast<int>(B.cols()); }
    double total_delay() const { return delays.sum(); }  // T*
    double min_delay() const { return delays.minCoeff(); }
    double max_delay() const { return delays.maxCoeff(); }

    void validate() const;
};

// Element of the product state space: n scalar functions, the i-th living on
// [-tau_i, 0].
struct BoundaryState {
    std::vector<PiecewiseConstantFn> components;

    int n() const { return static_cast<int>(components.size()); }
    // Product-space norm (sum of component L^q norms to the q, then 1/q).
    double sigma_norm(double q) const;

    static BoundaryState zero(const DifferenceSystem& sys);
    // Verifies component i spans [-tau_i, 0] up to tolerance.
    void check_domains(const DifferenceSystem& sys) const;
};

// travel time tau_i = integral of 1/|lambda_i| over [0, 1], exact per piece
Eigen::VectorXd compute_delays(const HyperbolicSystem& sys);

// zeta_i = integral of d_i/|lambda_i| over [0, 1], exact per piece
Eigen::VectorXd compute_damping_integrals(const HyperbolicSystem& sys);

DifferenceSystem to_difference_system(const HyperbolicSystem& sys);

// Characteristic time coordinate: for a rightward component the time to
// travel from 0 to x; for a leftward component, from 1 back to x. Strictly
// monotone with range [0, tau_i]; psi_inverse is its exact inverse.
double psi(const HyperbolicSystem& sys, int i, double x);
double psi_inverse(const HyperbolicSystem& sys, int i, double s);

// Exponent of the damping envelope accumulated along the characteristic
// reaching x from the inflow boundary of component i. The profile maps below
// multiply by exp(damping_exponent) one way and divide the other, so the two
// directions are pointwise inverse by construction.
double damping_exponent(const HyperbolicSystem& sys, int i, double x);

// Signed characteristic travel time integral of 1/lambda_i over [a, b]
// (negative for leftward components), exact.
double travel_time(const HyperbolicSystem& sys, int i, double a, double b);
// Signed damping line integral of d_i/lambda_i over [a, b], exact.
double damping_line_integral(const HyperbolicSystem& sys, int i, double a, double b);

// Space slice of the PDE state: n piecewise-exponential functions on [0, 1].
// Exponential pieces appear exactly when damping is nonzero; with zero
// damping every component collapses to a piecewise-constant function.
using PdeProfile = std::vector<PiecewiseExpFn>;

// Boundary data -> space slice (exact for any piecewise-constant profiles).
PdeProfile boundary_to_state(const HyperbolicSystem& sys, const BoundaryState& y);
double boundary_to_state_value(const HyperbolicSystem& sys, const BoundaryState& y, int i,
                               double x);

// Space slice -> boundary data, exact; component i lives on [-tau_i, 0].
std::vector<PiecewiseExpFn> state_to_boundary_profile(const HyperbolicSystem& sys,
                                                      const PdeProfile& r);
double state_to_boundary_value(const HyperbolicSystem& sys, const PdeProfile& r, int i, double t);

// Collapsed form of the inverse map. Exact whenever the result is genuinely
// piecewise-constant (always on round trips, and for zero damping); throws
// std::domain_error when the exact image has exponential pieces.
BoundaryState state_to_boundary(const HyperbolicSystem& sys, const PdeProfile& r);
BoundaryState state_to_boundary(const HyperbolicSystem& sys,
                                const std::vector<PiecewiseConstantFn>& r);

}  // namespace hyctrl
