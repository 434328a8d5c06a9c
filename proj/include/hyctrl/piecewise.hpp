#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hyctrl {

// Real-valued piecewise-constant function on a closed interval [lo, hi].
//
// Stored as k+1 strictly increasing breakpoints covering the domain and k
// per-piece values. Evaluation is right-continuous at interior breakpoints;
// at the right endpoint the last piece's value is returned. All integrals and
// L^q norms are computed in closed form, so shifting, restricting, scaling,
// and summing such functions introduces no quadrature error.
class PiecewiseConstantFn {
public:
    PiecewiseConstantFn(std::vector<double> breakpoints, std::vector<double> values);

    static PiecewiseConstantFn constant(double lo, double hi, double value);

    double domain_lo() const { return breakpoints_.front(); }
    double domain_hi() const { return breakpoints_.back(); }
    double domain_span() const { return domain_hi() - domain_lo(); }
    std::size_t piece_count() const { return values_.size(); }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    // Right-continuous evaluation. Points a hair outside the domain (within a
    // relative slack, to absorb shift arithmetic) are clamped; anything
    // farther out throws std::domain_error.
    double value(double x) const;

    // Signed exact integral over [a, b] (a <= b required, both inside domain
    // up to slack).
    double integral(double a, double b) const;
    double integral() const { return integral(domain_lo(), domain_hi()); }

    // (integral of |f|^q)^(1/q), exact. Requires q >= 1.
    double lq_norm(double q) const;

    double max_abs() const;

    PiecewiseConstantFn shifted(double dt) const;
    PiecewiseConstantFn scaled(double c) const;
    PiecewiseConstantFn restricted(double a, double b) const;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;

    std::size_t piece_index(double x) const;
};

// Pointwise combination of two functions on the same domain; breakpoints are
// merged, values combined piece by piece.
PiecewiseConstantFn pcw_combine(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b,
                                const std::function<double(double, double)>& op);
PiecewiseConstantFn pcw_add(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b);
PiecewiseConstantFn pcw_sub(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b);

// One windowed, shifted, scaled copy of a source function:
//   term(x) = coef * src(x + shift)   for x in [win_lo, win_hi), else 0.
// The half-open window matches the right-continuous piece convention.
struct PcwTerm {
    double coef = 1.0;
    const PiecewiseConstantFn* src = nullptr;
    double shift = 0.0;
    double win_lo = 0.0;
    double win_hi = 0.0;
};

// Exact sum of windowed terms on [lo, hi]. All window ends and back-shifted
// source breakpoints become candidate breakpoints; nearby candidates (within
// merge_tol, default 1e-12 * max(1, hi - lo)) are fused, and piece values are
// read off at piece midpoints, which is exact for piecewise-constant data.
PiecewiseConstantFn assemble_piecewise(double lo, double hi, const std::vector<PcwTerm>& terms,
                                       double merge_tol = -1.0);

// Piecewise-exponential scalar function: on piece j the value is
//   coef_j * exp(rate_j * (x - breakpoints_j)).
// Closed under the profile maps between boundary data and PDE space slices
// (composition with piecewise-affine changes of variable and multiplication
// by piecewise-exponential damping envelopes). Degenerates to a
// piecewise-constant function when all rates vanish.
class PiecewiseExpFn {
public:
    PiecewiseExpFn(std::vector<double> breakpoints, std::vector<double> coefs,
                   std::vector<double> rates);

    static PiecewiseExpFn from_constant(const PiecewiseConstantFn& f);

    double domain_lo() const { return breakpoints_.front(); }
    double domain_hi() const { return breakpoints_.back(); }
    std::size_t piece_count() const { return coefs_.size(); }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& coefs() const { return coefs_; }
    const std::vector<double>& rates() const { return rates_; }

    double value(double x) const;
    double lq_norm(double q) const;  // closed form per piece

    // True when every piece varies by at most tol in relative terms, i.e.
    // |rate| * width <= tol.
    bool is_constant(double tol = 1e-12) const;
    // Collapse to a piecewise-constant function; throws std::domain_error if
    // some piece is genuinely exponential beyond tol.
    PiecewiseConstantFn to_constant(double tol = 1e-12) const;

private:
    std::vector<double> breakpoints_;
    std::vector<double> coefs_;
    std::vector<double> rates_;
};

}  // namespace hyctrl
