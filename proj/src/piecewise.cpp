#include "hyctrl/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyctrl {

namespace {

double domain_slack(double lo, double hi) {
    return 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

void check_breakpoints(const std::vector<double>& bp, const std::vector<double>& vals) {
    if (bp.size() < 2) throw std::invalid_argument("piecewise function needs at least one piece");
    if (vals.size() + 1 != bp.size())
        throw std::invalid_argument("breakpoint/value count mismatch");
    for (std::size_t i = 1; i < bp.size(); ++i)
        if (!(bp[i] > bp[i - 1]))
            throw std::invalid_argument("breakpoints must be strictly increasing");
}

}  // namespace

PiecewiseConstantFn::PiecewiseConstantFn(std::vector<double> breakpoints,
                                         std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    check_breakpoints(breakpoints_, values_);
}

PiecewiseConstantFn PiecewiseConstantFn::constant(double lo, double hi, double value) {
    return PiecewiseConstantFn({lo, hi}, {value});
}

std::size_t PiecewiseConstantFn::piece_index(double x) const {
    // Right-continuous: piece j covers [bp_j, bp_{j+1}), last piece closed.
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it == breakpoints_.begin()) return 0;
    std::size_t j = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return std::min(j, values_.size() - 1);
}

double PiecewiseConstantFn::value(double x) const {
    const double slack = domain_slack(domain_lo(), domain_hi());
    if (x < domain_lo() - slack || x > domain_hi() + slack)
        throw std::domain_error("evaluation point " + std::to_string(x) + " outside domain [" +
                                std::to_string(domain_lo()) + ", " + std::to_string(domain_hi()) +
                                "]");
    x = std::clamp(x, domain_lo(), domain_hi());
    return values_[piece_index(x)];
}

double PiecewiseConstantFn::integral(double a, double b) const {
    const double slack = domain_slack(domain_lo(), domain_hi());
    if (a > b) throw std::invalid_argument("integral bounds out of order");
    if (a < domain_lo() - slack || b > domain_hi() + slack)
        throw std::domain_error("integration range outside domain");
    a = std::clamp(a, domain_lo(), domain_hi());
    b = std::clamp(b, domain_lo(), domain_hi());
    double acc = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
        const double lo = std::max(a, breakpoints_[j]);
        const double hi = std::min(b, breakpoints_[j + 1]);
        if (hi > lo) acc += values_[j] * (hi - lo);
    }
    return acc;
}

double PiecewiseConstantFn::lq_norm(double q) const {
    if (q < 1.0) throw std::invalid_argument("lq_norm requires q >= 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j)
        acc += std::pow(std::abs(values_[j]), q) * (breakpoints_[j + 1] - breakpoints_[j]);
    return std::pow(acc, 1.0 / q);
}

double PiecewiseConstantFn::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

PiecewiseConstantFn PiecewiseConstantFn::shifted(double dt) const {
    std::vector<double> bp = breakpoints_;
    for (double& b : bp) b += dt;
    return PiecewiseConstantFn(std::move(bp), values_);
}

PiecewiseConstantFn PiecewiseConstantFn::scaled(double c) const {
    std::vector<double> vals = values_;
    for (double& v : vals) v *= c;
    return PiecewiseConstantFn(breakpoints_, std::move(vals));
}

PiecewiseConstantFn PiecewiseConstantFn::restricted(double a, double b) const {
    const double slack = domain_slack(domain_lo(), domain_hi());
    if (a >= b) throw std::invalid_argument("restriction range out of order");
    if (a < domain_lo() - slack || b > domain_hi() + slack)
        throw std::domain_error("restriction range outside domain");
    a = std::clamp(a, domain_lo(), domain_hi());
    b = std::clamp(b, domain_lo(), domain_hi());
    std::vector<double> bp{a};
    std::vector<double> vals;
    for (std::size_t j = 0; j < values_.size(); ++j) {
        const double hi = breakpoints_[j + 1];
        if (hi <= a || bp.size() > 1000000) continue;
        vals.push_back(values_[j]);
        if (hi >= b) {
            bp.push_back(b);
            break;
        }
        bp.push_back(hi);
    }
    if (vals.empty()) {
        vals.push_back(value(0.5 * (a + b)));
        bp.push_back(b);
    }
    if (bp.back() < b) bp.push_back(b);
    while (bp.size() > vals.size() + 1) bp.pop_back();
    return PiecewiseConstantFn(std::move(bp), std::move(vals));
}

PiecewiseConstantFn pcw_combine(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b,
                                const std::function<double(double, double)>& op) {
    const double tol = 1e-12 * std::max(1.0, a.domain_span());
    if (std::abs(a.domain_lo() - b.domain_lo()) > tol ||
        std::abs(a.domain_hi() - b.domain_hi()) > tol)
        throw std::domain_error("pcw_combine: domain mismatch");
    std::vector<double> bp;
    bp.reserve(a.breakpoints().size() + b.breakpoints().size());
    bp.insert(bp.end(), a.breakpoints().begin(), a.breakpoints().end());
    bp.insert(bp.end(), b.breakpoints().begin(), b.breakpoints().end());
    std::sort(bp.begin(), bp.end());
    std::vector<double> merged{a.domain_lo()};
    for (double x : bp)
        if (x > merged.back() + tol) merged.push_back(x);
    merged.back() = a.domain_hi();
    std::vector<double> vals(merged.size() - 1);
    for (std::size_t j = 0; j + 1 < merged.size(); ++j) {
        const double mid = 0.5 * (merged[j] + merged[j + 1]);
        vals[j] = op(a.value(mid), b.value(mid));
    }
    return PiecewiseConstantFn(std::move(merged), std::move(vals));
}

PiecewiseConstantFn pcw_add(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b) {
    return pcw_combine(a, b, [](double x, double y) { return x + y; });
}

PiecewiseConstantFn pcw_sub(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b) {
    return pcw_combine(a, b, [](double x, double y) { return x - y; });
}

PiecewiseConstantFn assemble_piecewise(double lo, double hi, const std::vector<PcwTerm>& terms,
                                       double merge_tol) {
    if (!(hi > lo)) throw std::invalid_argument("assemble_piecewise: empty domain");
    const double tol = merge_tol > 0 ? merge_tol : 1e-12 * std::max(1.0, hi - lo);

    std::vector<double> cand{lo, hi};
    for (const PcwTerm& t : terms) {
        const double wlo = std::max(lo, t.win_lo);
        const double whi = std::min(hi, t.win_hi);
        if (!(whi > wlo + tol)) continue;
        cand.push_back(wlo);
        cand.push_back(whi);
        if (t.src != nullptr)
            for (double b : t.src->breakpoints()) {
                const double x = b - t.shift;
                if (x > wlo + tol && x < whi - tol) cand.push_back(x);
            }
    }
    std::sort(cand.begin(), cand.end());
    std::vector<double> bp{lo};
    for (double x : cand)
        if (x > bp.back() + tol && x < hi - tol) bp.push_back(x);
    bp.push_back(hi);

    std::vector<double> vals(bp.size() - 1, 0.0);
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        const double mid = 0.5 * (bp[j] + bp[j + 1]);
        double acc = 0.0;
        for (const PcwTerm& t : terms) {
            if (mid < t.win_lo || mid >= t.win_hi) continue;
            acc += t.src != nullptr ? t.coef * t.src->value(mid + t.shift) : t.coef;
        }
        vals[j] = acc;
    }
    return PiecewiseConstantFn(std::move(bp), std::move(vals));
}

PiecewiseExpFn::PiecewiseExpFn(std::vector<double> breakpoints, std::vector<double> coefs,
                               std::vector<double> rates)
    : breakpoints_(std::move(breakpoints)), coefs_(std::move(coefs)), rates_(std::move(rates)) {
    check_breakpoints(breakpoints_, coefs_);
    if (rates_.size() != coefs_.size())
        throw std::invalid_argument("coef/rate count mismatch");
}

PiecewiseExpFn PiecewiseExpFn::from_constant(const PiecewiseConstantFn& f) {
    return PiecewiseExpFn(f.breakpoints(), f.values(),
                          std::vector<double>(f.values().size(), 0.0));
}

double PiecewiseExpFn::value(double x) const {
    const double slack = domain_slack(domain_lo(), domain_hi());
    if (x < domain_lo() - slack || x > domain_hi() + slack)
        throw std::domain_error("evaluation point outside domain");
    x = std::clamp(x, domain_lo(), domain_hi());
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t j = it == breakpoints_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    j = std::min(j, coefs_.size() - 1);
    return coefs_[j] * std::exp(rates_[j] * (x - breakpoints_[j]));
}

double PiecewiseExpFn::lq_norm(double q) const {
    if (q < 1.0) throw std::invalid_argument("lq_norm requires q >= 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < coefs_.size(); ++j) {
        const double w = breakpoints_[j + 1] - breakpoints_[j];
        const double aq = std::pow(std::abs(coefs_[j]), q);
        const double rq = q * rates_[j];
        acc += std::abs(rq * w) < 1e-14 ? aq * w : aq * (std::exp(rq * w) - 1.0) / rq;
    }
    return std::pow(acc, 1.0 / q);
}

bool PiecewiseExpFn::is_constant(double tol) const {
    for (std::size_t j = 0; j < rates_.size(); ++j)
        if (std::abs(rates_[j]) * (breakpoints_[j + 1] - breakpoints_[j]) > tol) return false;
    return true;
}

PiecewiseConstantFn PiecewiseExpFn::to_constant(double tol) const {
    if (!is_constant(tol))
        throw std::domain_error("piecewise-exponential function is not piecewise-constant");
    return PiecewiseConstantFn(breakpoints_, coefs_);
}

}  // namespace hyctrl
