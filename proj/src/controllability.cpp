#include "hyctrl/controllability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hyctrl/errors.hpp"

namespace hyctrl {

namespace {

double operator_norm(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues()(0);
}

struct CriterionContext {
    const DifferenceSystem& sys;
    double k_norm2;  // |K|^2
    double b_norm2;  // |B|^2

    explicit CriterionContext(const DifferenceSystem& s)
        : sys(s), k_norm2(std::pow(operator_norm(s.K), 2)),
          b_norm2(std::pow(operator_norm(s.B), 2)) {}

    double normalized(std::complex<double> p) const {
        const Eigen::MatrixXcd H = characteristic_matrix(sys, p);
        Eigen::MatrixXcd G = H * H.adjoint();
        if (sys.m() > 0) G += sys.B * sys.B.transpose();
        double crit = G.determinant().real();
        double denom = 1.0;
        for (int j = 0; j < sys.n(); ++j)
            denom *= std::exp(2.0 * p.real() * sys.delays(j)) + k_norm2 + b_norm2;
        return std::max(crit, 0.0) / denom;
    }
};

}  // namespace

Eigen::MatrixXcd characteristic_matrix(const DifferenceSystem& sys, std::complex<double> p) {
    Eigen::MatrixXcd H = -sys.K.cast<std::complex<double>>();
    for (int j = 0; j < sys.n(); ++j) H(j, j) += std::exp(p * sys.delays(j));
    return H;
}

HautusValue hautus_value(const DifferenceSystem& sys, std::complex<double> p) {
    sys.validate();
    if (std::abs(p.real()) * sys.max_delay() > 700.0)
        throw FrequencyOutOfRange("real part of frequency overflows exp");
    HautusValue out;
    out.p = p;

    const Eigen::MatrixXcd H = characteristic_matrix(sys, p);
    Eigen::MatrixXcd J(sys.n(), sys.n() + sys.m());
    J.leftCols(sys.n()) = H;
    if (sys.m() > 0) J.rightCols(sys.m()) = sys.B.cast<std::complex<double>>();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    const Eigen::VectorXd sv = svd.singularValues();
    out.min_sv = sv(sv.size() - 1);
    out.rank_tol = std::max<double>(sys.n(), sys.n() + sys.m()) *
                   std::numeric_limits<double>::epsilon() * sv(0);
    out.rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > out.rank_tol) ++out.rank;

    Eigen::MatrixXcd G = H * H.adjoint();
    if (sys.m() > 0) G += sys.B * sys.B.transpose();
    out.det_criterion = std::max(G.determinant().real(), 0.0);
    out.normalized = CriterionContext(sys).normalized(p);
    return out;
}

int rank_kb(const DifferenceSystem& sys) {
    sys.validate();
    Eigen::MatrixXd J(sys.n(), sys.n() + sys.m());
    J.leftCols(sys.n()) = sys.K;
    if (sys.m() > 0) J.rightCols(sys.m()) = sys.B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = std::max<double>(sys.n(), sys.n() + sys.m()) *
                       std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv(0) : 0.0);
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Controllable: return "Controllable";
        case Verdict::NotControllable: return "NotControllable";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

StripBox resolve_strip(const DifferenceSystem& sys, const StripOptions& opts,
                       const CriterionContext& ctx) {
    StripBox box;
    const double tau_min = sys.min_delay();
    const double k_norm = std::sqrt(ctx.k_norm2);
    box.sigma_max = opts.sigma_max.value_or(std::log1p(sys.n() * k_norm) / tau_min);
    const double left_level = std::min(1e-8 * (1.0 + k_norm), 1e-4);
    box.sigma_min = opts.sigma_min.value_or(std::log(left_level) / tau_min);
    if (box.sigma_min > box.sigma_max) std::swap(box.sigma_min, box.sigma_max);
    // keep exp(2 sigma tau) finite
    box.sigma_min = std::max(box.sigma_min, -340.0 / sys.max_delay());
    box.sigma_max = std::min(box.sigma_max, 340.0 / sys.max_delay());
    box.im_max = opts.im_max.value_or(4.0 * M_PI / tau_min);
    box.sigma_grid = std::max(opts.sigma_grid, 8);
    if (opts.im_grid > 0) {
        box.im_grid = opts.im_grid;
    } else {
        const double periods = box.im_max * sys.delays.sum() / (2.0 * M_PI);
        box.im_grid = static_cast<int>(std::clamp(64.0 * periods, 64.0, 20000.0));
    }
    return box;
}

struct StripMinimum {
    double value = std::numeric_limits<double>::infinity();
    std::complex<double> at{0.0, 0.0};
};

StripMinimum minimize_over_strip(const CriterionContext& ctx, const StripBox& box,
                                 const StripOptions& opts) {
    struct Cell {
        double value;
        double sigma;
        double omega;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(box.sigma_grid) * (box.im_grid + 1));
    for (int a = 0; a < box.sigma_grid; ++a) {
        const double sigma = box.sigma_min + (box.sigma_max - box.sigma_min) *
                                                 (box.sigma_grid == 1 ? 0.0
                                                                      : double(a) / (box.sigma_grid - 1));
        for (int b = 0; b <= box.im_grid; ++b) {
            const double omega = box.im_max * double(b) / box.im_grid;
            cells.push_back({ctx.normalized({sigma, omega}), sigma, omega});
        }
    }
    std::partial_sort(cells.begin(),
                      cells.begin() + std::min<std::size_t>(cells.size(),
                                                            opts.refine_candidates),
                      cells.end(), [](const Cell& x, const Cell& y) { return x.value < y.value; });

    const double dsigma0 = (box.sigma_max - box.sigma_min) / std::max(1, box.sigma_grid - 1);
    const double domega0 = box.im_max / box.im_grid;
    StripMinimum best;
    const std::size_t n_cand = std::min<std::size_t>(cells.size(), opts.refine_candidates);
    for (std::size_t c = 0; c < n_cand; ++c) {
        double sigma = cells[c].sigma, omega = cells[c].omega, val = cells[c].value;
        double ds = dsigma0, dw = domega0;
        for (int it = 0; it < opts.refine_iters && (ds > 1e-14 || dw > 1e-14); ++it) {
            bool moved = false;
            const double cand_s[2] = {std::clamp(sigma - ds, box.sigma_min, box.sigma_max),
                                      std::clamp(sigma + ds, box.sigma_min, box.sigma_max)};
            for (double s : cand_s) {
                const double v = ctx.normalized({s, omega});
                if (v < val) {
                    val = v;
                    sigma = s;
                    moved = true;
                }
            }
            const double cand_w[2] = {std::clamp(omega - dw, 0.0, box.im_max),
                                      std::clamp(omega + dw, 0.0, box.im_max)};
            for (double w : cand_w) {
                const double v = ctx.normalized({sigma, w});
                if (v < val) {
                    val = v;
                    omega = w;
                    moved = true;
                }
            }
            if (!moved) {
                ds *= 0.5;
                dw *= 0.5;
            }
        }
        if (val < best.value) best = {val, {sigma, omega}};
    }
    return best;
}

ControllabilityReport run_report(const DifferenceSystem& sys, const StripOptions& opts,
                                 bool exact) {
    const auto start = std::chrono::steady_clock::now();
    sys.validate();
    ControllabilityReport rep;
    rep.kind = exact ? "exact" : "approximate";
    rep.rank_kb = rank_kb(sys);

    const CriterionContext ctx(sys);
    rep.search_box = resolve_strip(sys, opts, ctx);

    if (rep.rank_kb < sys.n()) {
        rep.verdict = Verdict::NotControllable;
        rep.detail = "rank [K, B] = " + std::to_string(rep.rank_kb) + " < n = " +
                     std::to_string(sys.n());
        rep.min_criterion = ctx.normalized({rep.search_box.sigma_min, 0.0});
        rep.argmin = {rep.search_box.sigma_min, 0.0};
        if (exact) rep.alpha_estimate = 0.0;
        rep.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rep;
    }

    const StripMinimum m = minimize_over_strip(ctx, rep.search_box, opts);
    rep.min_criterion = m.value;
    rep.argmin = m.at;
    if (exact) {
        rep.alpha_estimate = m.value;
        rep.notes.push_back("exact verdict is an L^1 statement");
        rep.notes.push_back(
            "strip infimum approximates limits along Re p -> -inf; incommensurable delays make "
            "the closure sampling approximate");
    }

    // With commensurable delays the criterion is periodic along the
    // imaginary axis and the strip minimum is the global infimum, so a
    // positive minimum decides the question; the indeterminate band is only
    // needed when almost-periodicity keeps the infimum out of reach.
    bool periodic = true;
    for (int i = 1; i < sys.n() && periodic; ++i)
        periodic = rationalize(sys.delays(i) / sys.delays(0), 1e-9).has_value();

    if (m.value < opts.fail_tol) {
        rep.verdict = Verdict::NotControllable;
        rep.detail = std::string(exact ? "criterion infimum" : "criterion") +
                     " vanishes near p = (" + std::to_string(m.at.real()) + ", " +
                     std::to_string(m.at.imag()) + "i)";
    } else if (m.value > opts.pass_tol || periodic) {
        rep.verdict = Verdict::Controllable;
        rep.detail = m.value > opts.pass_tol
                         ? "normalized criterion stays above " + std::to_string(opts.pass_tol) +
                               " over the strip"
                         : "criterion minimum is small but positive, and commensurable delays "
                           "make the strip minimum global";
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "strip minimum falls between fail and pass tolerances";
    }
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace

ControllabilityReport approx_controllability_report(const DifferenceSystem& sys,
                                                    const StripOptions& opts) {
    return run_report(sys, opts, false);
}

ControllabilityReport exact_controllability_report(const DifferenceSystem& sys,
                                                   const StripOptions& opts) {
    return run_report(sys, opts, true);
}

int AugmentedSystem::kalman_rank() const { return hyctrl::kalman_rank(K, B); }

int kalman_rank(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B) {
    const int d = static_cast<int>(K.rows());
    const int m = static_cast<int>(B.cols());
    if (d == 0 || m == 0) return 0;
    Eigen::MatrixXd ctrl(d, d * m);
    ctrl.leftCols(m) = B;
    for (int i = 1; i < d; ++i)
        ctrl.middleCols(m * i, m) = K * ctrl.middleCols(m * (i - 1), m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrl);
    return static_cast<int>(qr.rank());
}

std::optional<std::pair<long long, long long>> rationalize(double x, double tol,
                                                           long long max_den) {
    if (!std::isfinite(x)) return std::nullopt;
    if (max_den <= 0)
        max_den = std::max<long long>(8, static_cast<long long>(0.1 / std::sqrt(tol)));
    const double target_tol = tol * std::max(1.0, std::abs(x));
    long long p0 = 1, q0 = 0;  // convergent h_{-1}/k_{-1}
    long long p1 = static_cast<long long>(std::floor(x)), q1 = 1;
    double frac = x - std::floor(x);
    for (int it = 0; it < 64; ++it) {
        if (std::abs(x - double(p1) / double(q1)) <= target_tol) return std::make_pair(p1, q1);
        if (frac == 0.0) break;
        const double inv = 1.0 / frac;
        const double a_f = std::floor(inv);
        if (a_f > 9e17) break;
        const long long a = static_cast<long long>(a_f);
        frac = inv - a_f;
        const long long p2 = a * p1 + p0;
        const long long q2 = a * q1 + q0;
        if (q2 > max_den || q2 <= 0) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (std::abs(x - double(p1) / double(q1)) <= target_tol) return std::make_pair(p1, q1);
    return std::nullopt;
}

std::optional<AugmentedSystem> commensurable_reduce(const DifferenceSystem& sys, double tol,
                                                    int max_dim) {
    sys.validate();
    const int n = sys.n();
    long long lcm = 1;
    std::vector<std::pair<long long, long long>> fracs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto r = rationalize(sys.delays(i) / sys.delays(0), tol);
        if (!r || r->first <= 0) return std::nullopt;
        fracs[static_cast<std::size_t>(i)] = *r;
        lcm = std::lcm(lcm, r->second);
        if (lcm > 100000000LL) return std::nullopt;
    }
    const double base = sys.delays(0) / double(lcm);
    AugmentedSystem aug;
    aug.base_delay = base;
    aug.chain_lengths.resize(static_cast<std::size_t>(n));
    long long total = 0;
    for (int i = 0; i < n; ++i) {
        const auto [p, q] = fracs[static_cast<std::size_t>(i)];
        const long long count = p * (lcm / q);
        if (count <= 0) return std::nullopt;
        aug.chain_lengths[static_cast<std::size_t>(i)] = static_cast<int>(count);
        total += count;
    }
    if (total > max_dim)
        throw TooLarge("augmented dimension " + std::to_string(total) + " exceeds bound");
    aug.dim = static_cast<int>(total);

    std::vector<int> offset(static_cast<std::size_t>(n), 0);
    for (int i = 1; i < n; ++i)
        offset[static_cast<std::size_t>(i)] =
            offset[static_cast<std::size_t>(i - 1)] + aug.chain_lengths[static_cast<std::size_t>(i - 1)];

    aug.K = Eigen::MatrixXd::Zero(aug.dim, aug.dim);
    aug.B = Eigen::MatrixXd::Zero(aug.dim, sys.m());
    for (int i = 0; i < n; ++i) {
        const int oi = offset[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const int oj = offset[static_cast<std::size_t>(j)];
            const int last = oj + aug.chain_lengths[static_cast<std::size_t>(j)] - 1;
            aug.K(oi, last) = sys.K(i, j);
        }
        for (int r = 1; r < aug.chain_lengths[static_cast<std::size_t>(i)]; ++r)
            aug.K(oi + r, oi + r - 1) = 1.0;
        if (sys.m() > 0) aug.B.row(oi) = sys.B.row(i);
    }
    return aug;
}

}  // namespace hyctrl
