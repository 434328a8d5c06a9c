#include "hyctrl/xi.hpp"

#include <cmath>
#include <stdexcept>

#include "hyctrl/errors.hpp"

namespace hyctrl {

int multi_index_order(const MultiIndex& l) {
    int s = 0;
    for (int v : l) s += v;
    return s;
}

bool multi_index_nonnegative(const MultiIndex& l) {
    for (int v : l)
        if (v < 0) return false;
    return true;
}

XiTable::XiTable(Eigen::MatrixXd K, bool debug_sign_fault)
    : K_(std::move(K)), debug_sign_fault_(debug_sign_fault) {
    if (K_.rows() != K_.cols()) throw std::invalid_argument("XiTable: K must be square");
    zero_ = Eigen::MatrixXd::Zero(K_.rows(), K_.cols());
    memo_.emplace(MultiIndex(static_cast<std::size_t>(K_.rows()), 0),
                  Eigen::MatrixXd::Identity(K_.rows(), K_.cols()));
}

const Eigen::MatrixXd& XiTable::xi(const MultiIndex& l) {
    if (static_cast<int>(l.size()) != dim())
        throw std::invalid_argument("XiTable: multi-index length mismatch");
    if (!multi_index_nonnegative(l)) return zero_;
    return compute(l);
}

const Eigen::MatrixXd& XiTable::compute(const MultiIndex& l) {
    auto it = memo_.find(l);
    if (it != memo_.end()) return it->second;
    Eigen::MatrixXd acc = zero_;
    MultiIndex prev = l;
    for (int k = 0; k < dim(); ++k) {
        if (l[static_cast<std::size_t>(k)] == 0) continue;
        prev[static_cast<std::size_t>(k)] -= 1;
        const Eigen::MatrixXd& sub = compute(prev);
        prev[static_cast<std::size_t>(k)] += 1;
        // (K e_k e_k^T) Xi_{l - e_k} = column k of K times row k of the child
        double sign = debug_sign_fault_ && k == 0 ? -1.0 : 1.0;
        acc.noalias() += sign * K_.col(k) * sub.row(k);
    }
    return memo_.emplace(l, std::move(acc)).first->second;
}

AlphaCoefficients::AlphaCoefficients(int n, std::vector<double> by_mask)
    : n_(n), by_mask_(std::move(by_mask)) {
    if (by_mask_.size() != (std::size_t{1} << n_))
        throw std::invalid_argument("alpha coefficient count must be 2^n");
}

double AlphaCoefficients::alpha(const MultiIndex& k) const {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] != 0 && k[i] != 1) throw std::invalid_argument("alpha index must be in {0,1}^n");
        if (k[i] == 1) mask |= 1u << i;
    }
    return alpha(mask);
}

double AlphaCoefficients::evaluate(const Eigen::VectorXd& t) const {
    double acc = 0.0;
    for (std::uint32_t mask = 0; mask < by_mask_.size(); ++mask) {
        double prod = by_mask_[mask];
        for (int i = 0; i < n_; ++i)
            if (mask & (1u << i)) prod *= t(i);
        acc += prod;
    }
    return acc;
}

AlphaCoefficients char_coefficients(const Eigen::MatrixXd& K, int max_dim) {
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n) throw std::invalid_argument("char_coefficients: K must be square");
    if (n > max_dim)
        throw TooLarge("char_coefficients: dimension " + std::to_string(n) + " exceeds bound " +
                       std::to_string(max_dim));
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> det_at(size);
    for (std::uint32_t mask = 0; mask < size; ++mask) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) A.col(i) -= K.col(i);
        det_at[mask] = A.determinant();
    }
    // Subset inclusion-exclusion: alpha_S = sum_{T <= S} (-1)^{|S \ T|} P(chi_T)
    std::vector<double> alpha(size);
    for (std::uint32_t s = 0; s < size; ++s) {
        double acc = 0.0;
        std::uint32_t t = s;
        while (true) {
            const int diff = __builtin_popcount(s ^ t);
            acc += (diff % 2 == 0 ? 1.0 : -1.0) * det_at[t];
            if (t == 0) break;
            t = (t - 1) & s;
        }
        alpha[s] = acc;
    }
    return AlphaCoefficients(n, std::move(alpha));
}

double verify_xi_recurrence(XiTable& table, const AlphaCoefficients& alpha, const MultiIndex& l,
                            int j) {
    const int n = table.dim();
    if (static_cast<int>(l.size()) != n || j < 0 || j >= n)
        throw std::invalid_argument("verify_xi_recurrence: bad index");
    if (!multi_index_nonnegative(l)) throw IneligibleIndex("multi-index must be nonnegative");
    int max_entry = 0;
    for (int v : l) max_entry = std::max(max_entry, v);
    if (max_entry < 2 && l[static_cast<std::size_t>(j)] != 1)
        throw IneligibleIndex("row recurrence needs max_i l_i >= 2 or l_j = 1");

    Eigen::RowVectorXd acc = table.xi(l).row(j);
    MultiIndex shifted(l);
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
        for (int i = 0; i < n; ++i)
            shifted[static_cast<std::size_t>(i)] =
                l[static_cast<std::size_t>(i)] - ((mask >> i) & 1u ? 1 : 0);
        acc += alpha.alpha(mask) * table.xi(shifted).row(j);
    }
    return acc.norm();
}

double power_sum_check(XiTable& table, const Eigen::VectorXd& t, int j) {
    const int n = table.dim();
    if (t.size() != n) throw std::invalid_argument("power_sum_check: bad vector length");
    if (j < 0) throw std::invalid_argument("power_sum_check: j must be nonnegative");
    const Eigen::MatrixXd Kt = table.K() * t.asDiagonal();
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n);
    for (int r = 0; r < j; ++r) lhs = Kt * lhs;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);
    for (const MultiIndex& l : multi_indices_of_order(n, j)) {
        double tpow = 1.0;
        for (int i = 0; i < n; ++i) tpow *= std::pow(t(i), l[static_cast<std::size_t>(i)]);
        rhs += table.xi(l) * tpow;
    }
    return (lhs - rhs).norm();
}

namespace {

void compositions_rec(int n, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (static_cast<int>(cur.size()) == n - 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        cur.push_back(v);
        compositions_rec(n, remaining - v, cur, out);
        cur.pop_back();
    }
}

void within_rec(const Eigen::VectorXd& delays, double bound, std::size_t max_count,
                MultiIndex& cur, double used, std::vector<MultiIndex>& out) {
    const int n = static_cast<int>(delays.size());
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        if (out.size() > max_count) throw TooLarge("multi-index enumeration exceeds bound");
        return;
    }
    const int i = static_cast<int>(cur.size());
    for (int v = 0;; ++v) {
        const double next = used + v * delays(i);
        if (next > bound) break;
        cur.push_back(v);
        within_rec(delays, bound, max_count, cur, next, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(int n, int total) {
    std::vector<MultiIndex> out;
    MultiIndex cur;
    cur.reserve(static_cast<std::size_t>(n));
    compositions_rec(n, total, cur, out);
    return out;
}

std::vector<MultiIndex> multi_indices_within(const Eigen::VectorXd& delays, double bound,
                                             std::size_t max_count) {
    std::vector<MultiIndex> out;
    if (bound < 0.0) return out;
    MultiIndex cur;
    cur.reserve(static_cast<std::size_t>(delays.size()));
    within_rec(delays, bound, max_count, cur, 0.0, out);
    return out;
}

}  // namespace hyctrl
