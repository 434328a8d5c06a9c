#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace hyctrl {

// Multi-index in Z^n; the canonical key of the solution-representation
// coefficients.
using MultiIndex = std::vector<int>;

int multi_index_order(const MultiIndex& l);  // |l| = sum of entries
bool multi_index_nonnegative(const MultiIndex& l);

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& l) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (int v : l) h = (h ^ static_cast<std::size_t>(v + 0x7fffffff)) * 0x100000001b3ull;
        return h;
    }
};

// Memoized table of the matrix family used in the explicit solution
// representation of the delay difference equation:
//
//   Xi_0 = I,   Xi_l = 0 for l outside N^n,
//   Xi_l = sum_k (K e_k e_k^T) Xi_{l - e_k}  otherwise.
//
// Each term picks column k of K times row k of the previous matrix, so the
// entries are sums over delay paths. Not thread-safe: either confine a table
// to one thread or guard it externally; reads after full precomputation may
// be shared.
class XiTable {
public:
    explicit XiTable(Eigen::MatrixXd K, bool debug_sign_fault = false);

    int dim() const { return static_cast<int>(K_.rows()); }
    const Eigen::MatrixXd& K() const { return K_; }

    // Xi_l; multi-indices outside N^n yield the zero matrix.
    const Eigen::MatrixXd& xi(const MultiIndex& l);

    std::size_t memo_size() const { return memo_.size(); }

private:
    Eigen::MatrixXd K_;
    Eigen::MatrixXd zero_;
    bool debug_sign_fault_;
    std::unordered_map<MultiIndex, Eigen::MatrixXd, MultiIndexHash> memo_;

    const Eigen::MatrixXd& compute(const MultiIndex& l);
};

// Coefficients alpha_k, k in {0,1}^n, of the multilinear characteristic
// polynomial P(t) = det(I - K diag(t)). alpha_0 = 1 and
// alpha_{(1,...,1)} = (-1)^n det K. Keys are bitmasks with bit i <-> k_i = 1.
class AlphaCoefficients {
public:
    AlphaCoefficients(int n, std::vector<double> by_mask);

    int dim() const { return n_; }
    std::size_t count() const { return by_mask_.size(); }
    double alpha(std::uint32_t mask) const { return by_mask_.at(mask); }
    double alpha(const MultiIndex& k) const;

    // Evaluate P(t) from the stored coefficients.
    double evaluate(const Eigen::VectorXd& t) const;

private:
    int n_;
    std::vector<double> by_mask_;
};

// Computes the alpha coefficients by evaluating det(I - K diag(t)) at every
// t in {0,1}^n and applying subset inclusion-exclusion, which is exact for a
// multilinear polynomial. Throws TooLarge when n exceeds max_dim.
AlphaCoefficients char_coefficients(const Eigen::MatrixXd& K, int max_dim = 16);

// Residual of the row recurrence
//   e_j^T Xi_l = -sum_{k in {0,1}^n \ {0}} alpha_k e_j^T Xi_{l-k},
// valid when max_i l_i >= 2 or l_j = 1. Throws IneligibleIndex otherwise.
double verify_xi_recurrence(XiTable& table, const AlphaCoefficients& alpha, const MultiIndex& l,
                            int j);

// Residual of the homogeneous expansion (K diag(t))^j = sum_{|l|=j} Xi_l t^l.
double power_sum_check(XiTable& table, const Eigen::VectorXd& t, int j);

// All l in N^n with |l| = total (compositions of total into n parts).
std::vector<MultiIndex> multi_indices_of_order(int n, int total);

// All l in N^n with delays . l <= bound. Throws TooLarge past max_count.
std::vector<MultiIndex> multi_indices_within(const Eigen::VectorXd& delays, double bound,
                                             std::size_t max_count = 2000000);

}  // namespace hyctrl
