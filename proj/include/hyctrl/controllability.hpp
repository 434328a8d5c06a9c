#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hyctrl/system.hpp"

namespace hyctrl {

// Characteristic matrix of the delay difference equation,
//   H(p) = diag(e^{p tau_1}, ..., e^{p tau_n}) - K.
// Its rank together with B decides controllability.
Eigen::MatrixXcd characteristic_matrix(const DifferenceSystem& sys, std::complex<double> p);

// Frequency-domain rank certificate at one point. det_criterion equals the
// product of the squared singular values of [H(p), B], so the determinant
// test, the singular-value test, and the rank test degenerate together.
struct HautusValue {
    std::complex<double> p;
    double det_criterion = 0.0;  // det(H H* + B B*), real and nonnegative
    double min_sv = 0.0;         // smallest singular value of [H(p), B]
    double normalized = 0.0;     // det_criterion / prod_j (e^{2 Re p tau_j} + |K|^2 + |B|^2)
    double rank_tol = 0.0;
    int rank = 0;                // numerical rank of [H(p), B]
};

// Throws FrequencyOutOfRange when |Re p| * tau_max > 700 (exponent overflow).
HautusValue hautus_value(const DifferenceSystem& sys, std::complex<double> p);

// Numerical rank of [K, B] with tolerance max(n, n+m) * eps * sigma_max.
int rank_kb(const DifferenceSystem& sys);

enum class Verdict { Controllable, NotControllable, Inconclusive };

const char* verdict_name(Verdict v);

// Search strip for the frequency-domain criteria. Defaults follow the
// almost-periodic structure of the criterion: beyond sigma_max the diagonal
// dominates, below sigma_min the matrix is K to within a negligible
// perturbation and the criterion is governed by rank [K, B].
struct StripOptions {
    std::optional<double> sigma_min;
    std::optional<double> sigma_max;
    std::optional<double> im_max;  // default 4*pi / tau_min
    int im_grid = 0;               // 0 = auto: 64 periods-scaled, see implementation
    int sigma_grid = 48;
    double pass_tol = 1e-6;
    double fail_tol = 1e-10;
    int refine_candidates = 8;
    int refine_iters = 200;
};

struct StripBox {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double im_max = 0.0;
    int sigma_grid = 0;
    int im_grid = 0;
};

struct ControllabilityReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string kind;  // "approximate" or "exact"
    int rank_kb = 0;
    double min_criterion = 0.0;              // smallest normalized criterion found
    std::complex<double> argmin{0.0, 0.0};   // where it was found
    std::optional<double> alpha_estimate;    // exact test: strip infimum estimate
    StripBox search_box;
    std::string detail;                      // witness / reasoning summary
    std::vector<std::string> notes;
    double elapsed_seconds = 0.0;
};

// Approximate-controllability decision: requires rank [K, B] = n and a
// strictly positive criterion at every frequency. The strip minimum is
// classified against pass/fail tolerances; borderline values produce
// Inconclusive rather than an overclaim.
ControllabilityReport approx_controllability_report(const DifferenceSystem& sys,
                                                    const StripOptions& opts = {});

// Exact-controllability decision (stated for L^1): requires the criterion to
// be bounded away from zero over all frequencies, including limit matrices
// reached as Re p -> -infinity, which the strip's left edge approximates.
ControllabilityReport exact_controllability_report(const DifferenceSystem& sys,
                                                   const StripOptions& opts = {});

// Single-delay augmentation for commensurable delays: delays tau_i = N_i * d
// become chains of N_i unit slots, and controllability reduces to the Kalman
// rank test on the augmented pair.
struct AugmentedSystem {
    Eigen::MatrixXd K;
    Eigen::MatrixXd B;
    double base_delay = 0.0;
    std::vector<int> chain_lengths;
    int dim = 0;

    int kalman_rank() const;
    bool controllable() const { return kalman_rank() == dim; }
};

// Detects a common rational base for the delays by continued fractions
// (relative tolerance tol); returns nothing when the delays are not
// commensurable within tolerance. Throws TooLarge when the augmented
// dimension would exceed max_dim.
std::optional<AugmentedSystem> commensurable_reduce(const DifferenceSystem& sys,
                                                    double tol = 1e-9, int max_dim = 600);

// Rank of [B, KB, ..., K^{d-1}B].
int kalman_rank(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B);

// Best rational approximation p/q of x with q <= max_den and
// |x - p/q| <= tol * max(1, |x|); continued-fraction expansion. The default
// denominator cap scales like 0.1/sqrt(tol) so that generic irrationals
// cannot sneak under the tolerance through high-order convergents.
std::optional<std::pair<long long, long long>> rationalize(double x, double tol,
                                                           long long max_den = -1);

}  // namespace hyctrl
