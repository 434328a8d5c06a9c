#pragma once

#include <stdexcept>
#include <string>

namespace hyctrl {

// Coefficient profile has a vanishing (or sign-inconsistent) transport speed.
struct InvalidSpeed : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Query time outside the simulated horizon or the state domain.
struct OutOfHorizon : std::domain_error {
    using std::domain_error::domain_error;
};

// Time-reduction requested outside [T*, T* + tau_min].
struct OutOfReductionWindow : std::domain_error {
    using std::domain_error::domain_error;
};

// Multi-index does not satisfy the eligibility condition of the row recurrence.
struct IneligibleIndex : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dimension exceeds a configured combinatorial bound.
struct TooLarge : std::length_error {
    using std::length_error::length_error;
};

// Complex frequency would overflow the exponentials in the characteristic matrix.
struct FrequencyOutOfRange : std::domain_error {
    using std::domain_error::domain_error;
};

// Frequency is not close to any spectral lattice point of the requested cycle.
struct NotSpectral : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace hyctrl
