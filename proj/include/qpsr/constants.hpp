#pragma once

// Centralized numerical tolerances. The library validates against these and
// the test suites assert against the same values, so they must only be
// changed in lockstep.
namespace qpsr::tol {

inline constexpr double state_norm = 1e-12;     // | ||psi|| - 1 |
inline constexpr double hermitian = 1e-12;      // entrywise |M - M^dag|
inline constexpr double trace_one = 1e-12;      // | tr(rho) - 1 |
inline constexpr double state_psd = 1e-10;      // density eigenvalue slack
inline constexpr double unitarity = 1e-10;      // entrywise |U^dag U - I|
inline constexpr double involution = 1e-10;     // entrywise |O^2 - I|
inline constexpr double sin_guard = 1e-9;       // |sin| guard for shift prefactors
inline constexpr double fisher_sym = 1e-9;      // Fisher matrix symmetry residual
inline constexpr double fisher_psd = 1e-8;      // Fisher eigenvalue >= -fisher_psd
inline constexpr double eig_cutoff = 1e-12;     // p_a + p_b cutoff in spectral sums
inline constexpr double prob_floor = 1e-12;     // probability floor in the CFIM
inline constexpr double x_floor = 1e-10;        // |X_{k,l}| floor in the quench CFIM
inline constexpr double crb_condition = 1e12;   // condition-number guard for inversion

}  // namespace qpsr::tol
