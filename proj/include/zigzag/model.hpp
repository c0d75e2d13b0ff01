#pragma once

// Coefficients of the effective transverse model of a quasi-1D crystal of
// particles repelling as 1/r^alpha: Taylor coefficients of the interaction,
// the short-range on-site fields M_q and couplings N_q, parameter rescalings
// between interaction exponents, and the phi^4 correspondence.

#include <vector>

namespace zigzag {

/// Reduced inputs defining one simulation point.
struct ModelParameters {
    double alpha = 1.0;   ///< interaction exponent, >= 1
    double g = 0.1;       ///< effective Planck constant, > 0
    double omega2 = 1.0;  ///< squared rescaled transverse trap frequency
    int order_t = 3;      ///< Taylor truncation order, odd and >= 3

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

/// Dimensional inputs used to obtain the effective Planck constant.
struct PhysicalParameters {
    double hbar = 1.0;
    double mass = 1.0;
    double lattice_constant = 1.0;
    double coupling = 1.0;

    void validate() const;
};

/// b_q, M_q and N_q tabulated for one alpha. b is indexed from q = 0,
/// M and N from q = 1 (element 0 holds q = 1).
struct CoefficientTable {
    double alpha = 1.0;
    std::vector<double> b;
    std::vector<double> M;
    std::vector<double> N;

    double M_at(int q) const { return M.at(static_cast<std::size_t>(q - 1)); }
    double N_at(int q) const { return N.at(static_cast<std::size_t>(q - 1)); }
};

/// Riemann zeta for real s > 1, absolute accuracy better than 1e-12.
/// Throws std::domain_error for s <= 1.
double riemann_zeta(double s);

/// b_q(alpha) = Gamma(q + alpha/2) / (q! Gamma(alpha/2)).
double taylor_coefficient_b(int q, double alpha);

/// On-site field M_q(alpha), q >= 1.
double onsite_coefficient_M(int q, double alpha);

/// Nearest-neighbour coupling N_q(alpha), q >= 1. N_1 is ln 2 exactly at
/// alpha == 1 and uses the general branch for every alpha > 1.
double coupling_coefficient_N(int q, double alpha);

/// Coefficients for q = 1..qmax (b also carries q = 0).
CoefficientTable make_coefficient_table(double alpha, int qmax);

/// g = hbar sqrt(a^(alpha-2) / (M C_int)).
double effective_planck_constant(const PhysicalParameters& p, double alpha);

struct RescaledParameters {
    ModelParameters params;
    double u = 1.0;  ///< length scale factor, y' = u y
    double v = 1.0;  ///< energy scale factor, H' = v H
};

/// Map (alpha, g, omega2) onto the equivalent point at alpha_prime.
RescaledParameters rescale_to_alpha(const ModelParameters& params, double alpha_prime);

struct Phi4Parameters {
    double m_squared = 0.0;  ///< signed; negative on the zigzag side
    double lambda = 0.0;
};

/// m^2 = (omega2 - M_1) / N_1 and lambda = 12 g M_2 / N_1^(3/2).
Phi4Parameters phi4_parameters(const ModelParameters& params);

}  // namespace zigzag
