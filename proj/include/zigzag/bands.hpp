#pragma once

// q -> q phonon scattering functions of the long-range chain, their Taylor
// data at the soft mode k = (pi, ..., pi), and the short-range kernel that
// reproduces them to second order.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace zigzag {

/// sum_{l>=1} l^-s cos(l theta) for s > 1, by an integral representation
/// that is accurate to a few ulps for every theta.
double lattice_cosine_sum(double s, double theta);

/// Xi[k] = -sum_l l^-(alpha+2q) sin((sum k) l / 2) prod_t sin(k_t l / 2),
/// with k holding 2q-1 components. Direct summation, truncated where the
/// integral tail bound drops below tol. Sums longer than max_terms fall
/// back to the resummed form.
double scattering_function(const std::vector<double>& k, int q, double alpha, double tol = 1e-10,
                           long max_terms = 20'000'000);

/// Same function from the product-to-sum expansion over lattice_cosine_sum.
/// Smooth to machine precision, which makes it the one to differentiate.
double scattering_function_resummed(const std::vector<double>& k, int q, double alpha);

/// Closed-form Xi at k = pi-vector.
double soft_mode_value(int q, double alpha);

/// Off-diagonal second derivative of Xi at the soft mode, q >= 2. The
/// diagonal entries are exactly twice this value.
double hessian_offdiagonal(int q, double alpha);

/// Full (2q-1)x(2q-1) Hessian of Xi at the soft mode; q = 1 uses the
/// Dirichlet eta function, eta(1) = ln 2.
Eigen::MatrixXd soft_mode_hessian(int q, double alpha);

/// Normalisation that makes the short-range kernels comparable with Xi.
double short_range_normalisation(int q, double alpha);  // 2^(2q+1) b_q

/// (-1)^q (M_q - N_q 2 (1 - (-1)^q cos K)) / (2^(2q+1) b_q) with
/// K = k_1 + ... + k_q (the first q momenta).
double short_range_dispersion(const std::vector<double>& k, int q, double alpha);

/// short_range_dispersion averaged over every choice of q momenta out of
/// the 2q momenta {k_1..k_{2q-1}, -sum k}. Its Taylor data at the soft mode
/// match Xi term by term; for q = 1 it equals the plain kernel.
double short_range_dispersion_symmetrized(const std::vector<double>& k, int q, double alpha);

struct SecondOrderMatch {
    double value = 0.0;     ///< |Xi - Xi_sr| at the soft mode
    double gradient = 0.0;  ///< max component mismatch
    double hessian = 0.0;   ///< max entry mismatch
    double max() const;
};

/// Compare value, gradient and Hessian of Xi and the symmetrised short-range
/// kernel at the soft mode using Richardson-extrapolated central differences.
SecondOrderMatch verify_second_order_match(int q, double alpha);

enum class BandPath { Line1d, GammaXM };
BandPath parse_band_path(const std::string& name);

struct BandSample {
    double s = 0.0;  ///< path parameter
    std::vector<double> k;
    double xi_long = 0.0;
    double xi_short = 0.0;
    double parabola = 0.0;  ///< second-order Taylor expansion of Xi at the soft mode
};

/// line1d: all components equal to t for t in [-pi, pi]. gamma-x-m: straight
/// segments Gamma -> (pi,0,..) -> (pi,pi,0,..) -> ... -> pi-vector -> Gamma,
/// with s the accumulated path length.
std::vector<BandSample> sample_band_path(int q, double alpha, BandPath path, int samples);

/// CSV with a comment header recording the normalisation, then
/// s,xi_long,xi_short,parabola.
void write_band_csv(std::ostream& out, int q, double alpha, const std::vector<BandSample>& samples);

}  // namespace zigzag
