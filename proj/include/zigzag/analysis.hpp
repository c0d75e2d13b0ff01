#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace zigzag {

struct FitResult {
    std::map<std::string, double> values;
    std::map<std::string, double> uncertainties;
    double residual_norm = 0.0;
    std::string model_tag;

    double value(const std::string& name) const { return values.at(name); }
    double uncertainty(const std::string& name) const { return uncertainties.at(name); }
};

/// Polynomial fits in 1/L of orders 1..3; xi_inf is the order-2 intercept
/// and the uncertainty the largest spread between the three intercepts.
struct Extrapolation {
    double xi_inf = 0.0;
    double uncertainty = 0.0;
    std::vector<double> intercepts;  ///< orders 1, 2, 3
};
Extrapolation extrapolate_thermodynamic(std::vector<std::pair<int, double>> points);

enum class Phase { Linear, Zigzag };
std::string to_string(Phase p);
/// Zigzag iff xi_inf > max(3 uncertainty, floor).
Phase classify_phase(double xi_inf, double uncertainty, double floor = 1e-3);

/// Generic Gauss-Newton with backtracking line search for sum_i r_i(x)^2.
struct GaussNewtonResult {
    std::vector<double> x;
    std::vector<double> covariance;  ///< row-major p x p, scaled by RSS / (n - p)
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};
GaussNewtonResult gauss_newton(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                               const std::function<std::vector<std::vector<double>>(const std::vector<double>&)>& jacobian,
                               std::vector<double> x0, int max_iterations = 100, double tol = 1e-14);

/// Fits G(dj) = amplitude * dj^-eta * exp(-dj / lambda) in log space on
/// points with dj >= min_distance and G > 0. Values: amplitude, eta,
/// lambda, inv_lambda; "excluded" counts dropped non-positive points.
/// lambda is +inf when the fitted decay rate is not positive.
FitResult fit_correlation_decay(const std::vector<std::pair<int, double>>& profile, int min_distance = 2);

/// S(l) = c/6 ln(L sin(pi l / L)) + c' on cuts l_min <= l <= L - l_min.
/// Values: c, c_prime, durbin_watson.
FitResult fit_central_charge(const std::vector<std::pair<int, double>>& profile, int L, int l_min = 4);

/// y = u * x^v by least squares in log-log. Values: u, v.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points);

/// Durbin-Watson statistic of an ordered residual sequence (about 2 for
/// uncorrelated residuals).
double durbin_watson(const std::vector<double>& residuals);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation (n - 1)
};
MeanStd mean_and_std(const std::vector<double>& values);

/// Curves of the order parameter per system size: L -> (x, xi_L) with x
/// the control parameter, ascending.
using CurveFamily = std::map<int, std::vector<std::pair<double, double>>>;

struct CollapseResult {
    double omega_c = 0.0;       ///< critical value of the control parameter
    double beta_over_nu = 0.0;  ///< gamma_1
    double inv_nu = 0.0;        ///< -gamma_2
    double collapse_cost = 0.0;
    double crossing_dispersion = 0.0;
    std::vector<double> cost_history;  ///< best cost per optimiser iteration
};

/// Rescaled coordinates ((x - x_c) L^inv_nu, xi L^beta_over_nu).
std::vector<std::pair<double, double>> rescale_curve(const std::vector<std::pair<double, double>>& curve, int L,
                                                     double omega_c, double beta_over_nu, double inv_nu);

/// Relative spread across sizes of xi_L L^gamma1 interpolated at x_c:
/// variance over squared mean.
double crossing_dispersion(const CurveFamily& curves, double omega_c, double beta_over_nu);

/// Collapse cost: every rescaled point of one size is compared with the
/// monotone cubic (PCHIP) interpolant through each other size where their
/// rescaled ranges overlap; mean squared deviation over the mean squared
/// rescaled value. Infinite when fewer than `min_overlap` comparisons exist.
double collapse_cost(const CurveFamily& curves, double omega_c, double beta_over_nu, double inv_nu,
                     int min_overlap = 6);

struct CollapseOptions {
    double inv_nu_start = 1.0;
    double beta_over_nu_start = 0.1;
    int max_iterations = 2000;
    double tol = 1e-12;
};

/// Two stages and a joint refinement: (1) gamma1 and x_c minimising the
/// crossing dispersion; (2) inv_nu minimising the collapse cost at fixed
/// (gamma1, x_c); (3) all three on the collapse cost. Derivative-free simplex
/// throughout.
CollapseResult finite_size_collapse(const CurveFamily& curves, const CollapseOptions& options = {});

/// Downhill simplex minimisation. `history` receives the best value after
/// every iteration.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                const std::vector<double>& step, int max_iterations, double tol,
                                std::vector<double>* history = nullptr);

}  // namespace zigzag
