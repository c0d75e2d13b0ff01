#include "zigzag/bands.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "zigzag/model.hpp"

namespace zigzag {

namespace {

constexpr double kPi = std::numbers::pi;

void require_q(int q) {
    if (q < 1) throw std::invalid_argument("scattering order q must be >= 1");
}

void require_k(const std::vector<double>& k, int q) {
    if (static_cast<int>(k.size()) != 2 * q - 1)
        throw std::invalid_argument("k must have 2q-1 = " + std::to_string(2 * q - 1) + " components");
}

double sign_q(int q) { return q % 2 == 0 ? 1.0 : -1.0; }

// All 2q momenta: k_1..k_{2q-1} and the closing momentum sum k.
std::vector<double> closed_momenta(const std::vector<double>& k) {
    std::vector<double> all = k;
    double total = 0.0;
    for (double x : k) total += x;
    all.push_back(total);
    return all;
}

}  // namespace

double lattice_cosine_sum(double s, double theta) {
    if (!(s > 1.0)) throw std::domain_error("lattice_cosine_sum requires s > 1");
    theta = std::remainder(theta, 2.0 * kPi);
    const double sin_half = std::sin(0.5 * theta);
    const double a = 2.0 * sin_half * sin_half;  // 1 - cos(theta)
    // Re[z/(1-z)] with z = exp(-t + i theta), written without cancellation.
    auto integrand = [s, a](double t) {
        if (t < 1e-100 || t > 700.0) return 0.0;
        const double em1 = std::expm1(-t);
        const double e = std::exp(-t);
        const double numerator = e * (-em1 - a);
        const double denominator = em1 * em1 + 2.0 * e * a;
        return std::pow(t, s - 1.0) * numerator / denominator;
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double value = integrator.integrate(integrand, 1e-15);
    return value / std::tgamma(s);
}

double scattering_function(const std::vector<double>& k, int q, double alpha, double tol, long max_terms) {
    require_q(q);
    require_k(k, q);
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    const double s = alpha + 2.0 * q;
    // sum_{l > l*} l^-s <= l*^(1-s) / (s-1)
    const double cutoff = std::ceil(std::pow((s - 1.0) * tol, -1.0 / (s - 1.0)));
    if (cutoff > static_cast<double>(max_terms)) return scattering_function_resummed(k, q, alpha);
    const std::vector<double> momenta = closed_momenta(k);
    double sum = 0.0;
    for (long l = static_cast<long>(cutoff); l >= 1; --l) {
        const double x = static_cast<double>(l);
        double term = std::pow(x, -s);
        for (double kt : momenta) term *= std::sin(0.5 * kt * x);
        sum += term;
    }
    return -sum;
}

double scattering_function_resummed(const std::vector<double>& k, int q, double alpha) {
    require_q(q);
    require_k(k, q);
    const double s = alpha + 2.0 * q;
    const std::vector<double> momenta = closed_momenta(k);
    const int n = 2 * q;
    // prod_t sin(x_t) = (-1)^q 4^-q sum_eps (prod eps) cos(sum eps x); the
    // eps -> -eps pairs are equal, so the last sign is fixed to +.
    double sum = 0.0;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        double theta = 0.5 * momenta[static_cast<std::size_t>(n - 1)];
        double parity = 1.0;
        for (int t = 0; t < n - 1; ++t) {
            const bool minus = (mask >> t) & 1u;
            theta += (minus ? -0.5 : 0.5) * momenta[static_cast<std::size_t>(t)];
            if (minus) parity = -parity;
        }
        sum += parity * lattice_cosine_sum(s, theta);
    }
    return -sign_q(q) * 2.0 * sum / std::pow(4.0, q);
}

double soft_mode_value(int q, double alpha) {
    require_q(q);
    const double s = alpha + 2.0 * q;
    const double two_s = std::pow(2.0, s);
    return sign_q(q) * (two_s - 1.0) / two_s * riemann_zeta(s);
}

double hessian_offdiagonal(int q, double alpha) {
    if (q < 2) throw std::invalid_argument("hessian_offdiagonal requires q >= 2; q = 1 uses the eta branch");
    const double s = alpha + 2.0 * q;
    return -sign_q(q) * (std::pow(2.0, s - 2.0) - 1.0) / std::pow(2.0, s) * riemann_zeta(s - 2.0);
}

Eigen::MatrixXd soft_mode_hessian(int q, double alpha) {
    require_q(q);
    if (q == 1) {
        const double eta = alpha == 1.0 ? std::numbers::ln2 : (1.0 - std::pow(2.0, 1.0 - alpha)) * riemann_zeta(alpha);
        return Eigen::MatrixXd::Constant(1, 1, 0.5 * eta);
    }
    const int n = 2 * q - 1;
    const double c = hessian_offdiagonal(q, alpha);
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(n, n, c);
    h.diagonal().setConstant(2.0 * c);
    return h;
}

double short_range_normalisation(int q, double alpha) {
    require_q(q);
    return std::pow(2.0, 2 * q + 1) * taylor_coefficient_b(q, alpha);
}

namespace {

double kernel_of_K(double K, int q, double M, double N, double norm) {
    return sign_q(q) * (M - N * 2.0 * (1.0 - sign_q(q) * std::cos(K))) / norm;
}

}  // namespace

double short_range_dispersion(const std::vector<double>& k, int q, double alpha) {
    require_q(q);
    require_k(k, q);
    double K = 0.0;
    for (int t = 0; t < q; ++t) K += k[static_cast<std::size_t>(t)];
    return kernel_of_K(K, q, onsite_coefficient_M(q, alpha), coupling_coefficient_N(q, alpha),
                       short_range_normalisation(q, alpha));
}

double short_range_dispersion_symmetrized(const std::vector<double>& k, int q, double alpha) {
    require_q(q);
    require_k(k, q);
    std::vector<double> momenta = closed_momenta(k);
    momenta.back() = -momenta.back();
    const double M = onsite_coefficient_M(q, alpha), N = coupling_coefficient_N(q, alpha);
    const double norm = short_range_normalisation(q, alpha);
    const int n = 2 * q;
    double sum = 0.0;
    int count = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != q) continue;
        double K = 0.0;
        for (int t = 0; t < n; ++t)
            if ((mask >> t) & 1u) K += momenta[static_cast<std::size_t>(t)];
        sum += kernel_of_K(K, q, M, N, norm);
        ++count;
    }
    return sum / count;
}

double SecondOrderMatch::max() const { return std::max({value, gradient, hessian}); }

SecondOrderMatch verify_second_order_match(int q, double alpha) {
    require_q(q);
    const int n = 2 * q - 1;
    const std::vector<double> pi_vec(static_cast<std::size_t>(n), kPi);
    auto diff = [&](const std::vector<double>& k) {
        return scattering_function_resummed(k, q, alpha) - short_range_dispersion_symmetrized(k, q, alpha);
    };
    auto at = [&](int i, double di, int j, double dj) {
        std::vector<double> k = pi_vec;
        if (i >= 0) k[static_cast<std::size_t>(i)] += di;
        if (j >= 0) k[static_cast<std::size_t>(j)] += dj;
        return diff(k);
    };

    SecondOrderMatch out;
    const double f0 = at(-1, 0.0, -1, 0.0);
    out.value = std::abs(f0);

    const double h = 2e-3;
    auto richardson = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
    for (int i = 0; i < n; ++i) {
        auto grad = [&](double step) { return (at(i, step, -1, 0.0) - at(i, -step, -1, 0.0)) / (2.0 * step); };
        out.gradient = std::max(out.gradient, std::abs(richardson(grad(h), grad(0.5 * h))));
        for (int j = i; j < n; ++j) {
            auto hess = [&](double step) {
                if (i == j) return (at(i, step, -1, 0.0) - 2.0 * f0 + at(i, -step, -1, 0.0)) / (step * step);
                return (at(i, step, j, step) - at(i, step, j, -step) - at(i, -step, j, step) +
                        at(i, -step, j, -step)) /
                       (4.0 * step * step);
            };
            out.hessian = std::max(out.hessian, std::abs(richardson(hess(h), hess(0.5 * h))));
        }
    }
    return out;
}

BandPath parse_band_path(const std::string& name) {
    if (name == "line1d") return BandPath::Line1d;
    if (name == "gamma-x-m") return BandPath::GammaXM;
    throw std::invalid_argument("unknown band path '" + name + "' (expected line1d or gamma-x-m)");
}

std::vector<BandSample> sample_band_path(int q, double alpha, BandPath path, int samples) {
    require_q(q);
    if (samples < 2) throw std::invalid_argument("need at least 2 samples");
    const int n = 2 * q - 1;

    std::vector<std::vector<double>> corners;
    if (path == BandPath::Line1d) {
        corners.push_back(std::vector<double>(static_cast<std::size_t>(n), -kPi));
        corners.push_back(std::vector<double>(static_cast<std::size_t>(n), kPi));
    } else {
        std::vector<double> c(static_cast<std::size_t>(n), 0.0);
        corners.push_back(c);
        for (int j = 0; j < n; ++j) {
            c[static_cast<std::size_t>(j)] = kPi;
            corners.push_back(c);
        }
        corners.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.0));
    }
    std::vector<double> cumulative{0.0};
    for (std::size_t c = 1; c < corners.size(); ++c) {
        double len = 0.0;
        for (int t = 0; t < n; ++t) {
            const double dk = corners[c][static_cast<std::size_t>(t)] - corners[c - 1][static_cast<std::size_t>(t)];
            len += dk * dk;
        }
        cumulative.push_back(cumulative.back() + std::sqrt(len));
    }
    const double total = cumulative.back();
    const double scale = path == BandPath::Line1d ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;

    const double xi_pi = soft_mode_value(q, alpha);
    const Eigen::MatrixXd hessian = soft_mode_hessian(q, alpha);

    std::vector<BandSample> out;
    for (int i = 0; i < samples; ++i) {
        const double s = total * i / (samples - 1);
        std::size_t seg = 1;
        while (seg + 1 < cumulative.size() && s > cumulative[seg]) ++seg;
        const double frac = (s - cumulative[seg - 1]) / (cumulative[seg] - cumulative[seg - 1]);
        BandSample sample;
        sample.s = path == BandPath::Line1d ? -kPi + s * scale : s;
        Eigen::VectorXd delta(n);
        for (int t = 0; t < n; ++t) {
            const double a = corners[seg - 1][static_cast<std::size_t>(t)];
            const double b = corners[seg][static_cast<std::size_t>(t)];
            const double kt = a + frac * (b - a);
            sample.k.push_back(kt);
            delta(t) = std::remainder(kt - kPi, 2.0 * kPi);
        }
        sample.xi_long = scattering_function_resummed(sample.k, q, alpha);
        sample.xi_short = short_range_dispersion_symmetrized(sample.k, q, alpha);
        sample.parabola = xi_pi + 0.5 * delta.dot(hessian * delta);
        out.push_back(std::move(sample));
    }
    return out;
}

void write_band_csv(std::ostream& out, int q, double alpha, const std::vector<BandSample>& samples) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "# q=%d alpha=%.17g\n# xi_short normalisation: divided by 2^(2q+1) b_q = %.17g\n",
                  q, alpha, short_range_normalisation(q, alpha));
    out << buf << "s,xi_long,xi_short,parabola\n";
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.s, s.xi_long, s.xi_short, s.parabola);
        out << buf;
    }
}

}  // namespace zigzag
