#include "zigzag/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace zigzag {

void ModelParameters::validate() const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (!(g > 0.0)) throw std::invalid_argument("g must be > 0");
    if (!std::isfinite(omega2)) throw std::invalid_argument("omega2 must be finite");
    if (order_t < 3 || order_t % 2 == 0)
        throw std::invalid_argument("order_t must be odd and >= 3, got " + std::to_string(order_t));
}

void PhysicalParameters::validate() const {
    if (!(hbar > 0.0 && mass > 0.0 && lattice_constant > 0.0 && coupling > 0.0))
        throw std::invalid_argument("physical parameters must be strictly positive");
}

namespace {

// B_{2k} / (2k)! for k = 1..10.
constexpr double kBernoulliOverFactorial[] = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
};

void require_q(int q, int min) {
    if (q < min) throw std::invalid_argument("expansion order q must be >= " + std::to_string(min));
}

}  // namespace

double riemann_zeta(double s) {
    if (!(s > 1.0)) throw std::domain_error("riemann_zeta requires s > 1");
    // Euler-Maclaurin: direct sum up to n = N - 1, integral tail and
    // Bernoulli corrections at N.
    constexpr int N = 16;
    double sum = 0.0;
    for (int n = N - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    const double nn = N;
    const double tail_base = std::pow(nn, -s);
    sum += nn * tail_base / (s - 1.0) + 0.5 * tail_base;
    // rising = s (s+1) ... (s+2k-2), power = N^(-s-2k+1)
    double rising = s;
    double power = tail_base / nn;
    for (int k = 1; k <= 10; ++k) {
        sum += kBernoulliOverFactorial[k - 1] * rising * power;
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        power /= nn * nn;
    }
    return sum;
}

double taylor_coefficient_b(int q, double alpha) {
    require_q(q, 0);
    double b = 1.0;
    for (int r = 0; r < q; ++r) b *= (0.5 * alpha + r) / (r + 1.0);
    return b;
}

double onsite_coefficient_M(int q, double alpha) {
    require_q(q, 1);
    const double s = alpha + 2.0 * q;
    return (std::pow(2.0, s) - 1.0) * taylor_coefficient_b(q, alpha) / std::pow(2.0, alpha - 1.0) *
           riemann_zeta(s);
}

double coupling_coefficient_N(int q, double alpha) {
    require_q(q, 1);
    if (q == 1) {
        if (alpha == 1.0) return std::numbers::ln2;
        const double two_a = std::pow(2.0, alpha);
        return (two_a - 2.0) / two_a * alpha * riemann_zeta(alpha);
    }
    const double s = alpha + 2.0 * q - 2.0;
    return (2.0 * q - 1.0) / q * (std::pow(2.0, s) - 1.0) * taylor_coefficient_b(q, alpha) /
           std::pow(2.0, alpha - 1.0) * riemann_zeta(s);
}

CoefficientTable make_coefficient_table(double alpha, int qmax) {
    require_q(qmax, 1);
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    CoefficientTable t;
    t.alpha = alpha;
    for (int q = 0; q <= qmax; ++q) t.b.push_back(taylor_coefficient_b(q, alpha));
    for (int q = 1; q <= qmax; ++q) {
        t.M.push_back(onsite_coefficient_M(q, alpha));
        t.N.push_back(coupling_coefficient_N(q, alpha));
    }
    return t;
}

double effective_planck_constant(const PhysicalParameters& p, double alpha) {
    p.validate();
    return p.hbar * std::sqrt(std::pow(p.lattice_constant, alpha - 2.0) / (p.mass * p.coupling));
}

RescaledParameters rescale_to_alpha(const ModelParameters& params, double alpha_prime) {
    params.validate();
    if (!(alpha_prime >= 1.0)) throw std::invalid_argument("alpha_prime must be >= 1");
    const double a = params.alpha;
    const double M1 = onsite_coefficient_M(1, a), M1p = onsite_coefficient_M(1, alpha_prime);
    const double M2 = onsite_coefficient_M(2, a), M2p = onsite_coefficient_M(2, alpha_prime);
    const double N1 = coupling_coefficient_N(1, a), N1p = coupling_coefficient_N(1, alpha_prime);

    RescaledParameters out;
    out.params = params;
    out.params.alpha = alpha_prime;
    out.params.omega2 = M1p + N1p / N1 * (params.omega2 - M1);
    out.params.g = params.g * M2 / M2p * std::pow(N1p / N1, 1.5);
    out.u = std::sqrt(N1p * M2 / (N1 * M2p));
    out.v = N1p * N1p * M2 / (N1 * N1 * M2p);
    return out;
}

Phi4Parameters phi4_parameters(const ModelParameters& params) {
    params.validate();
    const double M1 = onsite_coefficient_M(1, params.alpha);
    const double M2 = onsite_coefficient_M(2, params.alpha);
    const double N1 = coupling_coefficient_N(1, params.alpha);
    return {(params.omega2 - M1) / N1, 12.0 * params.g * M2 / std::pow(N1, 1.5)};
}

}  // namespace zigzag
