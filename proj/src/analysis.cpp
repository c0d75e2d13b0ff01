#include "zigzag/analysis.hpp"

#include <Eigen/Dense>

#include <cmath>
// Boost 1.74's pchip header calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

namespace zigzag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Least-squares coefficients of A c = b; throws when A is rank deficient.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-13);
    if (qr.rank() < A.cols()) throw std::runtime_error("ill-conditioned fit");
    return qr.solve(b);
}

// Monotone cubic interpolant on ascending abscissae (linear below 4 points).
class Interpolant {
public:
    explicit Interpolant(const std::vector<std::pair<double, double>>& pts) {
        for (const auto& [x, y] : pts) {
            x_.push_back(x);
            y_.push_back(y);
        }
        lo_ = x_.front();
        hi_ = x_.back();
        if (x_.size() >= 4) {
            std::vector<double> x = x_, y = y_;
            spline_.emplace(std::move(x), std::move(y));
        }
    }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool contains(double x) const { return x >= lo_ && x <= hi_; }
    double operator()(double x) const {
        if (spline_) return (*spline_)(x);
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - x_.begin()), 1, x_.size() - 1);
        const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
        return (1.0 - t) * y_[i - 1] + t * y_[i];
    }

private:
    std::vector<double> x_, y_;
    double lo_ = 0.0, hi_ = 0.0;
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> spline_;
};

void check_curve(const std::vector<std::pair<double, double>>& c) {
    if (c.size() < 2) throw std::invalid_argument("every curve needs at least two points");
    for (std::size_t i = 1; i < c.size(); ++i)
        if (!(c[i].first > c[i - 1].first)) throw std::invalid_argument("curve abscissae must be strictly ascending");
}

}  // namespace

Extrapolation extrapolate_thermodynamic(std::vector<std::pair<int, double>> points) {
    std::sort(points.begin(), points.end());
    std::set<int> distinct;
    for (const auto& [L, xi] : points) {
        if (L <= 0) throw std::invalid_argument("system sizes must be positive");
        distinct.insert(L);
    }
    if (distinct.size() < 4) throw std::invalid_argument("extrapolation needs at least 4 distinct L values");
    const auto n = static_cast<Eigen::Index>(points.size());
    Extrapolation out;
    for (int order = 1; order <= 3; ++order) {
        Eigen::MatrixXd A(n, order + 1);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = 1.0 / points[static_cast<std::size_t>(i)].first;
            for (int k = 0; k <= order; ++k) A(i, k) = std::pow(u, k);
            b(i) = points[static_cast<std::size_t>(i)].second;
        }
        out.intercepts.push_back(least_squares(A, b)(0));
    }
    out.xi_inf = out.intercepts[1];
    const auto [mn, mx] = std::minmax_element(out.intercepts.begin(), out.intercepts.end());
    out.uncertainty = *mx - *mn;
    return out;
}

std::string to_string(Phase p) { return p == Phase::Zigzag ? "zigzag" : "linear"; }

Phase classify_phase(double xi_inf, double uncertainty, double floor) {
    return xi_inf > std::max(3.0 * uncertainty, floor) ? Phase::Zigzag : Phase::Linear;
}

GaussNewtonResult gauss_newton(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                               const std::function<std::vector<std::vector<double>>(const std::vector<double>&)>& jacobian,
                               std::vector<double> x, int max_iterations, double tol) {
    const auto p = static_cast<Eigen::Index>(x.size());
    auto rss_of = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double r : residuals(v)) s += r * r;
        return s;
    };
    GaussNewtonResult out;
    double rss = rss_of(x);
    Eigen::MatrixXd J;
    for (int it = 0; it < max_iterations; ++it) {
        const std::vector<double> r = residuals(x);
        const auto rows = jacobian(x);
        const auto n = static_cast<Eigen::Index>(r.size());
        J.resize(n, p);
        Eigen::VectorXd rv(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            rv(i) = r[static_cast<std::size_t>(i)];
            for (Eigen::Index k = 0; k < p; ++k) J(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
        const Eigen::VectorXd step = -least_squares(J, rv);
        double t = 1.0;
        std::vector<double> trial(x.size());
        double trial_rss = kInf;
        for (int back = 0; back < 40; ++back, t *= 0.5) {
            for (Eigen::Index k = 0; k < p; ++k)
                trial[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + t * step(k);
            trial_rss = rss_of(trial);
            if (trial_rss <= rss) break;
        }
        out.iterations = it + 1;
        if (!(trial_rss <= rss)) {
            out.converged = true;  // no descent direction left
            break;
        }
        const double gain = rss - trial_rss;
        x = trial;
        rss = trial_rss;
        if (gain <= tol * std::max(rss, 1e-300) || t * step.norm() <= 1e-15 * (1.0 + Eigen::Map<Eigen::VectorXd>(x.data(), p).norm())) {
            out.converged = true;
            break;
        }
    }
    // Covariance at the solution.
    const std::vector<double> r = residuals(x);
    const auto rows = jacobian(x);
    const auto n = static_cast<Eigen::Index>(r.size());
    J.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k) J(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    const double s2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
    const Eigen::MatrixXd cov = s2 * (J.transpose() * J).inverse();
    out.covariance.assign(cov.data(), cov.data() + cov.size());
    out.x = x;
    out.residual_norm = std::sqrt(rss);
    return out;
}

FitResult fit_correlation_decay(const std::vector<std::pair<int, double>>& profile, int min_distance) {
    std::vector<double> lx, x, ly;
    int excluded = 0;
    for (const auto& [dj, G] : profile) {
        if (dj < std::max(min_distance, 1)) continue;
        if (!(G > 0.0)) {
            ++excluded;
            continue;
        }
        x.push_back(dj);
        lx.push_back(std::log(static_cast<double>(dj)));
        ly.push_back(std::log(G));
    }
    if (x.size() < 10) throw std::invalid_argument("correlation fit needs at least 10 usable points");
    // Parameters: ln amplitude, eta, 1 / lambda.
    auto res = [&](const std::vector<double>& p) {
        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = p[0] - p[1] * lx[i] - p[2] * x[i] - ly[i];
        return r;
    };
    auto jac = [&](const std::vector<double>&) {
        std::vector<std::vector<double>> J(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) J[i] = {1.0, -lx[i], -x[i]};
        return J;
    };
    const GaussNewtonResult gn = gauss_newton(res, jac, {0.0, 0.0, 0.0});
    if (!gn.converged) throw std::runtime_error("correlation fit did not converge");
    const double sa = std::sqrt(std::max(gn.covariance[0], 0.0));
    const double se = std::sqrt(std::max(gn.covariance[4], 0.0));
    const double sm = std::sqrt(std::max(gn.covariance[8], 0.0));
    FitResult out;
    out.model_tag = "amplitude * dj^-eta * exp(-dj/lambda)";
    const double amp = std::exp(gn.x[0]);
    const double mu = gn.x[2];
    out.values = {{"amplitude", amp}, {"eta", gn.x[1]}, {"inv_lambda", mu},
                  {"lambda", mu > 0.0 ? 1.0 / mu : kInf}, {"excluded", excluded},
                  {"points", static_cast<double>(x.size())}};
    out.uncertainties = {{"amplitude", amp * sa}, {"eta", se}, {"inv_lambda", sm},
                         {"lambda", mu > 0.0 ? sm / (mu * mu) : kInf}};
    out.residual_norm = gn.residual_norm;
    return out;
}

double durbin_watson(const std::vector<double>& e) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        den += e[i] * e[i];
        if (i > 0) num += (e[i] - e[i - 1]) * (e[i] - e[i - 1]);
    }
    return den > 0.0 ? num / den : 2.0;
}

FitResult fit_central_charge(const std::vector<std::pair<int, double>>& profile, int L, int l_min) {
    std::vector<double> xs, ys;
    for (const auto& [l, S] : profile) {
        if (l < l_min || l > L - l_min) continue;
        xs.push_back(std::log(L * std::sin(M_PI * l / L)) / 6.0);
        ys.push_back(S);
    }
    if (xs.size() < 8) throw std::invalid_argument("central-charge fit needs at least 8 cuts");
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = xs[static_cast<std::size_t>(i)];
        A(i, 1) = 1.0;
        b(i) = ys[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = least_squares(A, b);
    const Eigen::VectorXd r = A * c - b;
    const double s2 = r.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(n - 2, 1));
    const Eigen::MatrixXd cov = s2 * (A.transpose() * A).inverse();
    FitResult out;
    out.model_tag = "c/6 ln(L sin(pi l/L)) + c'";
    out.values = {{"c", c(0)}, {"c_prime", c(1)},
                  {"durbin_watson", durbin_watson(std::vector<double>(r.data(), r.data() + r.size()))}};
    out.uncertainties = {{"c", std::sqrt(cov(0, 0))}, {"c_prime", std::sqrt(cov(1, 1))}};
    out.residual_norm = r.norm();
    return out;
}

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("power-law fit needs at least 3 points");
    std::vector<double> lx, ly;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("power-law fit needs positive data");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    auto res = [&](const std::vector<double>& p) {
        std::vector<double> r(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) r[i] = p[0] + p[1] * lx[i] - ly[i];
        return r;
    };
    auto jac = [&](const std::vector<double>&) {
        std::vector<std::vector<double>> J(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) J[i] = {1.0, lx[i]};
        return J;
    };
    const GaussNewtonResult gn = gauss_newton(res, jac, {0.0, 0.0});
    FitResult out;
    out.model_tag = "u * x^v";
    const double u = std::exp(gn.x[0]);
    out.values = {{"u", u}, {"v", gn.x[1]}};
    out.uncertainties = {{"u", u * std::sqrt(std::max(gn.covariance[0], 0.0))},
                         {"v", std::sqrt(std::max(gn.covariance[3], 0.0))}};
    out.residual_norm = gn.residual_norm;
    return out;
}

MeanStd mean_and_std(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("no values");
    MeanStd out;
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double s = 0.0;
        for (double x : v) s += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(s / static_cast<double>(v.size() - 1));
    }
    return out;
}

std::vector<std::pair<double, double>> rescale_curve(const std::vector<std::pair<double, double>>& curve, int L,
                                                     double omega_c, double beta_over_nu, double inv_nu) {
    std::vector<std::pair<double, double>> out;
    const double sx = std::pow(static_cast<double>(L), inv_nu), sy = std::pow(static_cast<double>(L), beta_over_nu);
    for (const auto& [x, y] : curve) out.emplace_back((x - omega_c) * sx, y * sy);
    return out;
}

double crossing_dispersion(const CurveFamily& curves, double omega_c, double beta_over_nu) {
    std::vector<double> v;
    for (const auto& [L, c] : curves) {
        const Interpolant f(c);
        if (!f.contains(omega_c)) return kInf;
        v.push_back(f(omega_c) * std::pow(static_cast<double>(L), beta_over_nu));
    }
    const MeanStd ms = mean_and_std(v);
    if (!(std::abs(ms.mean) > 0.0)) return kInf;
    const double var = ms.std * ms.std * static_cast<double>(v.size() - 1) / static_cast<double>(v.size());
    return var / (ms.mean * ms.mean);
}

double collapse_cost(const CurveFamily& curves, double omega_c, double beta_over_nu, double inv_nu, int min_overlap) {
    if (!(inv_nu > 0.0)) return kInf;
    std::vector<std::vector<std::pair<double, double>>> scaled;
    std::vector<Interpolant> interp;
    double mean_sq = 0.0;
    int total = 0;
    for (const auto& [L, c] : curves) {
        scaled.push_back(rescale_curve(c, L, omega_c, beta_over_nu, inv_nu));
        interp.emplace_back(scaled.back());
        for (const auto& [X, Y] : scaled.back()) {
            mean_sq += Y * Y;
            ++total;
        }
    }
    mean_sq /= std::max(total, 1);
    double sum = 0.0;
    int count = 0;
    for (std::size_t a = 0; a < scaled.size(); ++a)
        for (std::size_t b = 0; b < scaled.size(); ++b) {
            if (a == b) continue;
            for (const auto& [X, Y] : scaled[a]) {
                if (!interp[b].contains(X)) continue;
                const double dev = Y - interp[b](X);
                sum += dev * dev;
                ++count;
            }
        }
    if (count < min_overlap || !(mean_sq > 0.0)) return kInf;
    return sum / count / mean_sq;
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                const std::vector<double>& step, int max_iterations, double tol,
                                std::vector<double>* history) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> s(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step[i];
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
    std::vector<std::size_t> order(n + 1);
    for (int it = 0; it < max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (std::size_t i : order) {
                s2.push_back(s[i]);
                f2.push_back(fv[i]);
            }
            s = std::move(s2);
            fv = std::move(f2);
        }
        if (history) history->push_back(fv[0]);
        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(s[i][k] - s[0][k]));
        if (std::isfinite(fv[n]) && std::abs(fv[n] - fv[0]) <= tol * (std::abs(fv[0]) + 1e-300) && size < 1e-9) break;
        if (size < 1e-13) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += s[i][k] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (s[n][k] - centroid[k]);
            return p;
        };
        const std::vector<double> xr = along(-1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const std::vector<double> xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s[n] = xe;
                fv[n] = fe;
            } else {
                s[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            s[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const std::vector<double> xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[n])) {
                s[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k) s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
                    fv[i] = f(s[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return s[best];
}

CollapseResult finite_size_collapse(const CurveFamily& curves, const CollapseOptions& options) {
    if (curves.size() < 4) throw std::invalid_argument("collapse needs at least 4 system sizes");
    double lo = -kInf, hi = kInf;
    for (const auto& [L, c] : curves) {
        check_curve(c);
        lo = std::max(lo, c.front().first);
        hi = std::min(hi, c.back().first);
    }
    if (!(hi > lo)) throw std::invalid_argument("curves have no common window of the control parameter");

    // Stage 1: crossing of xi_L L^gamma1. Grid scan, then simplex.
    double best = kInf, g1 = options.beta_over_nu_start, xc = 0.5 * (lo + hi);
    for (int i = 0; i <= 60; ++i) {
        const double x = lo + (hi - lo) * i / 60.0;
        for (int k = 0; k <= 60; ++k) {
            const double g = -0.5 + 1.5 * k / 60.0;
            const double v = crossing_dispersion(curves, x, g);
            if (v < best) {
                best = v;
                xc = x;
                g1 = g;
            }
        }
    }
    auto stage1 = [&](const std::vector<double>& p) { return crossing_dispersion(curves, p[1], p[0]); };
    std::vector<double> p1 = nelder_mead(stage1, {g1, xc}, {0.02, 0.02 * (hi - lo)}, options.max_iterations, options.tol);
    g1 = p1[0];
    xc = p1[1];
    if (!std::isfinite(stage1(p1))) throw std::runtime_error("no crossing of the rescaled curves in the window");

    // Stage 2: inv_nu at fixed crossing.
    double inv_nu = options.inv_nu_start;
    best = kInf;
    for (int k = 0; k <= 80; ++k) {
        const double v = 0.1 * std::pow(50.0, k / 80.0);
        const double cost = collapse_cost(curves, xc, g1, v);
        if (cost < best) {
            best = cost;
            inv_nu = v;
        }
    }
    auto stage2 = [&](const std::vector<double>& p) { return collapse_cost(curves, xc, g1, p[0]); };
    inv_nu = nelder_mead(stage2, {inv_nu}, {0.05 * inv_nu}, options.max_iterations, options.tol)[0];

    // Stage 3: joint refinement on the collapse cost.
    CollapseResult out;
    auto joint = [&](const std::vector<double>& p) { return collapse_cost(curves, p[0], p[1], p[2]); };
    std::vector<double> p = {xc, g1, inv_nu};
    const std::vector<double> step = {0.01 * (hi - lo), 0.01 + 0.02 * std::abs(g1), 0.05 * inv_nu};
    // Restart the simplex until it stops improving.
    double previous = joint(p);
    for (int round = 0; round < 10; ++round) {
        p = nelder_mead(joint, p, step, options.max_iterations, options.tol, &out.cost_history);
        const double now = joint(p);
        if (!(now < previous * (1.0 - 1e-9))) break;
        previous = now;
    }
    if (!std::isfinite(joint(p))) throw std::runtime_error("collapse optimiser did not converge");
    // Keep the reported history monotone across restarts.
    for (std::size_t i = 1; i < out.cost_history.size(); ++i)
        out.cost_history[i] = std::min(out.cost_history[i], out.cost_history[i - 1]);
    out.omega_c = p[0];
    out.beta_over_nu = p[1];
    out.inv_nu = p[2];
    out.collapse_cost = joint(p);
    out.crossing_dispersion = crossing_dispersion(curves, p[0], p[1]);
    return out;
}

}  // namespace zigzag
