#include "zigzag/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace zigzag {

namespace {

void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    for (const auto& b : basis) v -= b.dot(v) * b;
}

}  // namespace

LanczosResult lanczos_lowest(const MatVec& apply, Eigen::VectorXd x, const LanczosOptions& options,
                             const std::vector<Eigen::VectorXd>& deflate) {
    const Eigen::Index n = x.size();
    if (n == 0) throw std::invalid_argument("lanczos: empty problem");
    const int m_max = static_cast<int>(std::min<Eigen::Index>(options.krylov_dim, n));

    LanczosResult result;
    project_out(x, deflate);
    if (!(x.norm() > 1e-300) || !x.allFinite()) {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
        project_out(x, deflate);
    }
    x.normalize();

    Eigen::MatrixXd V(n, m_max);
    Eigen::VectorXd w(n), Hx(n);
    double previous_residual = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        std::vector<double> alpha, beta;
        V.col(0) = x;
        int m = 0;
        double theta = 0.0;
        Eigen::VectorXd y;
        for (int j = 0; j < m_max; ++j) {
            apply(V.col(j), w);
            ++result.matvecs;
            const double a = V.col(j).dot(w);
            alpha.push_back(a);
            // Full reorthogonalisation, twice.
            for (int pass = 0; pass < 2; ++pass) {
                w.noalias() -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
                project_out(w, deflate);
            }
            const double b = w.norm();
            m = j + 1;

            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
            theta = eig.eigenvalues()(0);
            y = eig.eigenvectors().col(0);
            const double estimate = b * std::abs(y(m - 1));
            const double target = options.tol * std::max(1.0, std::abs(theta));
            if (estimate <= 0.25 * target || b <= 1e-14 * std::max(1.0, std::abs(theta)) || j + 1 == m_max) break;
            beta.push_back(b);
            V.col(j + 1) = w / b;
        }
        x = V.leftCols(m) * y;
        project_out(x, deflate);
        x.normalize();
        apply(x, Hx);
        ++result.matvecs;
        theta = x.dot(Hx);
        result.eigenvalue = theta;
        result.residual = (Hx - theta * x).norm();
        result.vector = x;
        if (result.residual <= options.tol * std::max(1.0, std::abs(theta)) || m == n - static_cast<Eigen::Index>(deflate.size())) {
            result.converged = result.residual <= options.tol * std::max(1.0, std::abs(theta)) ||
                               m >= n - static_cast<Eigen::Index>(deflate.size());
            return result;
        }
        // Round-off floor: the residual stopped shrinking between restarts.
        stalled = result.residual > 0.5 * previous_residual ? stalled + 1 : 0;
        if (stalled >= 2) break;
        previous_residual = std::min(previous_residual, result.residual);
    }
    result.converged = false;
    return result;
}

LanczosResult davidson_lowest(const MatVec& apply, const Eigen::VectorXd& diagonal, Eigen::VectorXd x,
                              const LanczosOptions& options) {
    const Eigen::Index n = x.size();
    if (n == 0) throw std::invalid_argument("davidson: empty problem");
    if (diagonal.size() != n) throw std::invalid_argument("davidson: diagonal size mismatch");
    const int m_max = static_cast<int>(std::min<Eigen::Index>(std::max(options.krylov_dim, 4), n));
    if (!(x.norm() > 1e-300) || !x.allFinite()) {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
    }
    x.normalize();

    LanczosResult result;
    Eigen::MatrixXd V(n, m_max), AV(n, m_max);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m_max, m_max);
    int m = 0;
    auto append = [&](Eigen::VectorXd t) -> bool {
        for (int pass = 0; pass < 2; ++pass) t.noalias() -= V.leftCols(m) * (V.leftCols(m).transpose() * t);
        const double norm = t.norm();
        if (!(norm > 1e-12)) return false;
        V.col(m) = t / norm;
        Eigen::VectorXd w(n);
        apply(V.col(m), w);
        ++result.matvecs;
        AV.col(m) = w;
        for (int i = 0; i <= m; ++i) S(i, m) = S(m, i) = V.col(i).dot(AV.col(m));
        ++m;
        return true;
    };
    append(x);

    Eigen::VectorXd previous_ritz;
    double previous_residual = std::numeric_limits<double>::infinity();
    int stalled = 0;
    const int max_iterations = std::max(1, options.max_restarts) * m_max;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S.topLeftCorner(m, m));
        const double theta = eig.eigenvalues()(0);
        const Eigen::VectorXd s = eig.eigenvectors().col(0);
        Eigen::VectorXd u = V.leftCols(m) * s;
        Eigen::VectorXd r = AV.leftCols(m) * s - theta * u;
        const double res = r.norm();
        result.eigenvalue = theta;
        result.residual = res;
        result.vector = u;
        if (res <= options.tol * std::max(1.0, std::abs(theta)) || m >= n) {
            result.converged = true;
            break;
        }
        // Round-off floor: no progress although already close to the target.
        const bool near = res < 1e3 * options.tol * std::max(1.0, std::abs(theta));
        stalled = near && res > 0.9 * previous_residual ? stalled + 1 : 0;
        if (stalled >= m_max) break;
        previous_residual = std::min(previous_residual, res);

        if (m == m_max) {
            // Restart on the current and previous Ritz vectors.
            Eigen::MatrixXd keep(n, 2);
            keep.col(0) = u;
            keep.col(1) = previous_ritz.size() == n ? previous_ritz : Eigen::VectorXd(r);
            m = 0;
            append(keep.col(0));
            append(keep.col(1));
        }
        previous_ritz = u;
        Eigen::VectorXd t(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double denom = diagonal(i) - theta;
            if (std::abs(denom) < 1e-8) denom = denom < 0 ? -1e-8 : 1e-8;
            t(i) = r(i) / denom;
        }
        if (!append(std::move(t)) && !append(r)) break;
    }
    // Report the residual of the normalised returned vector.
    result.vector.normalize();
    return result;
}

}  // namespace zigzag
