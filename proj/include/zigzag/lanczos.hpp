#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace zigzag {

/// out = H * in for a real symmetric H.
using MatVec = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct LanczosOptions {
    /// Stop when ||H x - E x|| <= tol * max(1, |E|).
    double tol = 1e-12;
    int krylov_dim = 30;
    int max_restarts = 60;
};

struct LanczosResult {
    double eigenvalue = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    int matvecs = 0;
    bool converged = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalisation,
/// starting from `start` (a fixed pseudo-random vector if it is zero). The
/// iteration is kept orthogonal to every vector in `deflate`, which must be
/// orthonormal; this gives the next state above them. Returns unconverged
/// early once restarts stop reducing the residual (round-off floor).
LanczosResult lanczos_lowest(const MatVec& apply, Eigen::VectorXd start, const LanczosOptions& options = {},
                             const std::vector<Eigen::VectorXd>& deflate = {});

/// Lowest eigenpair by Davidson iteration with the diagonal preconditioner
/// (diag - theta)^-1. Same stopping rule as lanczos_lowest; the subspace is
/// restarted from the current and previous Ritz vectors at krylov_dim.
LanczosResult davidson_lowest(const MatVec& apply, const Eigen::VectorXd& diagonal, Eigen::VectorXd start,
                              const LanczosOptions& options = {});

}  // namespace zigzag
