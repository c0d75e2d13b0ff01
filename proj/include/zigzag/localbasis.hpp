#pragma once

// Truncated local basis: the d lowest eigenstates of the single-site
// harmonic-quartic Hamiltonian
//
//   H_loc = 1/2 [ -g^2 d^2/dy^2 + (omega2 - M_1) y^2 + M_2 y^4 ]
//
// discretised on a uniform grid, together with the matrices of y and y^2
// between the kept states.

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zigzag/model.hpp"

namespace zigzag {

/// Real-space grid on [-y_max, y_max] with Dirichlet walls at the ends.
/// Interior points sit at y_i = i h for i = -M..M, h = y_max / (M + 1); an
/// even `points` request is rounded up to the next odd count.
struct GridSpec {
    double y_max = 2.0;
    int points = 4097;

    int half_points() const { return points / 2; }  // M
    int total_points() const { return 2 * half_points() + 1; }
    double step() const { return y_max / (half_points() + 1); }
};

/// Symmetric tridiagonal matrix with its grid.
struct TridiagonalMatrix {
    std::vector<double> diagonal;
    std::vector<double> off_diagonal;  ///< size n - 1
    std::vector<double> y;             ///< grid coordinate of each row
    double step = 0.0;
};

/// Potential and kinetic scale of H_loc.
struct LocalPotential {
    double g = 0.1;
    double quadratic = 0.0;  ///< omega2 - M_1
    double quartic = 0.0;    ///< M_2

    static LocalPotential from(const ModelParameters& params, const CoefficientTable& coeffs);

    double operator()(double y) const {
        const double y2 = y * y;
        return 0.5 * (quadratic * y2 + quartic * y2 * y2);
    }
    double minimum() const;
    /// Harmonic frequency at the well bottom (quartic scale near the flat point).
    double curvature_frequency() const;
};

/// Second-order central-difference discretisation of H_loc on the full grid.
TridiagonalMatrix build_grid_hamiltonian(const ModelParameters& params, const CoefficientTable& coeffs,
                                         const GridSpec& grid);
TridiagonalMatrix build_grid_hamiltonian(const LocalPotential& potential, const GridSpec& grid);

struct LocalBasisOptions {
    /// Relative change of the extrapolated eigenvalues tolerated under one
    /// grid doubling.
    double refine_tol = 1e-10;
    /// Coarsest grid of the refinement ladder when no grid is supplied.
    /// Coarse starts keep the accepted grid small, where round-off in the
    /// stencil (of order eps * g^2 / h^2) stays below refine_tol.
    int initial_points = 257;
    int max_points = (1 << 21) + 1;
    /// Required V(y_max) - E_d in units of g * curvature_frequency.
    double wall_margin = 20.0;
};

/// The d kept levels of H_loc with their operator matrices.
struct LocalBasis {
    int d = 0;
    ModelParameters params;
    LocalPotential potential;
    GridSpec grid;
    Eigen::VectorXd energies;        ///< ascending, Richardson-combined over two grids
    std::vector<int> parity;         ///< 0 even, 1 odd under y -> -y
    Eigen::MatrixXd half_wavefunctions;  ///< psi_q(y_i) for i = 0..M (y >= 0)
    /// Same levels on successively halved grids (step 2h, 4h); used for the
    /// Richardson-combined energies and matrix elements. May be empty.
    std::vector<Eigen::MatrixXd> coarse_half_wavefunctions;
    Eigen::MatrixXd Y;               ///< <psi_q| y |psi_q'>
    Eigen::MatrixXd W;               ///< <psi_q| y^2 |psi_q'>
    double refinement_shift = 0.0;   ///< max relative energy change at the last doubling

    Eigen::MatrixXd A() const { return energies.asDiagonal(); }
    /// Wavefunctions on the full grid, one column per level.
    Eigen::MatrixXd wavefunctions() const;
    Eigen::VectorXd grid_points() const;
    /// Diagonal parity operator R (entries +1 / -1).
    Eigen::MatrixXd reflection() const;
};

/// Diagonalise H_loc and keep the d lowest levels. Without an explicit grid
/// the domain is sized from the potential and the grid is doubled until the
/// kept energies are converged; with an explicit grid the same checks are
/// applied to it and failures are reported as std::runtime_error.
LocalBasis solve_local_basis(const ModelParameters& params, const CoefficientTable& coeffs, int d,
                             const std::optional<GridSpec>& grid = std::nullopt,
                             const LocalBasisOptions& options = {});

LocalBasis solve_local_basis(const ModelParameters& params, int d,
                             const std::optional<GridSpec>& grid = std::nullopt,
                             const LocalBasisOptions& options = {});

/// <psi_q| y^power |psi_q'> by trapezoid quadrature, Richardson-combined
/// over the basis grid and its coarse partner when the latter is present.
Eigen::MatrixXd operator_matrix_elements(const LocalBasis& basis, int power);

/// Keyed text dump of a basis (energies, Y, W, sampled wavefunctions) with
/// doubles printed at 17 significant digits.
void write_local_basis(std::ostream& out, const LocalBasis& basis, int wavefunction_samples = 401);

}  // namespace zigzag
