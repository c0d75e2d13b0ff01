#pragma once

// Exact diagonalisation of the truncated lattice Hamiltonian on small chains.
// Sites are 0-based; the dense configuration index is sum_j s_j d^j.

#include <Eigen/Dense>

#include <vector>

namespace zigzag {

struct LocalBasis;

struct DenseSpectrum {
    int L = 0;
    int d = 0;
    long dimension = 0;
    double ground_energy = 0.0;
    Eigen::VectorXd ground_vector;
    double first_gap = 0.0;
    double residual = 0.0;
};

struct OracleOptions {
    double tol = 1e-10;       ///< eigen-residual target, relative to max(1, |E|)
    bool compute_gap = true;  ///< also extract the first excited level
};

/// Maximum Hilbert-space dimension accepted by the oracle.
inline constexpr long kOracleMaxDimension = 1L << 22;

/// out = H in, matrix-free, for H = sum_j (A + c_j N1 W)_j + N1 sum_j Y_j Y_{j+1}.
void apply_lattice_hamiltonian(const LocalBasis& basis, double N1, int L, const Eigen::VectorXd& in,
                               Eigen::VectorXd& out);

DenseSpectrum exact_ground_state(const LocalBasis& basis, double N1, int L, const OracleOptions& options = {});

/// <ground| prod_k O_k(site_k) |ground> for distinct sites.
double exact_expectation(const DenseSpectrum& spectrum, const std::vector<int>& sites,
                         const std::vector<Eigen::MatrixXd>& operators);

/// Apply a single-site operator to a dense state.
Eigen::VectorXd apply_site_operator(const Eigen::VectorXd& psi, int d, int L, int site, const Eigen::MatrixXd& op);

}  // namespace zigzag
