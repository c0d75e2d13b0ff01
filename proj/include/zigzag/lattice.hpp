#pragma once

// Nearest-neighbour lattice Hamiltonian in the truncated local basis,
//
//   H = sum_j (A + c_j N1 W)_j + N1 sum_j Y_j Y_{j+1},
//
// with open-boundary weights c_j = (number of bonds touching j) / 2, and its
// matrix-product-operator form
//
//   W_j = [[ 1,   0,    0 ],
//          [ Y,   0,    0 ],
//          [ h_j, N1 Y, 1 ]],   h_j = A + c_j N1 W,
//
// contracted from row 2 on the left to column 0 on the right.

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "zigzag/z2.hpp"

namespace zigzag {

struct LocalBasis;

struct LatticeHamiltonian {
    int L = 0;
    double N1 = 0.0;
    LocalSpace space;
    Eigen::MatrixXd Y;                     ///< dense d x d
    std::vector<Eigen::MatrixXd> local;    ///< h_j, dense d x d
    std::vector<double> edge_weight;       ///< c_j
    SectorOperator Y_blocks;               ///< Y in parity-sector form
    std::vector<SectorOperator> local_blocks;

    int d() const { return space.d(); }
    /// Operator entry W_j[a][b] as a dense d x d matrix (zero when absent).
    Eigen::MatrixXd mpo_entry(int j, int a, int b) const;
};

/// Open-boundary weight of the on-site W term: 1/2 at the ends, 1 in the bulk,
/// 0 for a single site (no bonds).
double obc_weight(int j, int L);

LatticeHamiltonian build_lattice_hamiltonian(const LocalBasis& basis, double N1, int L);

/// Dense d^L x d^L matrix from contracting the MPO (site 0 least significant).
Eigen::MatrixXd mpo_dense_expansion(const LatticeHamiltonian& H);

}  // namespace zigzag
