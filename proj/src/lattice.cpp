#include "zigzag/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

#include "zigzag/localbasis.hpp"

namespace zigzag {

double obc_weight(int j, int L) {
    if (j < 0 || j >= L) throw std::out_of_range("site out of range");
    const int bonds = (j > 0 ? 1 : 0) + (j + 1 < L ? 1 : 0);
    return 0.5 * bonds;
}

LatticeHamiltonian build_lattice_hamiltonian(const LocalBasis& basis, double N1, int L) {
    if (L < 2) throw std::invalid_argument("lattice Hamiltonian needs L >= 2");
    if (!std::isfinite(N1)) throw std::invalid_argument("N1 must be finite");
    LatticeHamiltonian H;
    H.L = L;
    H.N1 = N1;
    H.space = LocalSpace(basis.parity);
    H.Y = 0.5 * (basis.Y + basis.Y.transpose());
    const Eigen::MatrixXd A = basis.A();
    const Eigen::MatrixXd W = 0.5 * (basis.W + basis.W.transpose());
    H.Y_blocks = SectorOperator::from_dense(H.Y, H.space, 1);
    for (int j = 0; j < L; ++j) {
        const double c = obc_weight(j, L);
        H.edge_weight.push_back(c);
        H.local.push_back(A + c * N1 * W);
        H.local_blocks.push_back(SectorOperator::from_dense(H.local.back(), H.space, 0));
    }
    return H;
}

Eigen::MatrixXd LatticeHamiltonian::mpo_entry(int j, int a, int b) const {
    const int n = d();
    if (a == 0 && b == 0) return Eigen::MatrixXd::Identity(n, n);
    if (a == 1 && b == 0) return Y;
    if (a == 2 && b == 0) return local.at(static_cast<std::size_t>(j));
    if (a == 2 && b == 1) return N1 * Y;
    if (a == 2 && b == 2) return Eigen::MatrixXd::Identity(n, n);
    return Eigen::MatrixXd::Zero(n, n);
}

Eigen::MatrixXd mpo_dense_expansion(const LatticeHamiltonian& H) {
    const double dim = std::pow(static_cast<double>(H.d()), H.L);
    if (dim > 4096) throw std::invalid_argument("dense MPO expansion limited to d^L <= 4096");
    // Partial products P[b]: operator on sites 0..j ending in MPO index b.
    // A new site enters as the more significant factor: kron(site, P).
    std::array<Eigen::MatrixXd, 3> P;
    for (int b = 0; b < 3; ++b) P[static_cast<std::size_t>(b)] = H.mpo_entry(0, 2, b);
    for (int j = 1; j < H.L; ++j) {
        std::array<Eigen::MatrixXd, 3> next;
        const Eigen::Index n = P[0].rows() * H.d();
        for (int b = 0; b < 3; ++b) {
            next[static_cast<std::size_t>(b)] = Eigen::MatrixXd::Zero(n, n);
            for (int a = 0; a < 3; ++a) {
                const Eigen::MatrixXd w = H.mpo_entry(j, a, b);
                if (w.isZero(0.0)) continue;
                next[static_cast<std::size_t>(b)] += Eigen::kroneckerProduct(w, P[static_cast<std::size_t>(a)]).eval();
            }
        }
        P = std::move(next);
    }
    return P[0];
}

}  // namespace zigzag
