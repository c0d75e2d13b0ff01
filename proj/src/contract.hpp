#pragma once

// Environment contractions shared by the sweep and the measurement code.
// An environment on a bond is a pair of matrices indexed by the ket parity
// pk, each of shape D[pk ^ charge] x D[pk] (bra rows, ket columns).

#include <array>

#include "zigzag/mps.hpp"
#include "zigzag/z2.hpp"

namespace zigzag::detail {

using Blocks = std::array<Eigen::MatrixXd, 2>;

inline Blocks zero_blocks(const Bond& b, int charge) {
    Blocks out;
    for (int pk = 0; pk < 2; ++pk)
        out[static_cast<std::size_t>(pk)] =
            Eigen::MatrixXd::Zero(b.dim[static_cast<std::size_t>(pk ^ charge)], b.dim[static_cast<std::size_t>(pk)]);
    return out;
}

inline Blocks identity_blocks(const Bond& b) {
    Blocks out;
    for (int pk = 0; pk < 2; ++pk)
        out[static_cast<std::size_t>(pk)] =
            Eigen::MatrixXd::Identity(b.dim[static_cast<std::size_t>(pk)], b.dim[static_cast<std::size_t>(pk)]);
    return out;
}

/// out[pr] += scale * sum A^T (E x O) A across one site, moving from the
/// left bond to the right bond. E == nullptr means the identity (cE = 0),
/// O == nullptr the identity operator.
void left_contract(const SiteTensor& A, const Bond& left, const LocalSpace& space, const Blocks* E, int cE,
                   const SectorOperator* O, double scale, Blocks& out);

/// Mirror image: from the right bond to the left bond.
void right_contract(const SiteTensor& B, const Bond& left, const LocalSpace& space, const Blocks* E, int cE,
                    const SectorOperator* O, double scale, Blocks& out);

/// Scalar from joining a left and a right environment on the same bond:
/// sum_pk tr(Lenv[pk]^T Renv[pk]).
double join(const Blocks& left, const Blocks& right);

}  // namespace zigzag::detail
