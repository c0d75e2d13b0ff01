#pragma once

// Z2 (reflection parity) bookkeeping shared by the tensor-network code.
// Every index space is split into an even and an odd sector; tensors only
// store the parity-conserving blocks.

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace zigzag {

/// Local levels grouped by parity. levels[p] lists level indices (ascending)
/// of parity p; position inside the list is the sector-local index.
struct LocalSpace {
    std::array<std::vector<int>, 2> levels;
    std::vector<int> parity;       ///< per level
    std::vector<int> sector_index; ///< per level: position inside levels[parity]

    LocalSpace() = default;
    explicit LocalSpace(const std::vector<int>& level_parity);

    int d() const { return static_cast<int>(parity.size()); }
    int dim(int p) const { return static_cast<int>(levels[static_cast<std::size_t>(p)].size()); }
};

/// Dimension of a virtual bond, per parity sector (even states first).
struct Bond {
    std::array<int, 2> dim{0, 0};
    int total() const { return dim[0] + dim[1]; }
    int offset(int p) const { return p == 0 ? 0 : dim[0]; }
    bool operator==(const Bond&) const = default;
};

/// Local operator with definite charge: block[p] maps sector p to sector
/// p ^ charge and has shape dim(p ^ charge) x dim(p).
struct SectorOperator {
    int charge = 0;
    std::array<Eigen::MatrixXd, 2> block;

    static SectorOperator from_dense(const Eigen::MatrixXd& op, const LocalSpace& space, int charge);
    static SectorOperator identity(const LocalSpace& space);
    Eigen::MatrixXd to_dense(const LocalSpace& space) const;
};

/// Y(a, b', c) = scale * sum_b O(b', b) X(a, b, c) for column-major X of
/// shape a x b x c (a fastest). Accumulates into Y when accumulate is set.
void apply_middle(const double* X, int a, int b, int c, const Eigen::MatrixXd& O, double* Y, bool accumulate,
                  double scale = 1.0);

}  // namespace zigzag
