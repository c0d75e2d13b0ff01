#include "zigzag/z2.hpp"

#include <stdexcept>

namespace zigzag {

LocalSpace::LocalSpace(const std::vector<int>& level_parity) : parity(level_parity) {
    sector_index.resize(parity.size());
    for (std::size_t q = 0; q < parity.size(); ++q) {
        const int p = parity[q];
        if (p != 0 && p != 1) throw std::invalid_argument("level parity must be 0 or 1");
        sector_index[q] = static_cast<int>(levels[static_cast<std::size_t>(p)].size());
        levels[static_cast<std::size_t>(p)].push_back(static_cast<int>(q));
    }
}

SectorOperator SectorOperator::from_dense(const Eigen::MatrixXd& op, const LocalSpace& space, int charge) {
    if (op.rows() != space.d() || op.cols() != space.d()) throw std::invalid_argument("operator size mismatch");
    SectorOperator out;
    out.charge = charge;
    for (int p = 0; p < 2; ++p) {
        const int po = p ^ charge;
        auto& b = out.block[static_cast<std::size_t>(p)];
        b.resize(space.dim(po), space.dim(p));
        for (int i = 0; i < space.dim(po); ++i)
            for (int j = 0; j < space.dim(p); ++j)
                b(i, j) = op(space.levels[static_cast<std::size_t>(po)][static_cast<std::size_t>(i)],
                             space.levels[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)]);
    }
    return out;
}

SectorOperator SectorOperator::identity(const LocalSpace& space) {
    SectorOperator out;
    for (int p = 0; p < 2; ++p)
        out.block[static_cast<std::size_t>(p)] = Eigen::MatrixXd::Identity(space.dim(p), space.dim(p));
    return out;
}

Eigen::MatrixXd SectorOperator::to_dense(const LocalSpace& space) const {
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(space.d(), space.d());
    for (int p = 0; p < 2; ++p) {
        const int po = p ^ charge;
        const auto& b = block[static_cast<std::size_t>(p)];
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j)
                op(space.levels[static_cast<std::size_t>(po)][static_cast<std::size_t>(i)],
                   space.levels[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)]) = b(i, j);
    }
    return op;
}

void apply_middle(const double* X, int a, int b, int c, const Eigen::MatrixXd& O, double* Y, bool accumulate,
                  double scale) {
    const int bo = static_cast<int>(O.rows());
    if (O.cols() != b) throw std::invalid_argument("apply_middle: operator shape mismatch");
    if (a == 0 || c == 0 || bo == 0) return;
    if (b == 0) {
        if (!accumulate) Eigen::Map<Eigen::MatrixXd>(Y, a, bo * c).setZero();
        return;
    }
    if (a == 1) {
        // X is b x c; Y is bo x c.
        Eigen::Map<const Eigen::MatrixXd> x(X, b, c);
        Eigen::Map<Eigen::MatrixXd> y(Y, bo, c);
        if (accumulate)
            y.noalias() += scale * O * x;
        else
            y.noalias() = scale * O * x;
        return;
    }
    const Eigen::MatrixXd Ot = scale * O.transpose();
    for (int k = 0; k < c; ++k) {
        Eigen::Map<const Eigen::MatrixXd> x(X + static_cast<std::ptrdiff_t>(k) * a * b, a, b);
        Eigen::Map<Eigen::MatrixXd> y(Y + static_cast<std::ptrdiff_t>(k) * a * bo, a, bo);
        if (accumulate)
            y.noalias() += x * Ot;
        else
            y.noalias() = x * Ot;
    }
}

}  // namespace zigzag
