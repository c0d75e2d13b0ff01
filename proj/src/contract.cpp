#include "contract.hpp"

namespace zigzag::detail {

namespace {
using Map = Eigen::Map<Eigen::MatrixXd>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;
}  // namespace

void left_contract(const SiteTensor& A, const Bond& left, const LocalSpace& space, const Blocks* E, int cE,
                   const SectorOperator* O, double scale, Blocks& out) {
    const int cO = O ? O->charge : 0;
    Eigen::MatrixXd T, U;
    for (int pl = 0; pl < 2; ++pl) {
        for (int ps = 0; ps < 2; ++ps) {
            const Eigen::MatrixXd& Ak = A.at(pl, ps);
            if (Ak.size() == 0) continue;
            const int pr = pl ^ ps;
            const int plb = pl ^ cE, psb = ps ^ cO;
            const Eigen::MatrixXd& Ab = A.at(plb, psb);
            if (Ab.size() == 0) continue;
            const int Dlk = left.dim[static_cast<std::size_t>(pl)];
            const int Dlb = left.dim[static_cast<std::size_t>(plb)];
            const int dk = space.dim(ps), db = space.dim(psb);
            const int Drk = static_cast<int>(Ak.cols());

            const double* tp = Ak.data();
            if (E) {
                T.resize(Dlb, dk * Drk);
                T.noalias() = (*E)[static_cast<std::size_t>(pl)] * CMap(Ak.data(), Dlk, dk * Drk);
                tp = T.data();
            }
            const double* up = tp;
            if (O) {
                U.resize(Dlb * db, Drk);
                apply_middle(tp, Dlb, dk, Drk, O->block[static_cast<std::size_t>(ps)], U.data(), false);
                up = U.data();
            }
            out[static_cast<std::size_t>(pr)].noalias() += scale * Ab.transpose() * CMap(up, Dlb * db, Drk);
        }
    }
}

void right_contract(const SiteTensor& B, const Bond& left, const LocalSpace& space, const Blocks* E, int cE,
                    const SectorOperator* O, double scale, Blocks& out) {
    const int cO = O ? O->charge : 0;
    Eigen::MatrixXd T, U;
    for (int pl = 0; pl < 2; ++pl) {
        for (int ps = 0; ps < 2; ++ps) {
            const Eigen::MatrixXd& Bk = B.at(pl, ps);
            if (Bk.size() == 0) continue;
            const int pr = pl ^ ps;
            const int prb = pr ^ cE, psb = ps ^ cO;
            const int plb = prb ^ psb;
            const Eigen::MatrixXd& Bb = B.at(plb, psb);
            if (Bb.size() == 0) continue;
            const int Dlk = left.dim[static_cast<std::size_t>(pl)];
            const int Dlb = left.dim[static_cast<std::size_t>(plb)];
            const int dk = space.dim(ps), db = space.dim(psb);
            const int Drb = static_cast<int>(Bb.cols());

            const double* tp = Bk.data();
            if (E) {
                T.resize(Bk.rows(), Drb);
                T.noalias() = Bk * (*E)[static_cast<std::size_t>(pr)].transpose();
                tp = T.data();
            }
            const double* up = tp;
            if (O) {
                U.resize(Dlk * db, Drb);
                apply_middle(tp, Dlk, dk, Drb, O->block[static_cast<std::size_t>(ps)], U.data(), false);
                up = U.data();
            }
            out[static_cast<std::size_t>(pl)].noalias() +=
                scale * CMap(Bb.data(), Dlb, db * Drb) * CMap(up, Dlk, db * Drb).transpose();
        }
    }
}

double join(const Blocks& left, const Blocks& right) {
    double s = 0.0;
    for (std::size_t pk = 0; pk < 2; ++pk)
        if (left[pk].size()) s += left[pk].cwiseProduct(right[pk]).sum();
    return s;
}

}  // namespace zigzag::detail
