#include "zigzag/mps.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "zigzag/localbasis.hpp"

namespace zigzag {

namespace {

using Map = Eigen::Map<Eigen::MatrixXd>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;

// Thin QR of M (rows x cols): Q is rows x k, R is k x cols, k = min(rows, cols).
void thin_qr(const Eigen::MatrixXd& M, Eigen::MatrixXd& Q, Eigen::MatrixXd& R) {
    const Eigen::Index k = std::min(M.rows(), M.cols());
    if (k == 0) {
        Q.resize(M.rows(), 0);
        R.resize(0, M.cols());
        return;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), k);
    R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    // Fix signs so R has a non-negative diagonal; makes the result unique.
    for (Eigen::Index i = 0; i < k; ++i) {
        if (R(i, i) < 0.0) {
            R.row(i) *= -1.0;
            Q.col(i) *= -1.0;
        }
    }
}

}  // namespace

MatrixProductState::MatrixProductState(LocalSpace space, std::vector<Bond> bonds)
    : space_(std::move(space)), bonds_(std::move(bonds)) {
    if (bonds_.size() < 2) throw std::invalid_argument("MPS needs at least one site");
    const int L = static_cast<int>(bonds_.size()) - 1;
    sites_.resize(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j)
        for (int pl = 0; pl < 2; ++pl)
            for (int ps = 0; ps < 2; ++ps)
                site(j).at(pl, ps) = Eigen::MatrixXd::Zero(bond(j).dim[static_cast<std::size_t>(pl)] * space_.dim(ps),
                                                           bond(j + 1).dim[static_cast<std::size_t>(pl ^ ps)]);
    schmidt_.assign(static_cast<std::size_t>(std::max(L - 1, 0)), std::vector<double>{});
}

int MatrixProductState::max_bond_dimension() const {
    int D = 0;
    for (const auto& b : bonds_) D = std::max(D, b.total());
    return D;
}

void MatrixProductState::set_site(int j, SiteTensor tensor, const Bond& right) {
    sites_.at(static_cast<std::size_t>(j)) = std::move(tensor);
    bonds_.at(static_cast<std::size_t>(j + 1)) = right;
}

void MatrixProductState::set_schmidt(int cut, std::vector<double> values) {
    schmidt_.at(static_cast<std::size_t>(cut - 1)) = std::move(values);
}

void MatrixProductState::qr_right(int j) {
    Bond right_new;
    SiteTensor& A = site(j);
    SiteTensor& B = site(j + 1);
    const Bond right_old = bond(j + 1);
    for (int pr = 0; pr < 2; ++pr) {
        const int rows0 = static_cast<int>(A.at(pr, 0).rows());
        const int rows1 = static_cast<int>(A.at(pr ^ 1, 1).rows());
        Eigen::MatrixXd M(rows0 + rows1, right_old.dim[static_cast<std::size_t>(pr)]);
        M.topRows(rows0) = A.at(pr, 0);
        M.bottomRows(rows1) = A.at(pr ^ 1, 1);
        Eigen::MatrixXd Q, R;
        thin_qr(M, Q, R);
        const int k = static_cast<int>(Q.cols());
        right_new.dim[static_cast<std::size_t>(pr)] = k;
        A.at(pr, 0) = Q.topRows(rows0);
        A.at(pr ^ 1, 1) = Q.bottomRows(rows1);
        for (int ps = 0; ps < 2; ++ps) {
            Eigen::MatrixXd& blk = B.at(pr, ps);
            const int cols = static_cast<int>(blk.cols());
            const int dps = space_.dim(ps);
            CMap view(blk.data(), right_old.dim[static_cast<std::size_t>(pr)], dps * cols);
            Eigen::MatrixXd next = R * view;
            blk.resize(k * dps, cols);
            Map(blk.data(), k, dps * cols) = next;
        }
    }
    bonds_[static_cast<std::size_t>(j + 1)] = right_new;
}

void MatrixProductState::lq_left(int j) {
    const Bond left_old = bond(j);
    Bond left_new;
    SiteTensor& B = site(j);
    SiteTensor& A = site(j - 1);
    const Bond right = bond(j + 1);
    for (int pl = 0; pl < 2; ++pl) {
        const int Dl = left_old.dim[static_cast<std::size_t>(pl)];
        const int c0 = space_.dim(0) * right.dim[static_cast<std::size_t>(pl)];
        const int c1 = space_.dim(1) * right.dim[static_cast<std::size_t>(pl ^ 1)];
        Eigen::MatrixXd Mt(c0 + c1, Dl);
        Mt.topRows(c0) = CMap(B.at(pl, 0).data(), Dl, c0).transpose();
        Mt.bottomRows(c1) = CMap(B.at(pl, 1).data(), Dl, c1).transpose();
        Eigen::MatrixXd Q, R;
        thin_qr(Mt, Q, R);
        const int k = static_cast<int>(Q.cols());
        left_new.dim[static_cast<std::size_t>(pl)] = k;
        for (int ps = 0; ps < 2; ++ps) {
            const int c = ps == 0 ? c0 : c1;
            Eigen::MatrixXd blk = (ps == 0 ? Q.topRows(c0) : Q.bottomRows(c1)).transpose();  // k x c
            const int cols = right.dim[static_cast<std::size_t>(pl ^ ps)];
            B.at(pl, ps).resize(k * space_.dim(ps), cols);
            Map(B.at(pl, ps).data(), k, c) = blk;
        }
        // Previous site: blocks whose right parity is pl absorb R^T.
        for (int ps = 0; ps < 2; ++ps) {
            Eigen::MatrixXd& prev = A.at(pl ^ ps, ps);
            prev = (prev * R.transpose()).eval();
        }
    }
    bonds_[static_cast<std::size_t>(j)] = left_new;
}

void MatrixProductState::canonicalize(int c) {
    const int L = length();
    if (c < 0 || c >= L) throw std::out_of_range("canonical centre out of range");
    for (int j = 0; j < c; ++j) qr_right(j);
    for (int j = L - 1; j > c; --j) lq_left(j);
    center_ = c;
    normalize();
}

void MatrixProductState::move_center_to(int c) {
    if (c < 0 || c >= length()) throw std::out_of_range("canonical centre out of range");
    while (center_ < c) qr_right(center_++);
    while (center_ > c) lq_left(center_--);
}

namespace {

// Left transfer of the identity: E[pr] = sum A(pl, ps)^T (E[pl] x 1) A(pl, ps).
std::array<Eigen::MatrixXd, 2> transfer_identity(const std::array<Eigen::MatrixXd, 2>& E, const SiteTensor& A,
                                                 const LocalSpace& space, const Bond& left, const Bond& right) {
    std::array<Eigen::MatrixXd, 2> out;
    for (int pr = 0; pr < 2; ++pr)
        out[static_cast<std::size_t>(pr)] = Eigen::MatrixXd::Zero(right.dim[static_cast<std::size_t>(pr)],
                                                                 right.dim[static_cast<std::size_t>(pr)]);
    for (int pl = 0; pl < 2; ++pl) {
        for (int ps = 0; ps < 2; ++ps) {
            const Eigen::MatrixXd& blk = A.at(pl, ps);
            if (blk.size() == 0) continue;
            const int Dl = left.dim[static_cast<std::size_t>(pl)];
            const int rest = space.dim(ps) * static_cast<int>(blk.cols());
            Eigen::MatrixXd tmp(blk.rows(), blk.cols());
            Map(tmp.data(), Dl, rest).noalias() = E[static_cast<std::size_t>(pl)] * CMap(blk.data(), Dl, rest);
            out[static_cast<std::size_t>(pl ^ ps)].noalias() += blk.transpose() * tmp;
        }
    }
    return out;
}

std::array<Eigen::MatrixXd, 2> left_boundary() {
    return {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Zero(0, 0)};
}

}  // namespace

std::array<double, 2> MatrixProductState::parity_weights() const {
    auto E = left_boundary();
    for (int j = 0; j < length(); ++j) E = transfer_identity(E, site(j), space_, bond(j), bond(j + 1));
    std::array<double, 2> w{0.0, 0.0};
    for (int p = 0; p < 2; ++p)
        if (E[static_cast<std::size_t>(p)].size() > 0) w[static_cast<std::size_t>(p)] = E[static_cast<std::size_t>(p)].trace();
    return w;
}

double MatrixProductState::norm() const {
    const auto w = parity_weights();
    return std::sqrt(std::max(w[0] + w[1], 0.0));
}

void MatrixProductState::normalize() {
    // With the state in canonical form around the centre the norm lives on
    // the centre tensor; otherwise fall back to a full contraction.
    double n = 0.0;
    if (canonical_error() < 1e-8) {
        for (int pl = 0; pl < 2; ++pl)
            for (int ps = 0; ps < 2; ++ps) n += site(center_).at(pl, ps).squaredNorm();
        n = std::sqrt(n);
    } else {
        n = norm();
    }
    if (!(n > 0.0)) throw std::runtime_error("cannot normalise a zero state");
    for (int pl = 0; pl < 2; ++pl)
        for (int ps = 0; ps < 2; ++ps) site(center_).at(pl, ps) /= n;
}

double MatrixProductState::canonical_error() const {
    double worst = 0.0;
    for (int j = 0; j < length(); ++j) {
        if (j == center_) continue;
        for (int p = 0; p < 2; ++p) {
            if (j < center_) {
                const int D = bond(j + 1).dim[static_cast<std::size_t>(p)];
                Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D);
                for (int ps = 0; ps < 2; ++ps) {
                    const Eigen::MatrixXd& blk = site(j).at(p ^ ps, ps);
                    if (blk.size()) G.noalias() += blk.transpose() * blk;
                }
                if (D) worst = std::max(worst, (G - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff());
            } else {
                const int D = bond(j).dim[static_cast<std::size_t>(p)];
                Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D);
                for (int ps = 0; ps < 2; ++ps) {
                    const Eigen::MatrixXd& blk = site(j).at(p, ps);
                    if (blk.size() == 0) continue;
                    const CMap view(blk.data(), D, static_cast<Eigen::Index>(blk.size() / D));
                    G.noalias() += view * view.transpose();
                }
                if (D) worst = std::max(worst, (G - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff());
            }
        }
    }
    return worst;
}

std::vector<std::vector<double>> MatrixProductState::compute_schmidt_spectra() {
    MatrixProductState work = *this;
    work.canonicalize(0);
    std::vector<std::vector<double>> out;
    for (int j = 0; j + 1 < work.length(); ++j) {
        SiteTensor& A = work.site(j);
        SiteTensor& B = work.site(j + 1);
        const Bond right_old = work.bond(j + 1);
        Bond right_new;
        std::vector<double> values;
        for (int pr = 0; pr < 2; ++pr) {
            const int rows0 = static_cast<int>(A.at(pr, 0).rows());
            const int rows1 = static_cast<int>(A.at(pr ^ 1, 1).rows());
            const int Dr = right_old.dim[static_cast<std::size_t>(pr)];
            Eigen::MatrixXd M(rows0 + rows1, Dr);
            M.topRows(rows0) = A.at(pr, 0);
            M.bottomRows(rows1) = A.at(pr ^ 1, 1);
            const Eigen::Index k = std::min(M.rows(), M.cols());
            Eigen::MatrixXd U(M.rows(), k), SVt(k, Dr);
            if (k > 0) {
                Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
                U = svd.matrixU();
                SVt = svd.singularValues().asDiagonal() * svd.matrixV().transpose();
                for (Eigen::Index i = 0; i < k; ++i) values.push_back(svd.singularValues()(i));
            }
            right_new.dim[static_cast<std::size_t>(pr)] = static_cast<int>(k);
            A.at(pr, 0) = U.topRows(rows0);
            A.at(pr ^ 1, 1) = U.bottomRows(rows1);
            for (int ps = 0; ps < 2; ++ps) {
                Eigen::MatrixXd& blk = B.at(pr, ps);
                const int cols = static_cast<int>(blk.cols());
                const int dps = work.space().dim(ps);
                Eigen::MatrixXd next = SVt * CMap(blk.data(), Dr, dps * cols);
                blk.resize(k * dps, cols);
                Map(blk.data(), k, dps * cols) = next;
            }
        }
        work.bonds_[static_cast<std::size_t>(j + 1)] = right_new;
        work.center_ = j + 1;
        std::sort(values.begin(), values.end(), std::greater<>());
        out.push_back(std::move(values));
    }
    schmidt_ = out;
    return out;
}

std::vector<double> MatrixProductState::schmidt_spectrum(int cut) const {
    if (cut < 1 || cut >= length()) throw std::out_of_range("cut must lie in 1..L-1");
    MatrixProductState work = *this;
    return work.compute_schmidt_spectra()[static_cast<std::size_t>(cut - 1)];
}

void MatrixProductState::apply_global_parity() {
    for (auto& s : sites_)
        for (int pl = 0; pl < 2; ++pl) s.at(pl, 1) *= -1.0;
}

void MatrixProductState::project_parity(int p) {
    if (p != 0 && p != 1) throw std::invalid_argument("parity must be 0 or 1");
    const int L = length();
    if (!(parity_weights()[static_cast<std::size_t>(p)] > 1e-300))
        throw std::runtime_error("state has no component of the requested parity");
    SiteTensor& last = site(L - 1);
    const int Dl_rows[2] = {bond(L - 1).dim[0], bond(L - 1).dim[1]};
    for (int pl = 0; pl < 2; ++pl)
        for (int ps = 0; ps < 2; ++ps) {
            Eigen::MatrixXd& blk = last.at(pl, ps);
            if ((pl ^ ps) == p) continue;
            blk = Eigen::MatrixXd::Zero(Dl_rows[pl] * space_.dim(ps), 0);
        }
    Bond end;
    end.dim[static_cast<std::size_t>(p)] = 1;
    set_bond(L, end);
    const int c = std::clamp(center_, 0, L - 1);
    canonicalize(c);
}

Eigen::VectorXd MatrixProductState::to_dense() const {
    const int L = length();
    const int d = space_.d();
    if (std::pow(static_cast<double>(d), L) > static_cast<double>(1 << 24))
        throw std::invalid_argument("state too large for a dense vector");
    // P[p] is (configurations so far) x Dbond[p].
    std::array<Eigen::MatrixXd, 2> P{Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Zero(1, 0)};
    long n = 1;
    for (int j = 0; j < L; ++j) {
        std::array<Eigen::MatrixXd, 2> next;
        for (int pr = 0; pr < 2; ++pr)
            next[static_cast<std::size_t>(pr)] = Eigen::MatrixXd::Zero(n * d, bond(j + 1).dim[static_cast<std::size_t>(pr)]);
        for (int pl = 0; pl < 2; ++pl) {
            const int Dl = bond(j).dim[static_cast<std::size_t>(pl)];
            for (int ps = 0; ps < 2; ++ps) {
                const Eigen::MatrixXd& blk = site(j).at(pl, ps);
                for (int si = 0; si < space_.dim(ps); ++si) {
                    const long s = space_.levels[static_cast<std::size_t>(ps)][static_cast<std::size_t>(si)];
                    next[static_cast<std::size_t>(pl ^ ps)].middleRows(s * n, n).noalias() +=
                        P[static_cast<std::size_t>(pl)] * blk.middleRows(static_cast<Eigen::Index>(si) * Dl, Dl);
                }
            }
        }
        P = std::move(next);
        n *= d;
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int p = 0; p < 2; ++p)
        if (P[static_cast<std::size_t>(p)].cols() > 0) out += P[static_cast<std::size_t>(p)].col(0);
    return out;
}

InitStrategy parse_init_strategy(const std::string& name) {
    if (name == "random") return InitStrategy::Random;
    if (name == "staggered") return InitStrategy::Staggered;
    if (name == "linear") return InitStrategy::Linear;
    throw std::invalid_argument("unknown init strategy '" + name + "' (random, staggered, linear)");
}

std::string to_string(InitStrategy s) {
    switch (s) {
        case InitStrategy::Random: return "random";
        case InitStrategy::Staggered: return "staggered";
        case InitStrategy::Linear: return "linear";
    }
    return "?";
}

MatrixProductState initialize_state(const LocalBasis& basis, int L, int D_init, InitStrategy strategy,
                                    std::uint64_t seed) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (D_init < 1) throw std::invalid_argument("D_init must be >= 1");
    const LocalSpace space(basis.parity);
    const int d = space.d();

    std::vector<Bond> bonds(static_cast<std::size_t>(L + 1));
    bonds.front().dim = {1, 0};
    bonds.back().dim = {1, 1};

    if (strategy == InitStrategy::Random) {
        for (int b = 1; b < L; ++b) {
            const double reach = std::min(std::pow(d, b), std::pow(d, L - b));
            const int D = static_cast<int>(std::min<double>(D_init, reach));
            bonds[static_cast<std::size_t>(b)].dim = {std::max(1, (D + 1) / 2), D / 2};
        }
        MatrixProductState psi(space, bonds);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int j = 0; j < L; ++j)
            for (int pl = 0; pl < 2; ++pl)
                for (int ps = 0; ps < 2; ++ps)
                    for (double& x : psi.site(j).at(pl, ps).reshaped()) x = normal(rng);
        psi.set_center(L - 1);
        psi.canonicalize(0);
        return psi;
    }

    // Product states: the bond carries the parity of everything to its left.
    Eigen::VectorXd even_site = Eigen::VectorXd::Zero(d), odd_site = Eigen::VectorXd::Zero(d);
    if (strategy == InitStrategy::Linear) {
        even_site(0) = 1.0;
        odd_site(0) = 1.0;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis.Y);
        even_site = eig.eigenvectors().col(d - 1);
        odd_site = eig.eigenvectors().col(0);
        // Deterministic orientation: positive overlap with the ground level.
        if (even_site(0) < 0.0) even_site *= -1.0;
        if (odd_site(0) < 0.0) odd_site *= -1.0;
    }
    auto sector_has_weight = [&](const Eigen::VectorXd& v, int p) {
        for (int q : space.levels[static_cast<std::size_t>(p)])
            if (v(q) != 0.0) return true;
        return false;
    };
    // Reachable parities at each bond.
    std::vector<std::array<bool, 2>> reach(static_cast<std::size_t>(L + 1), {false, false});
    reach[0] = {true, false};
    for (int j = 0; j < L; ++j) {
        const Eigen::VectorXd& v = j % 2 == 0 ? even_site : odd_site;
        for (int pl = 0; pl < 2; ++pl)
            for (int ps = 0; ps < 2; ++ps)
                if (reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(pl)] && sector_has_weight(v, ps))
                    reach[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(pl ^ ps)] = true;
    }
    for (int b = 1; b < L; ++b)
        bonds[static_cast<std::size_t>(b)].dim = {reach[static_cast<std::size_t>(b)][0] ? 1 : 0,
                                                  reach[static_cast<std::size_t>(b)][1] ? 1 : 0};
    MatrixProductState psi(space, bonds);
    for (int j = 0; j < L; ++j) {
        const Eigen::VectorXd& v = j % 2 == 0 ? even_site : odd_site;
        for (int pl = 0; pl < 2; ++pl) {
            if (bonds[static_cast<std::size_t>(j)].dim[static_cast<std::size_t>(pl)] == 0) continue;
            for (int ps = 0; ps < 2; ++ps) {
                Eigen::MatrixXd& blk = psi.site(j).at(pl, ps);
                if (blk.cols() == 0) continue;
                for (int si = 0; si < space.dim(ps); ++si)
                    blk(si, 0) = v(space.levels[static_cast<std::size_t>(ps)][static_cast<std::size_t>(si)]);
            }
        }
    }
    psi.set_center(L - 1);
    psi.canonicalize(0);
    psi.compute_schmidt_spectra();
    return psi;
}

}  // namespace zigzag
