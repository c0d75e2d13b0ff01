#include "zigzag/dmrg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "contract.hpp"
#include "zigzag/checkpoint.hpp"
#include "zigzag/lanczos.hpp"

namespace zigzag {

using detail::Blocks;

namespace {

using Map = Eigen::Map<Eigen::MatrixXd>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;

struct LeftEnv {
    Blocks L0;  // completed terms, charge 0
    Blocks L1;  // open Y bond, charge 1
};

struct RightEnv {
    Blocks R1;  // open Y bond, charge 1
    Blocks R2;  // completed terms, charge 0
};

LeftEnv left_boundary_env(const Bond& b) { return {detail::zero_blocks(b, 0), detail::zero_blocks(b, 1)}; }
RightEnv right_boundary_env(const Bond& b) { return {detail::zero_blocks(b, 1), detail::zero_blocks(b, 0)}; }

LeftEnv grow_left(const LeftEnv& E, const SiteTensor& A, const Bond& left, const Bond& right,
                  const LatticeHamiltonian& H, int j) {
    LeftEnv out{detail::zero_blocks(right, 0), detail::zero_blocks(right, 1)};
    detail::left_contract(A, left, H.space, &E.L0, 0, nullptr, 1.0, out.L0);
    detail::left_contract(A, left, H.space, &E.L1, 1, &H.Y_blocks, 1.0, out.L0);
    detail::left_contract(A, left, H.space, nullptr, 0, &H.local_blocks[static_cast<std::size_t>(j)], 1.0, out.L0);
    detail::left_contract(A, left, H.space, nullptr, 0, &H.Y_blocks, H.N1, out.L1);
    return out;
}

RightEnv grow_right(const RightEnv& E, const SiteTensor& B, const Bond& left, const LatticeHamiltonian& H, int j) {
    RightEnv out{detail::zero_blocks(left, 1), detail::zero_blocks(left, 0)};
    detail::right_contract(B, left, H.space, nullptr, 0, &H.Y_blocks, 1.0, out.R1);
    detail::right_contract(B, left, H.space, nullptr, 0, &H.local_blocks[static_cast<std::size_t>(j)], 1.0, out.R2);
    detail::right_contract(B, left, H.space, &E.R1, 1, &H.Y_blocks, H.N1, out.R2);
    detail::right_contract(B, left, H.space, &E.R2, 0, nullptr, 1.0, out.R2);
    return out;
}

// Flat storage of a two-site tensor: blocks (pl, s1, s2) with layout
// l fastest, then s1, s2, r.
struct TwoSiteLayout {
    Bond left, right;
    std::array<int, 2> d{0, 0};
    int offset[2][2][2]{};
    int size = 0;

    TwoSiteLayout(const Bond& l, const Bond& r, const LocalSpace& space) : left(l), right(r) {
        d = {space.dim(0), space.dim(1)};
        for (int pl = 0; pl < 2; ++pl)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) {
                    offset[pl][s1][s2] = size;
                    size += Dl(pl) * d[static_cast<std::size_t>(s1)] * d[static_cast<std::size_t>(s2)] *
                            Dr(pl ^ s1 ^ s2);
                }
    }
    int Dl(int p) const { return left.dim[static_cast<std::size_t>(p)]; }
    int Dr(int p) const { return right.dim[static_cast<std::size_t>(p)]; }
    int ds(int p) const { return d[static_cast<std::size_t>(p)]; }
    int block_size(int pl, int s1, int s2) const { return Dl(pl) * ds(s1) * ds(s2) * Dr(pl ^ s1 ^ s2); }
};

Eigen::VectorXd form_theta(const SiteTensor& A, const SiteTensor& B, const Bond& middle, const TwoSiteLayout& lay) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(lay.size);
    for (int pl = 0; pl < 2; ++pl)
        for (int s1 = 0; s1 < 2; ++s1) {
            const int pm = pl ^ s1;
            const int Dm = middle.dim[static_cast<std::size_t>(pm)];
            const Eigen::MatrixXd& a = A.at(pl, s1);
            for (int s2 = 0; s2 < 2; ++s2) {
                if (lay.block_size(pl, s1, s2) == 0 || Dm == 0) continue;
                const Eigen::MatrixXd& b = B.at(pm, s2);
                const int cols = lay.ds(s2) * lay.Dr(pm ^ s2);
                Map(theta.data() + lay.offset[pl][s1][s2], lay.Dl(pl) * lay.ds(s1), cols).noalias() =
                    a * CMap(b.data(), Dm, cols);
            }
        }
    return theta;
}

class EffectiveHamiltonian {
public:
    EffectiveHamiltonian(const LatticeHamiltonian& H, int j, const LeftEnv& Le, const RightEnv& Re,
                         const TwoSiteLayout& lay)
        : H_(H), j_(j), Le_(Le), Re_(Re), lay_(lay) {}

    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
        out.setZero(lay_.size);
        const SectorOperator& Y = H_.Y_blocks;
        const SectorOperator& h1 = H_.local_blocks[static_cast<std::size_t>(j_)];
        const SectorOperator& h2 = H_.local_blocks[static_cast<std::size_t>(j_ + 1)];
        const double N1 = H_.N1;
        for (int pl = 0; pl < 2; ++pl)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) {
                    if (lay_.block_size(pl, s1, s2) == 0) continue;
                    const int pr = pl ^ s1 ^ s2;
                    const int Dl = lay_.Dl(pl), Dr = lay_.Dr(pr);
                    const int d1 = lay_.ds(s1), d2 = lay_.ds(s2);
                    const double* X = in.data() + lay_.offset[pl][s1][s2];
                    double* Z = out.data() + lay_.offset[pl][s1][s2];
                    const int rest = d1 * d2 * Dr;

                    // Completed left block.
                    Map(Z, Dl, rest).noalias() += Le_.L0[static_cast<std::size_t>(pl)] * CMap(X, Dl, rest);
                    // Open bond from the left closed by Y on the first site.
                    {
                        const int Dlb = lay_.Dl(pl ^ 1);
                        if (Dlb > 0 && lay_.block_size(pl ^ 1, s1 ^ 1, s2) > 0) {
                            tmp_.resize(static_cast<Eigen::Index>(Dlb) * rest);
                            Map(tmp_.data(), Dlb, rest).noalias() =
                                Le_.L1[static_cast<std::size_t>(pl)] * CMap(X, Dl, rest);
                            apply_middle(tmp_.data(), Dlb, d1, d2 * Dr, Y.block[static_cast<std::size_t>(s1)],
                                         out.data() + lay_.offset[pl ^ 1][s1 ^ 1][s2], true);
                        }
                    }
                    // On-site terms.
                    apply_middle(X, Dl, d1, d2 * Dr, h1.block[static_cast<std::size_t>(s1)], Z, true);
                    apply_middle(X, Dl * d1, d2, Dr, h2.block[static_cast<std::size_t>(s2)], Z, true);
                    // Bond between the two sites.
                    if (lay_.block_size(pl, s1 ^ 1, s2 ^ 1) > 0) {
                        const int d1b = lay_.ds(s1 ^ 1);
                        tmp_.resize(static_cast<Eigen::Index>(Dl) * d1b * d2 * Dr);
                        apply_middle(X, Dl, d1, d2 * Dr, Y.block[static_cast<std::size_t>(s1)], tmp_.data(), false);
                        apply_middle(tmp_.data(), Dl * d1b, d2, Dr, Y.block[static_cast<std::size_t>(s2)],
                                     out.data() + lay_.offset[pl][s1 ^ 1][s2 ^ 1], true, N1);
                    }
                    // Open bond to the right opened by Y on the second site.
                    if (lay_.block_size(pl, s1, s2 ^ 1) > 0) {
                        const int d2b = lay_.ds(s2 ^ 1);
                        const int Drb = lay_.Dr(pr ^ 1);
                        tmp_.resize(static_cast<Eigen::Index>(Dl) * d1 * d2b * Dr);
                        apply_middle(X, Dl * d1, d2, Dr, Y.block[static_cast<std::size_t>(s2)], tmp_.data(), false);
                        Map(out.data() + lay_.offset[pl][s1][s2 ^ 1], Dl * d1 * d2b, Drb).noalias() +=
                            N1 * CMap(tmp_.data(), Dl * d1 * d2b, Dr) * Re_.R1[static_cast<std::size_t>(pr)].transpose();
                    }
                    // Completed right block.
                    Map(Z, Dl * d1 * d2, Dr).noalias() +=
                        CMap(X, Dl * d1 * d2, Dr) * Re_.R2[static_cast<std::size_t>(pr)].transpose();
                }
    }

    // Only charge-0 terms touch the diagonal.
    Eigen::VectorXd diagonal() const {
        Eigen::VectorXd out(lay_.size);
        const SectorOperator& h1 = H_.local_blocks[static_cast<std::size_t>(j_)];
        const SectorOperator& h2 = H_.local_blocks[static_cast<std::size_t>(j_ + 1)];
        for (int pl = 0; pl < 2; ++pl)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) {
                    const int pr = pl ^ s1 ^ s2;
                    const int Dl = lay_.Dl(pl), Dr = lay_.Dr(pr), d1 = lay_.ds(s1), d2 = lay_.ds(s2);
                    const Eigen::VectorXd l0 = Le_.L0[static_cast<std::size_t>(pl)].diagonal();
                    const Eigen::VectorXd a = h1.block[static_cast<std::size_t>(s1)].diagonal();
                    const Eigen::VectorXd b = h2.block[static_cast<std::size_t>(s2)].diagonal();
                    const Eigen::VectorXd r2 = Re_.R2[static_cast<std::size_t>(pr)].diagonal();
                    double* z = out.data() + lay_.offset[pl][s1][s2];
                    for (int r = 0; r < Dr; ++r)
                        for (int t = 0; t < d2; ++t)
                            for (int s = 0; s < d1; ++s)
                                for (int l = 0; l < Dl; ++l) *z++ = l0(l) + a(s) + b(t) + r2(r);
                }
        return out;
    }

private:
    const LatticeHamiltonian& H_;
    int j_;
    const LeftEnv& Le_;
    const RightEnv& Re_;
    const TwoSiteLayout& lay_;
    mutable Eigen::VectorXd tmp_;
};

struct Split {
    SiteTensor left, right;
    Bond middle;
    double discarded = 0.0;
    std::vector<double> schmidt;
};

// Truncated decomposition of theta across the middle bond. With
// centre_right the left tensor is left-orthonormal and the right one holds
// the (normalised) centre; otherwise the reverse.
Split split_theta(const Eigen::VectorXd& theta, const TwoSiteLayout& lay, int D_max, double discard_tol,
                  bool centre_right) {
    struct Sector {
        Eigen::MatrixXd M;
        Eigen::VectorXd w;
        Eigen::MatrixXd vecs;
        int r0 = 0, r1 = 0, c0 = 0, c1 = 0;
    };
    std::array<Sector, 2> sec;
    std::vector<std::pair<double, int>> weights;  // (weight, sector)
    double total = 0.0;
    for (int pm = 0; pm < 2; ++pm) {
        Sector& S = sec[static_cast<std::size_t>(pm)];
        S.r0 = lay.Dl(pm) * lay.ds(0);
        S.r1 = lay.Dl(pm ^ 1) * lay.ds(1);
        S.c0 = lay.ds(0) * lay.Dr(pm);
        S.c1 = lay.ds(1) * lay.Dr(pm ^ 1);
        S.M = Eigen::MatrixXd::Zero(S.r0 + S.r1, S.c0 + S.c1);
        for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2) {
                const int pl = pm ^ s1;
                const int rows = s1 == 0 ? S.r0 : S.r1, cols = s2 == 0 ? S.c0 : S.c1;
                if (rows == 0 || cols == 0) continue;
                S.M.block(s1 == 0 ? 0 : S.r0, s2 == 0 ? 0 : S.c0, rows, cols) =
                    CMap(theta.data() + lay.offset[pl][s1][s2], rows, cols);
            }
        if (S.M.size() == 0) continue;
        const Eigen::MatrixXd rho = centre_right ? Eigen::MatrixXd(S.M * S.M.transpose())
                                                 : Eigen::MatrixXd(S.M.transpose() * S.M);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
        // Descending order.
        S.w = eig.eigenvalues().reverse().cwiseMax(0.0);
        S.vecs = eig.eigenvectors().rowwise().reverse();
        for (Eigen::Index i = 0; i < S.w.size(); ++i) {
            weights.emplace_back(S.w(i), pm);
            total += S.w(i);
        }
    }
    if (!(total > 0.0)) throw std::runtime_error("two-site tensor vanished during the sweep");
    std::stable_sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    // Smallest kept set whose discarded weight is within tolerance, capped at D_max.
    std::size_t keep = weights.size();
    double tail = 0.0;
    while (keep > 1) {
        const double next_tail = tail + weights[keep - 1].first;
        if (next_tail > discard_tol * total) break;
        tail = next_tail;
        --keep;
    }
    keep = std::min<std::size_t>(keep, static_cast<std::size_t>(std::max(D_max, 1)));
    Split out;
    std::array<int, 2> kept{0, 0};
    double kept_weight = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
        ++kept[static_cast<std::size_t>(weights[i].second)];
        kept_weight += weights[i].first;
        out.schmidt.push_back(std::sqrt(weights[i].first / total));
    }
    out.discarded = std::max(0.0, 1.0 - kept_weight / total);
    out.middle.dim = kept;

    // Centre normalisation.
    double centre_norm2 = 0.0;
    std::array<Eigen::MatrixXd, 2> centre;
    for (int pm = 0; pm < 2; ++pm) {
        const Sector& S = sec[static_cast<std::size_t>(pm)];
        const int k = kept[static_cast<std::size_t>(pm)];
        if (S.M.size() == 0) continue;
        const auto V = S.vecs.leftCols(k);
        centre[static_cast<std::size_t>(pm)] = centre_right ? Eigen::MatrixXd(V.transpose() * S.M)
                                                            : Eigen::MatrixXd(S.M * V);
        centre_norm2 += centre[static_cast<std::size_t>(pm)].squaredNorm();
    }
    const double scale = 1.0 / std::sqrt(centre_norm2);

    for (int pm = 0; pm < 2; ++pm) {
        const Sector& S = sec[static_cast<std::size_t>(pm)];
        const int k = kept[static_cast<std::size_t>(pm)];
        Eigen::MatrixXd U, Vt;  // (r0 + r1) x k and k x (c0 + c1)
        if (S.M.size() == 0) {
            U = Eigen::MatrixXd::Zero(S.r0 + S.r1, k);
            Vt = Eigen::MatrixXd::Zero(k, S.c0 + S.c1);
        } else if (centre_right) {
            U = S.vecs.leftCols(k);
            Vt = scale * centre[static_cast<std::size_t>(pm)];
        } else {
            U = scale * centre[static_cast<std::size_t>(pm)];
            Vt = S.vecs.leftCols(k).transpose();
        }
        // Left tensor blocks (pl, s1) with pl ^ s1 = pm.
        out.left.at(pm, 0) = U.topRows(S.r0);
        out.left.at(pm ^ 1, 1) = U.bottomRows(S.r1);
        // Right tensor blocks (pm, s2): k x (d2 Dr) reinterpreted as (k d2) x Dr.
        for (int s2 = 0; s2 < 2; ++s2) {
            const int Dr = lay.Dr(pm ^ s2);
            const int cols = s2 == 0 ? S.c0 : S.c1;
            Eigen::MatrixXd blk(k * lay.ds(s2), Dr);
            if (blk.size() > 0) Map(blk.data(), k, cols) = Vt.middleCols(s2 == 0 ? 0 : S.c0, cols);
            out.right.at(pm, s2) = std::move(blk);
        }
    }
    return out;
}

}  // namespace

double energy_expectation(const LatticeHamiltonian& H, const MatrixProductState& psi) {
    if (psi.length() != H.L) throw std::invalid_argument("state and Hamiltonian lengths differ");
    // Full left environments including the identity channel.
    Blocks L0 = detail::zero_blocks(psi.bond(0), 0);
    Blocks L1 = detail::zero_blocks(psi.bond(0), 1);
    Blocks L2 = detail::identity_blocks(psi.bond(0));
    for (int j = 0; j < H.L; ++j) {
        const Bond& left = psi.bond(j);
        const Bond& right = psi.bond(j + 1);
        const SiteTensor& A = psi.site(j);
        Blocks n0 = detail::zero_blocks(right, 0), n1 = detail::zero_blocks(right, 1), n2 = detail::zero_blocks(right, 0);
        detail::left_contract(A, left, H.space, &L0, 0, nullptr, 1.0, n0);
        detail::left_contract(A, left, H.space, &L1, 1, &H.Y_blocks, 1.0, n0);
        detail::left_contract(A, left, H.space, &L2, 0, &H.local_blocks[static_cast<std::size_t>(j)], 1.0, n0);
        detail::left_contract(A, left, H.space, &L2, 0, &H.Y_blocks, H.N1, n1);
        detail::left_contract(A, left, H.space, &L2, 0, nullptr, 1.0, n2);
        L0 = std::move(n0);
        L1 = std::move(n1);
        L2 = std::move(n2);
    }
    const Blocks I = detail::identity_blocks(psi.bond(H.L));
    return detail::join(L0, I) / detail::join(L2, I);
}

double energy_scale(const LatticeHamiltonian& H) {
    const int j = H.L / 2;
    const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H.local[static_cast<std::size_t>(j)],
                                                                              Eigen::EigenvaluesOnly)
                                  .eigenvalues();
    const Eigen::Index top = std::min<Eigen::Index>(2, e.size() - 1);
    return std::max(H.L * (e(top) - e(0)), 1e-300);
}

DmrgResult dmrg_ground_state(const LatticeHamiltonian& H, MatrixProductState psi, const DmrgControls& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const int L = H.L;
    if (psi.length() != L) throw std::invalid_argument("initial state length differs from the Hamiltonian");
    if (psi.d() != H.d()) throw std::invalid_argument("initial state local dimension differs from the Hamiltonian");
    if (c.D_max < 2) throw std::invalid_argument("D_max must be >= 2");
    if (!(c.energy_tol > 0.0)) throw std::invalid_argument("energy_tol must be > 0");

    if (c.target_parity > 1) throw std::invalid_argument("target_parity must be 0, 1 or negative");
    if (c.target_parity >= 0 && psi.bond(L).dim[static_cast<std::size_t>(c.target_parity ^ 1)] > 0)
        psi.project_parity(c.target_parity);
    psi.canonicalize(0);
    const double energy_floor = energy_scale(H);

    std::vector<LeftEnv> Lenv(static_cast<std::size_t>(L + 1));
    std::vector<RightEnv> Renv(static_cast<std::size_t>(L + 1));
    Lenv[0] = left_boundary_env(psi.bond(0));
    Renv[static_cast<std::size_t>(L)] = right_boundary_env(psi.bond(L));
    for (int j = L - 1; j >= 2; --j)
        Renv[static_cast<std::size_t>(j)] = grow_right(Renv[static_cast<std::size_t>(j + 1)], psi.site(j), psi.bond(j), H, j);

    DmrgResult result;
    ConvergenceReport& rep = result.report;
    double previous = std::numeric_limits<double>::quiet_NaN();
    double lanczos_tol = std::max(c.lanczos_tol, 1e-6);
    double energy = 0.0;

    auto optimise = [&](int j, bool moving_right, int D) {
        const Bond& left = psi.bond(j);
        const Bond& middle = psi.bond(j + 1);
        const Bond& right = psi.bond(j + 2);
        const TwoSiteLayout lay(left, right, H.space);
        Eigen::VectorXd theta = form_theta(psi.site(j), psi.site(j + 1), middle, lay);
        const EffectiveHamiltonian Heff(H, j, Lenv[static_cast<std::size_t>(j)], Renv[static_cast<std::size_t>(j + 2)], lay);
        LanczosOptions lo;
        lo.tol = lanczos_tol;
        lo.krylov_dim = c.krylov_dim;
        const LanczosResult res = davidson_lowest([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { Heff.apply(x, y); },
                                                  Heff.diagonal(), theta, lo);
        if (!res.vector.allFinite()) throw std::runtime_error("local eigensolver breakdown");
        energy = res.eigenvalue;
        Split sp = split_theta(res.vector, lay, D, c.discard_tol, moving_right);
        rep.max_discarded_weight = std::max(rep.max_discarded_weight, sp.discarded);
        psi.site(j) = std::move(sp.left);
        psi.site(j + 1) = std::move(sp.right);
        psi.set_bond(j + 1, sp.middle);
        psi.set_schmidt(j + 1, std::move(sp.schmidt));
        if (moving_right) {
            psi.set_center(j + 1);
            Lenv[static_cast<std::size_t>(j + 1)] =
                grow_left(Lenv[static_cast<std::size_t>(j)], psi.site(j), psi.bond(j), psi.bond(j + 1), H, j);
        } else {
            psi.set_center(j);
            Renv[static_cast<std::size_t>(j + 1)] =
                grow_right(Renv[static_cast<std::size_t>(j + 2)], psi.site(j + 1), psi.bond(j + 1), H, j + 1);
        }
    };

    for (int sweep = 0; sweep < c.sweep_limit; ++sweep) {
        const int D = sweep < static_cast<int>(c.D_schedule.size())
                          ? std::min(c.D_schedule[static_cast<std::size_t>(sweep)], c.D_max)
                          : c.D_max;
        rep.max_discarded_weight = 0.0;
        for (int j = 0; j + 1 < L; ++j) optimise(j, true, D);
        for (int j = L - 2; j >= 0; --j) optimise(j, false, D);

        rep.sweeps_done = sweep + 1;
        rep.sweep_energies.push_back(energy);
        rep.final_energy = energy;
        const double delta = std::isnan(previous) ? std::numeric_limits<double>::infinity()
                                                  : std::abs(energy - previous) / std::max(std::abs(energy), energy_floor);
        rep.energy_delta_last_sweep = delta;
        previous = energy;
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const bool ramp_done = sweep + 1 >= static_cast<int>(c.D_schedule.size());
        // The last sweep must also have run the local solves at full accuracy.
        const bool tight = lanczos_tol <= c.lanczos_tol * (1.0 + 1e-9);
        rep.converged = ramp_done && tight && rep.sweeps_done >= c.min_sweeps && delta < c.energy_tol;

        if (!c.checkpoint_path.empty()) write_checkpoint(c.checkpoint_path, psi, rep, c.checkpoint_metadata);
        if (c.on_sweep) c.on_sweep(psi, rep);
        if (rep.converged) break;

        // Tighten the local solves as the sweep energy settles.
        if (std::isfinite(delta)) lanczos_tol = std::clamp(1e-2 * delta, c.lanczos_tol, lanczos_tol);
        if (delta < c.energy_tol) lanczos_tol = c.lanczos_tol;
    }
    result.state = std::move(psi);
    return result;
}

}  // namespace zigzag
