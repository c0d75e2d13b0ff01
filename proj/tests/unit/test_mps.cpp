#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "zigzag/ed_oracle.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/localbasis.hpp"
#include "zigzag/model.hpp"
#include "zigzag/mps.hpp"
#include "zigzag/observables.hpp"

using namespace zigzag;

namespace {

LocalBasis basis_at(double g, double omega2, int d) {
    ModelParameters p;
    p.g = g;
    p.omega2 = omega2;
    return solve_local_basis(p, d);
}

// (|00> + |11>) / sqrt(2) on two d = 2 sites with levels of parity 0 and 1.
MatrixProductState bell_pair() {
    const LocalSpace space({0, 1});
    MatrixProductState psi(space, {Bond{{1, 0}}, Bond{{1, 1}}, Bond{{1, 1}}});
    psi.site(0).at(0, 0)(0, 0) = 1.0 / std::sqrt(2.0);
    psi.site(0).at(0, 1)(0, 0) = 1.0 / std::sqrt(2.0);
    psi.site(1).at(0, 0)(0, 0) = 1.0;
    psi.site(1).at(1, 1)(0, 0) = 1.0;
    return psi;
}

}  // namespace

TEST(LocalSpace, SectorsFollowLevelParity) {
    const LocalSpace s({0, 1, 0, 1, 0});
    EXPECT_EQ(s.d(), 5);
    EXPECT_EQ(s.dim(0), 3);
    EXPECT_EQ(s.dim(1), 2);
    EXPECT_EQ(s.levels[0], (std::vector<int>{0, 2, 4}));
    EXPECT_EQ(s.sector_index[3], 1);
}

TEST(SectorOperator, DenseRoundTrip) {
    const LocalBasis b = basis_at(0.1, 1.0, 6);
    const LocalSpace space(b.parity);
    EXPECT_LT((SectorOperator::from_dense(b.Y, space, 1).to_dense(space) - b.Y).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((SectorOperator::from_dense(b.W, space, 0).to_dense(space) - b.W).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InitialState, LinearIsProductInGroundLevel) {
    const LocalBasis b = basis_at(0.1, 2.0, 4);
    MatrixProductState psi = initialize_state(b, 6, 8, InitStrategy::Linear);
    for (int bond = 0; bond < 6; ++bond) EXPECT_EQ(psi.bond(bond).total(), 1);
    for (double S : entanglement_entropy_profile(psi)) EXPECT_NEAR(S, 0.0, 1e-14);
    const Measurement m(psi, b.Y);
    for (int j = 0; j < 6; ++j) {
        const auto p = m.populations(j);
        EXPECT_NEAR(p[0], 1.0, 1e-14);
    }
}

TEST(InitialState, StaggeredAlternatesSign) {
    const LocalBasis b = basis_at(0.1, 1.0, 6);
    const Measurement m(initialize_state(b, 7, 8, InitStrategy::Staggered), b.Y);
    const auto y = m.y_profile();
    for (int j = 0; j + 1 < 7; ++j) EXPECT_LT(y[j] * y[j + 1], 0.0);
    EXPECT_GT(y[0], 0.0);
}

TEST(InitialState, RandomIsSeeded) {
    const LocalBasis b = basis_at(0.1, 1.0, 4);
    const MatrixProductState a = initialize_state(b, 5, 6, InitStrategy::Random, 42);
    const MatrixProductState c = initialize_state(b, 5, 6, InitStrategy::Random, 42);
    const MatrixProductState other = initialize_state(b, 5, 6, InitStrategy::Random, 43);
    EXPECT_EQ(a.to_dense(), c.to_dense());
    EXPECT_GT((a.to_dense() - other.to_dense()).norm(), 1e-3);
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
    EXPECT_EQ(parse_init_strategy(to_string(InitStrategy::Random)), InitStrategy::Random);
    EXPECT_THROW(parse_init_strategy("sideways"), std::invalid_argument);
}

TEST(Schmidt, ProductAndBellPair) {
    MatrixProductState bell = bell_pair();
    EXPECT_NEAR(bell.norm(), 1.0, 1e-15);
    const auto spectra = bell.compute_schmidt_spectra();
    ASSERT_EQ(spectra.size(), 1u);
    ASSERT_EQ(spectra[0].size(), 2u);
    EXPECT_NEAR(spectra[0][0], 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(spectra[0][1], 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(entanglement_entropy_profile(bell)[0], std::numbers::ln2, 1e-14);

    const LocalBasis b = basis_at(0.1, 2.0, 3);
    MatrixProductState product = initialize_state(b, 4, 4, InitStrategy::Linear);
    for (const auto& s : product.compute_schmidt_spectra()) {
        ASSERT_EQ(s.size(), 1u);
        EXPECT_NEAR(s[0], 1.0, 1e-14);
    }
    EXPECT_THROW(product.schmidt_spectrum(0), std::out_of_range);
    EXPECT_THROW(product.schmidt_spectrum(4), std::out_of_range);
}

TEST(MpsProperty, CanonicalFormAndSchmidtNormalisation) {
    const LocalBasis b = basis_at(0.1, 1.0, 4);
    for (int center : {0, 2, 5}) {
        MatrixProductState psi = initialize_state(b, 6, 6, InitStrategy::Random, 5);
        const Eigen::VectorXd before = psi.to_dense() / psi.norm();
        psi.canonicalize(center);
        EXPECT_EQ(psi.center(), center);
        EXPECT_LT(psi.canonical_error(), 1e-10);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
        EXPECT_LT((psi.to_dense() - before).norm(), 1e-10);
        for (const auto& s : psi.compute_schmidt_spectra()) {
            double sum = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                EXPECT_GE(s[i], 0.0);
                if (i > 0) EXPECT_LE(s[i], s[i - 1]);
                sum += s[i] * s[i];
            }
            EXPECT_NEAR(sum, 1.0, 1e-10);
        }
        psi.move_center_to(1);
        EXPECT_LT(psi.canonical_error(), 1e-10);
    }
}

TEST(MpsProperty, ParityProjection) {
    const LocalBasis b = basis_at(0.1, 1.0, 4);
    MatrixProductState psi = initialize_state(b, 5, 4, InitStrategy::Staggered);
    const auto w = psi.parity_weights();
    EXPECT_NEAR(w[0] + w[1], 1.0, 1e-12);
    EXPECT_GT(w[1], 1e-3);  // a broken-symmetry product state mixes both sectors
    MatrixProductState even = psi;
    even.project_parity(0);
    EXPECT_NEAR(even.parity_weights()[0], 1.0, 1e-12);
    // Global parity R^L acts as +1 on the even projection.
    MatrixProductState flipped = even;
    flipped.apply_global_parity();
    EXPECT_LT((flipped.to_dense() - even.to_dense()).norm(), 1e-12);
}

TEST(Lattice, ObcWeights) {
    EXPECT_EQ(obc_weight(0, 1), 0.0);
    EXPECT_EQ(obc_weight(0, 2), 0.5);
    EXPECT_EQ(obc_weight(1, 2), 0.5);
    EXPECT_EQ(obc_weight(0, 5), 0.5);
    EXPECT_EQ(obc_weight(2, 5), 1.0);
    EXPECT_EQ(obc_weight(4, 5), 0.5);
}

TEST(Lattice, LocalTermsCarryHalfWAtEdges) {
    const LocalBasis b = basis_at(0.1, 1.0, 5);
    const double N1 = coupling_coefficient_N(1, 1.0);
    const LatticeHamiltonian H2 = build_lattice_hamiltonian(b, N1, 2);
    const Eigen::MatrixXd edge = b.A() + 0.5 * N1 * b.W;
    for (int j = 0; j < 2; ++j) EXPECT_LT((H2.local[j] - edge).cwiseAbs().maxCoeff(), 1e-15);
    const LatticeHamiltonian H6 = build_lattice_hamiltonian(b, N1, 6);
    EXPECT_LT((H6.local[3] - (b.A() + N1 * b.W)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(build_lattice_hamiltonian(b, N1, 1), std::invalid_argument);
}

TEST(LatticeProperty, HermitianAndBulkTranslationInvariant) {
    const LocalBasis b = basis_at(0.08, 0.7, 8);
    const LatticeHamiltonian H = build_lattice_hamiltonian(b, coupling_coefficient_N(1, 1.0), 7);
    EXPECT_LT((H.Y - H.Y.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (const auto& h : H.local) EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 2; j < 6; ++j) EXPECT_EQ(H.local[j], H.local[1]);
}

TEST(LatticeProperty, MpoExpansionEqualsOracleOperator) {
    const LocalBasis b = basis_at(0.1, 1.0, 3);
    const double N1 = coupling_coefficient_N(1, 1.0);
    const int L = 4;
    const Eigen::MatrixXd dense = mpo_dense_expansion(build_lattice_hamiltonian(b, N1, L));
    const long n = 81;
    ASSERT_EQ(dense.rows(), n);
    Eigen::MatrixXd reference(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n), out(n);
    for (long i = 0; i < n; ++i) {
        e.setZero();
        e(i) = 1.0;
        apply_lattice_hamiltonian(b, N1, L, e, out);
        reference.col(i) = out;
    }
    EXPECT_LT((dense - reference).cwiseAbs().maxCoeff(), 1e-12);
}
