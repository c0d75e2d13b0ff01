#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "zigzag/dmrg.hpp"
#include "zigzag/ed_oracle.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/localbasis.hpp"
#include "zigzag/model.hpp"
#include "zigzag/observables.hpp"

using namespace zigzag;

namespace {

const double N1 = std::log(2.0);

LocalBasis basis_at(double g, double omega2, int d) {
    ModelParameters p;
    p.g = g;
    p.omega2 = omega2;
    return solve_local_basis(p, d);
}

struct Solved {
    LocalBasis basis;
    DmrgResult result;
};

// Converged states shared by several tests.
const Solved& solved(double g, double omega2, int d, int L, int D) {
    static std::map<std::tuple<double, double, int, int, int>, Solved> cache;
    const auto key = std::make_tuple(g, omega2, d, L, D);
    auto it = cache.find(key);
    if (it == cache.end()) {
        LocalBasis b = basis_at(g, omega2, d);
        DmrgControls c;
        c.D_max = D;
        c.discard_tol = 1e-24;
        c.lanczos_tol = 1e-13;
        c.energy_tol = 1e-13;
        DmrgResult r = dmrg_ground_state(build_lattice_hamiltonian(b, N1, L),
                                         initialize_state(b, L, 4, InitStrategy::Staggered), c);
        it = cache.emplace(key, Solved{std::move(b), std::move(r)}).first;
    }
    return it->second;
}

}  // namespace

TEST(Correlator, StaggeredProductState) {
    const LocalBasis b = basis_at(0.1, 1.0, 6);
    const int L = 6;
    const Measurement m(initialize_state(b, L, 4, InitStrategy::Staggered), b.Y);
    const double mag = std::abs(m.y(0));
    EXPECT_GT(mag, 0.1);
    for (int j = 0; j < L; ++j)
        for (int k = 0; k < L; ++k)
            if (j != k) EXPECT_NEAR(m.correlator(j, k), ((j - k) % 2 ? -1.0 : 1.0) * mag * mag, 1e-12);
    // Sites are Y eigenvectors, so the order parameter equals |m|.
    EXPECT_NEAR(structure_factor_order_parameter(m), mag, 1e-12);
    EXPECT_NEAR(structure_factor_by_pairs(m), mag, 1e-12);
    EXPECT_THROW(m.correlator(0, L), std::out_of_range);
}

TEST(Correlator, EvenCatHasOrderWithoutMagnetisation) {
    const LocalBasis b = basis_at(0.1, 1.0, 6);
    const int L = 6;
    MatrixProductState cat = initialize_state(b, L, 4, InitStrategy::Staggered);
    const double mag = std::abs(Measurement(cat, b.Y).y(0));
    cat.project_parity(0);
    const Measurement m(cat, b.Y);
    EXPECT_NEAR(structure_factor_order_parameter(m), mag, 1e-12);
    for (double y : m.y_profile()) EXPECT_NEAR(y, 0.0, 1e-12);
    EXPECT_NEAR(m.staggered_moments().first, 0.0, 1e-12);
}

TEST(Correlator, AgreesWithOracle) {
    const Solved& s = solved(0.1, 1.0, 3, 6, 27);
    const DenseSpectrum ed = exact_ground_state(s.basis, N1, 6);
    const Measurement m(s.result.state, s.basis.Y);
    double xi2 = 0.0;
    for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) {
            const double ref = j == k ? exact_expectation(ed, {j}, {s.basis.Y * s.basis.Y})
                                      : exact_expectation(ed, {j, k}, {s.basis.Y, s.basis.Y});
            EXPECT_NEAR(m.correlator(j, k), ref, 1e-8 * std::abs(ref));
            xi2 += ((j - k) % 2 ? -1.0 : 1.0) * ref;
        }
    const double xi = std::sqrt(xi2) / 6.0;
    EXPECT_NEAR(structure_factor_order_parameter(m), xi, 1e-8 * xi);
    EXPECT_NEAR(structure_factor_by_pairs(m), xi, 1e-8 * xi);
    const auto p = m.populations(2);
    for (int q = 0; q < 3; ++q) {
        Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(3, 3);
        proj(q, q) = 1.0;
        EXPECT_NEAR(p[q], exact_expectation(ed, {2}, {proj}), 1e-9);
    }
}

TEST(Correlator, RowMatchesPairwise) {
    const Solved& s = solved(0.1, 1.0, 4, 12, 16);
    const Measurement m(s.result.state, s.basis.Y);
    const auto row = m.correlator_row(3, 8);
    for (int t = 0; t < 8; ++t) EXPECT_NEAR(row[t], m.correlator(3, 3 + t), 1e-13);
}

TEST(BulkProfile, ProductStateHasNoConnectedPart) {
    const LocalBasis b = basis_at(0.1, 1.0, 6);
    const int L = 15;
    const Measurement m(initialize_state(b, L, 4, InitStrategy::Staggered), b.Y);
    const auto G = bulk_correlation_profile(m, bulk_max_distance(L));
    ASSERT_EQ(static_cast<int>(G.size()), bulk_max_distance(L) + 1);
    EXPECT_GE(G[0].second, -1e-14);
    for (std::size_t i = 1; i < G.size(); ++i) EXPECT_NEAR(G[i].second, 0.0, 1e-13);
    EXPECT_THROW(bulk_correlation_profile(m, L / 3 + 1), std::out_of_range);
}

TEST(BulkProfile, VarianceAtZeroDistance) {
    const Solved& s = solved(0.1, 1.0, 4, 12, 16);
    const Measurement m(s.result.state, s.basis.Y);
    EXPECT_GT(bulk_correlation_profile(m, 2)[0].second, 0.0);
}

TEST(Entropy, ProductStateAndRange) {
    const LocalBasis b = basis_at(0.1, 1.0, 4);
    const auto S = entanglement_entropy_profile(initialize_state(b, 7, 4, InitStrategy::Linear));
    ASSERT_EQ(S.size(), 6u);
    for (double x : S) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Populations, ProductStateIndicator) {
    const LocalBasis b = basis_at(0.1, 2.0, 5);
    const auto p = Measurement(initialize_state(b, 4, 2, InitStrategy::Linear), b.Y).populations(1);
    EXPECT_NEAR(p[0], 1.0, 1e-14);
    for (int q = 1; q < 5; ++q) EXPECT_NEAR(p[q], 0.0, 1e-14);
}

TEST(Populations, DecayRateDefinition) {
    std::vector<double> p = {0.45, 0.45, 0.05, 0.03, 0.015, 0.005};
    double expected = std::numeric_limits<double>::infinity();
    for (int q = 3; q <= 6; ++q) expected = std::min(expected, -std::log(p[q - 1]) / q);
    EXPECT_DOUBLE_EQ(population_decay_rate(p), expected);
    EXPECT_TRUE(std::isnan(population_decay_rate({0.5, 0.5, 0.0})));
}

TEST(Measure, ObservableSetDefaults) {
    const Solved& s = solved(0.1, 1.0, 4, 12, 16);
    const ObservableSet o = measure_observables(s.result.state, s.basis.Y);
    EXPECT_EQ(o.pops_site, 6);
    EXPECT_EQ(o.entropy_profile.size(), 11u);
    EXPECT_EQ(o.y_profile.size(), 12u);
    EXPECT_EQ(static_cast<int>(o.correlation_profile.size()), bulk_max_distance(12) + 1);
    EXPECT_GT(o.xi_L, 0.0);
}

TEST(ObservablesProperty, RangesAndNormalisation) {
    for (double w : {0.5, 1.0, 5.0}) {
        const Solved& s = solved(0.1, w, 5, 12, 20);
        const ObservableSet o = measure_observables(s.result.state, s.basis.Y);
        EXPECT_GE(o.xi_L, 0.0);
        for (double S : o.entropy_profile) EXPECT_GE(S, 0.0);
        double sum = 0.0;
        for (double p : o.populations) {
            EXPECT_GE(p, -1e-15);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
        EXPECT_GT(o.population_decay, 0.0);
        EXPECT_TRUE(std::isfinite(o.population_decay));
    }
}

TEST(ObservablesProperty, OrderParameterInvariantUnderGlobalParity) {
    const LocalBasis b = basis_at(0.1, 1.0, 5);
    MatrixProductState psi = initialize_state(b, 9, 6, InitStrategy::Random, 17);
    const double before = structure_factor_order_parameter(Measurement(psi, b.Y));
    psi.apply_global_parity();
    EXPECT_NEAR(structure_factor_order_parameter(Measurement(psi, b.Y)), before, 1e-13);
}

TEST(ObservablesProperty, EntropyProfileMirrorSymmetric) {
    const Solved& s = solved(0.1, 1.0, 5, 12, 20);
    const auto S = entanglement_entropy_profile(s.result.state);
    const std::size_t n = S.size();
    for (std::size_t l = 0; l < n; ++l) EXPECT_NEAR(S[l], S[n - 1 - l], 1e-6);
}

TEST(ObservablesProperty, CorrelatorSymmetric) {
    const Solved& s = solved(0.1, 1.0, 4, 12, 16);
    const Measurement m(s.result.state, s.basis.Y);
    for (int j = 0; j < 12; ++j)
        for (int k = 0; k < 12; ++k) EXPECT_EQ(m.correlator(j, k), m.correlator(k, j));
}
