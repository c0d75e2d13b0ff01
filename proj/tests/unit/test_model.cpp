#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "zigzag/bands.hpp"
#include "zigzag/model.hpp"

using namespace zigzag;

// Reference values below were computed with 30-digit mpmath arithmetic.

TEST(Zeta, KnownValues) {
    EXPECT_NEAR(riemann_zeta(2.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-12);
    EXPECT_NEAR(riemann_zeta(3.0), 1.2020569031595942854, 1e-12);
    EXPECT_NEAR(riemann_zeta(5.0), 1.0369277551433699263, 1e-12);
    EXPECT_NEAR(riemann_zeta(7.0), 1.0083492773819228268, 1e-12);
}

TEST(Zeta, RejectsPoleAndBelow) {
    EXPECT_THROW(riemann_zeta(1.0), std::domain_error);
    EXPECT_THROW(riemann_zeta(0.5), std::domain_error);
}

TEST(Coefficients, TaylorB) {
    EXPECT_DOUBLE_EQ(taylor_coefficient_b(0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(taylor_coefficient_b(0, 3.7), 1.0);
    EXPECT_DOUBLE_EQ(taylor_coefficient_b(1, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(taylor_coefficient_b(2, 1.0), 0.375);
    EXPECT_DOUBLE_EQ(taylor_coefficient_b(1, 3.0), 1.5);
}

TEST(Coefficients, GoldenValuesAlphaOne) {
    EXPECT_NEAR(onsite_coefficient_M(1, 1.0), 4.2072, 5e-5);
    EXPECT_NEAR(coupling_coefficient_N(1, 1.0), 0.6931, 5e-5);
    EXPECT_NEAR(onsite_coefficient_M(2, 1.0), 12.0543, 5e-5);
    EXPECT_NEAR(onsite_coefficient_M(1, 1.0), 3.5 * riemann_zeta(3.0), 1e-12);
    EXPECT_DOUBLE_EQ(coupling_coefficient_N(1, 1.0), std::numbers::ln2);
    EXPECT_NEAR(onsite_coefficient_M(2, 1.0), 93.0 / 8.0 * riemann_zeta(5.0), 1e-12);
}

TEST(Coefficients, DerivedValues) {
    EXPECT_NEAR(onsite_coefficient_M(3, 1.0), 40.018861946095062190, 1e-10);
    EXPECT_NEAR(coupling_coefficient_N(2, 1.0), 4.7330990561909024988, 1e-10);
    // Upper branch at alpha = 3: (2^3 - 2) / 2^3 * 3 zeta(3).
    EXPECT_NEAR(coupling_coefficient_N(1, 3.0), 2.7046280321090871421, 1e-10);
    EXPECT_NEAR(onsite_coefficient_M(1, 3.0), 12.054285153541675394, 1e-10);
}

TEST(Coefficients, TableMatchesScalarFunctions) {
    const CoefficientTable t = make_coefficient_table(1.0, 3);
    ASSERT_EQ(t.b.size(), 4u);
    ASSERT_EQ(t.M.size(), 3u);
    for (int q = 1; q <= 3; ++q) {
        EXPECT_EQ(t.M_at(q), onsite_coefficient_M(q, 1.0));
        EXPECT_EQ(t.N_at(q), coupling_coefficient_N(q, 1.0));
    }
}

TEST(CoefficientsProperty, PositiveForAllTestedOrders) {
    for (double alpha : {1.0, 1.5, 2.0, 3.0, 6.0})
        for (int q = 1; q <= 5; ++q) {
            EXPECT_GT(taylor_coefficient_b(q, alpha), 0.0);
            EXPECT_GT(onsite_coefficient_M(q, alpha), 0.0);
            EXPECT_GT(coupling_coefficient_N(q, alpha), 0.0);
        }
}

TEST(CoefficientsProperty, OnsiteFieldEqualsScaledSoftModeValue) {
    for (int q = 1; q <= 3; ++q)
        for (double alpha : {1.0, 3.0, 6.0}) {
            const std::vector<double> pi(static_cast<std::size_t>(2 * q - 1), std::numbers::pi);
            const double series = scattering_function(pi, q, alpha, 1e-14);
            const double M = onsite_coefficient_M(q, alpha);
            EXPECT_NEAR(short_range_normalisation(q, alpha) * std::abs(series), M, 1e-10 * M)
                << "q=" << q << " alpha=" << alpha;
        }
}

TEST(ModelParameters, Validation) {
    ModelParameters p;
    EXPECT_NO_THROW(p.validate());
    p.order_t = 4;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.order_t = 3;
    p.g = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.g = 0.1;
    p.alpha = 0.9;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    PhysicalParameters phys;
    phys.mass = -1.0;
    EXPECT_THROW(phys.validate(), std::invalid_argument);
}

TEST(EffectivePlanckConstant, Scaling) {
    PhysicalParameters p;
    EXPECT_DOUBLE_EQ(effective_planck_constant(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(effective_planck_constant(p, 3.0), 1.0);
    p.lattice_constant = 7.0;
    EXPECT_NEAR(effective_planck_constant(p, 2.0), 1.0, 1e-15);
    p.lattice_constant = 4.0;
    EXPECT_NEAR(effective_planck_constant(p, 1.0), 0.5, 1e-15);
}

TEST(Rescaling, IdentityAndClassicalPoint) {
    ModelParameters p;
    p.g = 0.1;
    p.omega2 = 2.5;
    const RescaledParameters same = rescale_to_alpha(p, 1.0);
    EXPECT_DOUBLE_EQ(same.params.g, p.g);
    EXPECT_DOUBLE_EQ(same.params.omega2, p.omega2);
    EXPECT_DOUBLE_EQ(same.u, 1.0);
    EXPECT_DOUBLE_EQ(same.v, 1.0);

    p.omega2 = onsite_coefficient_M(1, 1.0);
    EXPECT_NEAR(rescale_to_alpha(p, 3.0).params.omega2, onsite_coefficient_M(1, 3.0), 1e-12);
    EXPECT_NEAR(rescale_to_alpha(p, 3.0).params.g, 0.15477777301387723415, 1e-12);
}

TEST(RescalingProperty, RoundTrip) {
    for (double a2 : {1.5, 3.0, 6.0})
        for (double w : {-1.0, 0.4, 3.0}) {
            ModelParameters p;
            p.g = 0.07;
            p.omega2 = w;
            const ModelParameters back = rescale_to_alpha(rescale_to_alpha(p, a2).params, 1.0).params;
            EXPECT_NEAR(back.g, p.g, 1e-12 * p.g);
            EXPECT_NEAR(back.omega2, p.omega2, 1e-12 * std::abs(p.omega2));
        }
}

TEST(Phi4, MassAndCoupling) {
    ModelParameters p;
    p.omega2 = onsite_coefficient_M(1, 1.0);
    EXPECT_NEAR(phi4_parameters(p).m_squared, 0.0, 1e-15);
    p.omega2 += std::numbers::ln2;
    EXPECT_NEAR(phi4_parameters(p).m_squared, 1.0, 1e-14);
    p.omega2 = 1.0;
    EXPECT_LT(phi4_parameters(p).m_squared, 0.0);
    p.g = 0.1;
    EXPECT_NEAR(phi4_parameters(p).lambda, 25.065969985983767598, 1e-11);
}
