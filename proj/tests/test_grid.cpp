#include <gtest/gtest.h>

#include "support.hpp"

namespace qfey {
namespace {

using testing::random_vector;

TEST(MakeGrid, DefaultBoxSpacing) {
    const Grid g = make_grid(-20.0, 20.0, 256);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.15625);
    EXPECT_EQ(g.size(), 256);
    EXPECT_DOUBLE_EQ(g.point(128), 0.0);
}

TEST(MakeGrid, UnitIntervalSpacing) {
    const Grid g = make_grid(0.0, 1.0, 8);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.125);
    EXPECT_DOUBLE_EQ(g.point(7), 0.875);
}

TEST(MakeGrid, RejectsBadInput) {
    EXPECT_THROW(make_grid(0.0, 1.0, 7), InvalidArgument);
    EXPECT_THROW(make_grid(0.0, 1.0, 6), InvalidArgument);
    EXPECT_THROW(make_grid(1.0, 1.0, 8), InvalidArgument);
    EXPECT_THROW(make_grid(2.0, 1.0, 8), InvalidArgument);
    EXPECT_THROW(make_grid(0.0, INFINITY, 8), InvalidArgument);
}

TEST(Sample, ZeroFunction) {
    const Grid g = make_grid(-3.0, 3.0, 16);
    const WaveFunction f = sample([](double) { return Complex{}; }, g);
    EXPECT_EQ(f.values(), CVector::Zero(16));
}

TEST(Sample, ConstantOne) {
    const WaveFunction f = sample([](double) { return Complex{1.0, 0.0}; }, make_grid(0.0, 1.0, 8));
    EXPECT_EQ(f.values(), CVector::Ones(8));
}

TEST(Sample, GaussianPeakAtOrigin) {
    const WaveFunction f = sample([](double x) { return Complex{std::exp(-x * x), 0.0}; }, make_grid(-20, 20, 256));
    EXPECT_EQ(f[128], Complex(1.0, 0.0));
}

TEST(Sample, RejectsNonFinite) {
    EXPECT_THROW(sample([](double x) { return Complex{1.0 / (x - 0.5), 0.0}; }, make_grid(0.0, 1.0, 8)),
                 NumericalError);
}

TEST(PotentialType, SupBoundAndFiniteness) {
    const Grid g = make_grid(-5.0, 5.0, 32);
    const Potential v = sample_potential([](double x) { return std::sin(x) * 3.0; }, g);
    EXPECT_LE(v.values().cwiseAbs().maxCoeff(), v.sup_bound());
    RVector bad = RVector::Zero(32);
    bad[3] = NAN;
    EXPECT_THROW(Potential(g, bad), InvalidArgument);
    EXPECT_THROW(Potential(g, RVector::Zero(31)), InvalidArgument);
}

TEST(WaveFunctionType, LengthMustMatchGrid) {
    EXPECT_THROW(WaveFunction(make_grid(0.0, 1.0, 8), CVector::Zero(9)), InvalidArgument);
}

TEST(InnerProduct, ConstantOne) {
    const Grid g = make_grid(0.0, 1.0, 8);
    const WaveFunction one(g, CVector::Ones(8));
    EXPECT_DOUBLE_EQ(inner_product(one, one).real(), 1.0);
    EXPECT_EQ(inner_product(one, one).imag(), 0.0);
}

TEST(InnerProduct, OrthogonalBasisVectors) {
    const Grid g = make_grid(0.0, 1.0, 8);
    const WaveFunction e0(g, CVector::Unit(8, 0));
    const WaveFunction e1(g, CVector::Unit(8, 1));
    EXPECT_EQ(inner_product(e0, e1), Complex(0.0, 0.0));
}

TEST(InnerProduct, SelfProductRealNonnegative) {
    const Grid g = make_grid(-2.0, 2.0, 64);
    for (int trial = 0; trial < 10; ++trial) {
        const WaveFunction f(g, random_vector(64));
        const Complex p = inner_product(f, f);
        EXPECT_EQ(p.imag(), 0.0);
        EXPECT_GE(p.real(), 0.0);
    }
}

TEST(InnerProduct, RejectsGridMismatch) {
    const WaveFunction f = WaveFunction::zeros(make_grid(0.0, 1.0, 8));
    const WaveFunction g = WaveFunction::zeros(make_grid(0.0, 2.0, 8));
    EXPECT_THROW(inner_product(f, g), InvalidArgument);
}

TEST(L2Norm, Examples) {
    const Grid g = make_grid(0.0, 1.0, 8);
    EXPECT_EQ(l2_norm(WaveFunction::zeros(g)), 0.0);
    EXPECT_DOUBLE_EQ(l2_norm(WaveFunction(g, CVector::Ones(8))), 1.0);
    EXPECT_NEAR(l2_norm(WaveFunction(g, CVector::Unit(8, 0))), 0.353553, 1e-6);
}

TEST(GridProperties, CauchySchwarz) {
    const Grid g = make_grid(-4.0, 4.0, 128);
    for (int trial = 0; trial < 50; ++trial) {
        const WaveFunction f(g, random_vector(128));
        const WaveFunction h(g, random_vector(128));
        EXPECT_LE(std::abs(inner_product(f, h)), l2_norm(f) * l2_norm(h) * (1.0 + 1e-12));
    }
    const WaveFunction f(g, random_vector(128));
    const WaveFunction parallel = f.with_values(Complex(0.0, 2.0) * f.values());
    EXPECT_LE(std::abs(inner_product(f, parallel)), l2_norm(f) * l2_norm(parallel) * (1.0 + 1e-12));
}

TEST(GridProperties, ConjugateSymmetryExact) {
    const Grid g = make_grid(-4.0, 4.0, 64);
    for (int trial = 0; trial < 50; ++trial) {
        const WaveFunction f(g, random_vector(64));
        const WaveFunction h(g, random_vector(64));
        EXPECT_EQ(inner_product(f, h), std::conj(inner_product(h, f)));
    }
}

TEST(GridProperties, NormHomogeneity) {
    const Grid g = make_grid(-4.0, 4.0, 64);
    for (int trial = 0; trial < 50; ++trial) {
        const WaveFunction f(g, random_vector(64));
        const Complex c(testing::uniform(-10, 10), testing::uniform(-10, 10));
        const double lhs = l2_norm(f.with_values(c * f.values()));
        EXPECT_NEAR(lhs, std::abs(c) * l2_norm(f), 1e-13 * lhs);
    }
}

TEST(Spectral, SecondDerivativeOfPlaneWave) {
    const Grid g = make_grid(0.0, 2.0 * std::numbers::pi, 32);
    const WaveFunction f = sample([](double x) { return std::exp(Complex(0.0, 3.0 * x)); }, g);
    const WaveFunction d2 = spectral::second_derivative(f);
    EXPECT_LE((d2.values() + 9.0 * f.values()).cwiseAbs().maxCoeff(), 1e-11);
}

} // namespace
} // namespace qfey
