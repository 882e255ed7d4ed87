#include <opticsbench/zernike.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace opticsbench;

namespace {

constexpr double kPi = std::numbers::pi;

// Midpoint-rule inner product over the unit disk in polar coordinates.
double disk_inner(int i, int j, int nr = 200, int nt = 256) {
    double acc = 0.0;
    for (int a = 0; a < nr; ++a) {
        const double rho = (a + 0.5) / nr;
        for (int b = 0; b < nt; ++b) {
            const double th = 2.0 * kPi * (b + 0.5) / nt;
            acc += eval_fringe(FringeIndex{i}, rho, th) * eval_fringe(FringeIndex{j}, rho, th) * rho;
        }
    }
    return acc * (1.0 / nr) * (2.0 * kPi / nt);
}

}  // namespace

TEST(Zernike, PistonIsConstant) { EXPECT_DOUBLE_EQ(eval_fringe(FringeIndex{1}, 0.7, 1.2), 1.0); }

TEST(Zernike, DefocusCenterAndEdge) {
    EXPECT_DOUBLE_EQ(eval_fringe(FringeIndex{4}, 0.0, 0.3), -1.0);
    EXPECT_DOUBLE_EQ(eval_fringe(FringeIndex{4}, 1.0, 0.3), 1.0);
}

TEST(Zernike, HorizontalComaClosedForm) {
    // (3 rho^3 - 2 rho) cos(theta) at rho = 0.5, theta = 0.
    EXPECT_NEAR(eval_fringe(FringeIndex{7}, 0.5, 0.0), -0.625, 1e-15);
}

TEST(Zernike, SelectedModesAgainstCartesianForms) {
    const double x = 0.3, y = -0.5;
    const double rho = std::hypot(x, y), th = std::atan2(y, x);
    EXPECT_NEAR(eval_fringe(FringeIndex{5}, rho, th), x * x - y * y, 1e-14);
    EXPECT_NEAR(eval_fringe(FringeIndex{6}, rho, th), 2 * x * y, 1e-14);
    EXPECT_NEAR(eval_fringe(FringeIndex{10}, rho, th), x * x * x - 3 * x * y * y, 1e-14);
    EXPECT_NEAR(eval_fringe(FringeIndex{11}, rho, th), 3 * x * x * y - y * y * y, 1e-14);
    const double r2 = x * x + y * y;
    EXPECT_NEAR(eval_fringe(FringeIndex{9}, rho, th), 6 * r2 * r2 - 6 * r2 + 1, 1e-14);
    EXPECT_NEAR(eval_fringe(FringeIndex{12}, rho, th), (4 * r2 - 3) * (x * x - y * y), 1e-14);
}

TEST(Zernike, RhoOutsideUnitDiskThrows) {
    EXPECT_THROW(eval_fringe(FringeIndex{4}, 1.01, 0.0), DomainError);
    EXPECT_THROW(eval_fringe(FringeIndex{4}, -0.1, 0.0), DomainError);
    EXPECT_NO_THROW(eval_fringe(FringeIndex{4}, 1.0 + 1e-14, 0.0));
}

TEST(Zernike, IndexRange) {
    EXPECT_THROW(FringeIndex{0}, DomainError);
    EXPECT_THROW(FringeIndex{13}, DomainError);
    EXPECT_FALSE(FringeIndex{3}.in_benchmark_set());
    EXPECT_TRUE(FringeIndex{4}.in_benchmark_set());
    EXPECT_TRUE(FringeIndex{11}.in_benchmark_set());
    EXPECT_FALSE(FringeIndex{12}.in_benchmark_set());
}

TEST(Zernike, ModesAreOrthogonalOnTheDisk) {
    for (int i = 1; i <= kMaxFringeIndex; ++i)
        for (int j = i + 1; j <= kMaxFringeIndex; ++j) EXPECT_NEAR(disk_inner(i, j), 0.0, 2e-3) << "Z" << i << " Z" << j;
}

TEST(Zernike, AzimuthalOrderMatchesTable) {
    // Z(rho, theta + pi/|m|) = -Z(rho, theta) for m != 0; rotation invariance for m = 0.
    for (int j = 1; j <= kMaxFringeIndex; ++j) {
        const FringeIndex f{j};
        const auto nm = fringe_to_nm(f);
        const double rho = 0.8, th = 0.37;
        const double v = eval_fringe(f, rho, th);
        if (nm.m == 0) {
            EXPECT_NEAR(eval_fringe(f, rho, th + 1.0), v, 1e-12) << j;
        } else {
            EXPECT_NEAR(eval_fringe(f, rho, th + kPi / std::abs(nm.m)), -v, 1e-12) << j;
        }
        // Value at the edge along the lobe direction is 1 for every mode (unnormalized Fringe convention).
        const double lobe = nm.m >= 0 ? 0.0 : kPi / (2.0 * std::abs(nm.m));
        EXPECT_NEAR(eval_fringe(f, 1.0, lobe), 1.0, 1e-12) << j;
    }
}

TEST(Wavefront, ZeroCoefficientsGiveFlatWavefront) {
    ZernikeSpec spec;
    for (double x : {-0.5, 0.0, 0.7})
        for (double y : {-0.3, 0.0, 0.6}) EXPECT_EQ(wavefront(spec, 1, x, y), 0.0);
}

TEST(Wavefront, DefocusOneWaveAtEdgeIsOneWavelength) {
    ZernikeSpec spec;
    spec.set_all(FringeIndex{4}, 1.0);
    for (int c = 0; c < kChannels; ++c) EXPECT_DOUBLE_EQ(wavefront(spec, c, 1.0, 0.0), spec.wavelengths_nm[c]);
}

TEST(Wavefront, MixedTermsAddUp) {
    ZernikeSpec spec;
    spec.set(0, FringeIndex{4}, 0.5).set(0, FringeIndex{5}, 0.3);
    // rho^2 = 0.4: Z4 = -0.2, Z5 = x^2 - y^2 = 0.32; (0.5 * -0.2 + 0.3 * 0.32) * 610 nm.
    EXPECT_NEAR(wavefront(spec, 0, 0.6, 0.2), -2.44, 1e-12);
}

TEST(Wavefront, Errors) {
    ZernikeSpec spec;
    EXPECT_THROW(wavefront(spec, 0, 0.9, 0.9), DomainError);
    EXPECT_THROW(wavefront(spec, 3, 0.0, 0.0), DomainError);
    EXPECT_THROW(spec.set(0, FringeIndex{4}, std::nan("")), DomainError);
}
