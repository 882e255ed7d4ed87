#include <opticsbench/matcher.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace opticsbench;

namespace {

const MatchCharts& charts() {
    static const MatchCharts c(5.0, 0);
    return c;
}

const PupilGrid& pupil() {
    static const PupilGrid p = build_pupil();
    return p;
}

Kernel zernike_kernel(int j, double a) {
    ZernikeSpec spec;
    spec.set_all(FringeIndex{j}, a);
    return psf_rgb(spec, pupil());
}

double slice_gap(const MatchReport& r) {
    double gap = 0.0;
    for (const auto& t : r.terms)
        if (t.metric == "mtf50" || t.metric == "auc") gap = std::max(gap, t.distance);
    return gap;
}

}  // namespace

TEST(MatchConfig, Validation) {
    MatchConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.half_steps(), 5);
    cfg.search_half_width = 0.25;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.step = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.metric_channel = 3;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.metric_weights["auc"] = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(MatchConfig, DefaultWeightsGiveEachFamilyOneThird) {
    const auto w = default_metric_weights();
    const double psf = 4 * w.at("mtf50") + 4 * w.at("auc") + w.at("kernel_ssim") + w.at("kernel_psnr");
    const double edge = w.at("edge_ssim") + w.at("edge_psnr");
    const double coins = w.at("coins_ssim") + w.at("coins_psnr") + w.at("acutance") + w.at("texture_mtf50");
    EXPECT_NEAR(psf, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(edge, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(coins, 1.0 / 3.0, 1e-15);
}

TEST(KernelDistance, SelfDistanceIsZero) {
    const Kernel d = disk_baseline_kernel(2);
    const auto r = kernel_distance(d, d, charts());
    EXPECT_EQ(r.composite, 0.0);
    EXPECT_DOUBLE_EQ(r.term("kernel_ssim")->candidate, 1.0);
    EXPECT_TRUE(std::isinf(r.term("edge_psnr")->candidate));
    EXPECT_EQ(r.terms.size(), 16u);
}

TEST(KernelDistance, SeparatesDistantSeverities) {
    const auto near = kernel_distance(disk_baseline_kernel(1), disk_baseline_kernel(1), charts());
    const auto far = kernel_distance(disk_baseline_kernel(5), disk_baseline_kernel(1), charts());
    EXPECT_GT(far.composite, 10.0 * std::max(near.composite, 0.01));
    EXPECT_GT(far.composite, kernel_distance(disk_baseline_kernel(2), disk_baseline_kernel(1), charts()).composite);
}

TEST(KernelDistance, OrientationOnlyDifferenceShowsInSlices) {
    // Z5 and Z6 give the same PSF up to a 45 degree rotation.
    const auto r = kernel_distance(zernike_kernel(5, 0.8), zernike_kernel(6, 0.8), charts());
    EXPECT_GT(slice_gap(r), 0.05);
    EXPECT_LT(r.term("acutance")->distance, 0.02);
    EXPECT_LT(r.term("texture_mtf50")->distance, 0.03);
}

TEST(KernelDistance, RejectsUnnormalizedKernels) {
    Kernel k = delta_kernel();
    k.data[0] = 0.5f;
    EXPECT_THROW(kernel_distance(k, delta_kernel(), charts()), ConfigError);
}

TEST(MeanSliceMtf50, DecreasesWithDefocus) {
    double prev = 1.0;
    for (double a : {0.5, 1.0, 1.5, 2.0}) {
        const auto v = mean_slice_mtf50(zernike_kernel(4, a).channel(1));
        ASSERT_TRUE(v.has_value());
        EXPECT_LT(*v, prev);
        prev = *v;
    }
    EXPECT_FALSE(mean_slice_mtf50(delta_kernel().channel(0)).has_value());
}

TEST(Calibration, HitsBaselineMtf50WithinAStep) {
    const MatchConfig cfg;
    const Kernel base = disk_baseline_kernel(3);
    const double a = calibrate_initial_guess(FringeIndex{4}, base, cfg, pupil());
    const double target = *mean_slice_mtf50(base.channel(1));
    const double lo = *mean_slice_mtf50(zernike_kernel(4, a - cfg.step).channel(1));
    const double hi = *mean_slice_mtf50(zernike_kernel(4, a + cfg.step).channel(1));
    EXPECT_GT(lo, target);
    EXPECT_LT(hi, target);
    EXPECT_NEAR(a / cfg.step, std::round(a / cfg.step), 1e-9);
}

TEST(Match, PicksGridMinimumAndIsDeterministic) {
    MatchConfig cfg;
    const Kernel base = disk_baseline_kernel(1);
    const auto r = match_kernel(Corruption::defocus_spherical, 1, 0, base, cfg, pupil(), charts());
    EXPECT_EQ(r.primary_mode, 4);
    EXPECT_EQ(r.secondary_mode, 9);
    EXPECT_EQ(r.secondary_coefficient, 0.0);
    EXPECT_LT(r.composite, 0.1);
    EXPECT_NEAR(r.primary_coefficient, r.initial_guess + r.offset, 1e-12);

    // Brute-force re-evaluation of the same grid.
    for (int i = -cfg.half_steps(); i <= cfg.half_steps(); ++i) {
        const double a = r.initial_guess + i * cfg.step;
        const auto d = kernel_distance(zernike_kernel(4, a), base, charts(), cfg);
        EXPECT_GE(d.composite, r.composite) << a;
    }
    const auto again = match_kernel(Corruption::defocus_spherical, 1, 0, base, cfg, pupil(), charts());
    EXPECT_EQ(again.primary_coefficient, r.primary_coefficient);
    EXPECT_EQ(again.composite, r.composite);
}

TEST(Match, OptimalGuessGivesZeroOffset) {
    MatchConfig cfg;
    const Kernel base = disk_baseline_kernel(2);
    const auto first = match_kernel(Corruption::defocus_spherical, 2, 0, base, cfg, pupil(), charts());
    cfg.initial_guess[2] = first.primary_coefficient;
    const auto second = match_kernel(Corruption::defocus_spherical, 2, 0, base, cfg, pupil(), charts());
    EXPECT_EQ(second.offset, 0.0);
    EXPECT_EQ(second.primary_coefficient, first.primary_coefficient);
}

TEST(Match, VariantsSelectModeOfThePair) {
    MatchConfig cfg;
    cfg.search_half_width = 0.1;
    const Kernel base = disk_baseline_kernel(2);
    const auto v0 = match_kernel(Corruption::astigmatism, 2, 0, base, cfg, pupil(), charts());
    const auto v1 = match_kernel(Corruption::astigmatism, 2, 1, base, cfg, pupil(), charts());
    EXPECT_EQ(v0.primary_mode, 5);
    EXPECT_EQ(v1.primary_mode, 6);
    EXPECT_NE(v0.spec.coefficient(1, FringeIndex{5}), 0.0);
    EXPECT_EQ(v0.spec.coefficient(1, FringeIndex{6}), 0.0);
    EXPECT_NE(v1.spec.coefficient(1, FringeIndex{6}), 0.0);
}

TEST(Match, RotatedAstigmatismVariants) {
    // Z6 is Z5 rotated by 45 degrees, so its 45 deg slice follows the Z5 0 deg slice.
    const auto m5 = mtf2d<float>(zernike_kernel(5, 1.0).channel(1));
    const auto m6 = mtf2d<float>(zernike_kernel(6, 1.0).channel(1));
    const auto a = mtf_slice(m5, 0), b = mtf_slice(m6, 45);
    const auto c = mtf_slice(m5, 45), d = mtf_slice(m6, 90);
    // Square pixels break the rotation symmetry near Nyquist, so compare up to 0.35 cycles/px.
    for (std::size_t i = 0; i < a.values.size() && a.frequencies[i] <= 0.35; ++i) {
        EXPECT_NEAR(a.values[i], b.values[i], 0.05) << i;
        EXPECT_NEAR(c.values[i], d.values[i], 0.05) << i;
    }
}

TEST(Match, CoefficientGrowsWithSeverity) {
    const MatchConfig cfg;
    double prev = 0.0;
    for (int s = 1; s <= kSeverities; ++s) {
        const auto r = match_kernel(Corruption::defocus_spherical, s, 0, disk_baseline_kernel(s), cfg, pupil(), charts());
        EXPECT_GE(std::abs(r.primary_coefficient), prev) << "severity " << s;
        prev = std::abs(r.primary_coefficient);
    }
}

TEST(Match, InvalidRequests) {
    const MatchConfig cfg;
    const Kernel base = disk_baseline_kernel(1);
    EXPECT_THROW(match_kernel(Corruption::disk_baseline, 1, 0, base, cfg, pupil(), charts()), MatchError);
    EXPECT_THROW(match_kernel(Corruption::coma, 6, 0, base, cfg, pupil(), charts()), MatchError);
    EXPECT_THROW(match_kernel(Corruption::coma, 1, 2, base, cfg, pupil(), charts()), MatchError);
}

TEST(Match, JointSecondarySweepsBothModes) {
    MatchConfig cfg;
    cfg.step = 0.2;
    cfg.search_half_width = 0.2;
    cfg.joint_secondary = true;
    cfg.initial_guess[1] = 0.6;
    const auto r = match_kernel(Corruption::coma, 1, 0, disk_baseline_kernel(1), cfg, pupil(), charts());
    EXPECT_NEAR(r.initial_guess, 0.6, 1e-12);
    EXPECT_LE(std::abs(r.secondary_coefficient), 0.2 + 1e-12);
}

TEST(Reports, CsvLayout) {
    MatchConfig cfg;
    cfg.search_half_width = 0.0;
    cfg.initial_guess[1] = 0.5;
    const auto r = match_kernel(Corruption::trefoil, 1, 1, disk_baseline_kernel(1), cfg, pupil(), charts());
    std::ostringstream os;
    write_match_reports(os, {r});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "corruption,severity,variant,metric,angle,candidate,baseline,distance,weight");
    int rows = 0;
    std::string last;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(line.rfind("trefoil,1,1,", 0), 0u) << line;
        last = line;
    }
    EXPECT_EQ(rows, 16 + 1 + 1);
    EXPECT_EQ(last.rfind("trefoil,1,1,composite,", 0), 0u);
}

TEST(RgVariant, ZeroesBlueOnly) {
    ZernikeSpec spec;
    spec.set_all(FringeIndex{7}, 1.3);
    const auto rg = rg_variant(spec);
    EXPECT_EQ(rg.coefficient(0, FringeIndex{7}), 1.3);
    EXPECT_EQ(rg.coefficient(1, FringeIndex{7}), 1.3);
    EXPECT_TRUE(rg.is_zero(2));
}
