#include <opticsbench/corruptor.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace opticsbench;
namespace fs = std::filesystem;

namespace {

Image8 random_rgb(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Image8 img(w, h, 3);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
}

KernelStack delta_stack() {
    KernelStack s;
    for (auto c : kOpticalCorruptions)
        for (int sev = 1; sev <= kSeverities; ++sev)
            for (int v = 0; v < 2; ++v) {
                Kernel k = delta_kernel();
                k.label = {c, sev, v};
                s.insert(k);
            }
    return s;
}

std::string read_all(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class CorruptorTree : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("opticsbench_corruptor_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        for (int i = 0; i < 10; ++i) {
            const fs::path dir = root_ / "src" / (i % 2 ? "cat" : "dog");
            fs::create_directories(dir);
            write_image(dir / ("img" + std::to_string(i) + ".png"), random_rgb(240 + 3 * i, 230, i));
        }
    }
    void TearDown() override { fs::remove_all(root_); }

    CorruptionJob job(const std::string& dst) const {
        CorruptionJob j;
        j.src_root = root_ / "src";
        j.dst_root = root_ / dst;
        j.stack = delta_stack();
        j.seed = 5;
        return j;
    }

    fs::path root_;
};

}  // namespace

TEST(Preprocess, SquareInputIsCenterCropped) {
    const Image8 img = random_rgb(256, 256, 1);
    EXPECT_EQ(preprocess(img), center_crop(img, 224, 224));
    const Image8 out = preprocess(img);
    EXPECT_EQ(out.at(0, 0, 0), img.at(0, 16, 16));
}

TEST(Preprocess, WideInputKeepsAspect) {
    const Image8 img = random_rgb(512, 256, 2);
    const Image8 out = preprocess(img);
    EXPECT_EQ(out.width, 224);
    EXPECT_EQ(out.height, 224);
    EXPECT_EQ(out.at(1, 0, 0), img.at(1, 16, 144));
    EXPECT_EQ(preprocess(random_rgb(1024, 512, 3)).width, 224);
    // Anisotropic resize squeezes the long side instead.
    EXPECT_NE(preprocess(img, true), out);
}

TEST(Preprocess, ConstantStaysConstantAndSmallInputsFail) {
    const Image8 c(300, 500, 3, 77);
    for (auto v : preprocess(c).data) ASSERT_EQ(v, 77);
    EXPECT_THROW(preprocess(Image8(31, 300, 3)), DomainError);
}

TEST(Preprocess, BilinearReproducesLinearRamp) {
    Image8 ramp(64, 8, 1);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 64; ++x) ramp.at(0, y, x) = static_cast<std::uint8_t>(2 * x);
    // Downsample by 2: output pixel x samples source position 2x + 0.5, value 4x + 1.
    const Image8 half = resize_bilinear(ramp, 32, 4);
    for (int x = 0; x < 32; ++x) EXPECT_EQ(half.at(0, 1, x), 4 * x + 1);
}

TEST(Variants, DeterministicAndBalanced) {
    EXPECT_EQ(assign_variant(9, 17), assign_variant(9, 17));
    int ones = 0;
    for (int i = 0; i < 10000; ++i) ones += assign_variant(9, i);
    EXPECT_NEAR(ones, 5000, 150);
    int differ = 0;
    for (int i = 0; i < 100; ++i) differ += assign_variant(9, i) != assign_variant(10, i);
    EXPECT_GT(differ, 20);
}

TEST(OutputPath, Layout) {
    EXPECT_EQ(output_relpath(Corruption::coma, 3, "cat/a.jpeg", ImageFormat::png), "coma/3/cat/a.png");
    EXPECT_EQ(output_relpath(Corruption::disk_baseline, 1, "b.png", ImageFormat::jpeg), "defocus_blur/1/b.jpg");
}

TEST_F(CorruptorTree, FullGridWithIdentityKernels) {
    const auto m = corrupt_dataset(job("out"));
    EXPECT_EQ(m.rows.size(), 200u);
    EXPECT_TRUE(m.errors.empty());
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root_ / "out")) files += e.path().extension() == ".png";
    EXPECT_EQ(files, 200);
    // Identity kernels reproduce the preprocessed input.
    const Image8 src = preprocess(read_image(root_ / "src" / "cat" / "img3.png"));
    EXPECT_EQ(read_image(root_ / "out" / "trefoil" / "5" / "cat" / "img3.png"), src);
    const std::string manifest = read_all(root_ / "out" / "manifest.csv");
    EXPECT_EQ(manifest.rfind("path,corruption,severity,variant,output\n", 0), 0u);
}

TEST_F(CorruptorTree, RerunAndPermutedListingAreIdentical) {
    const auto listing = list_images(root_ / "src");
    auto shuffled = listing;
    std::mt19937 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto j = job("a");
    j.threads = 3;
    const auto a = corrupt_dataset(j, listing);
    const auto b = corrupt_dataset(job("b"), shuffled);
    EXPECT_EQ(a, b);
    EXPECT_EQ(read_all(root_ / "a" / "manifest.csv"), read_all(root_ / "b" / "manifest.csv"));
    for (const auto& r : a.rows) ASSERT_EQ(read_all(root_ / "a" / r.output), read_all(root_ / "b" / r.output)) << r.output;
}

TEST_F(CorruptorTree, UndecodableInputIsRecordedAndSkipped) {
    std::ofstream(root_ / "src" / "cat" / "broken.png") << "not an image";
    write_image(root_ / "src" / "cat" / "img1.jpg", random_rgb(64, 64, 99), ImageFormat::jpeg);  // same output stem as img1.png
    auto j = job("out");
    j.corruptions = {Corruption::coma};
    j.severities = {2};
    const auto m = corrupt_dataset(j);
    EXPECT_EQ(m.rows.size(), 10u);
    ASSERT_EQ(m.errors.size(), 2u);
    EXPECT_EQ(m.errors[0].path, "cat/broken.png");
    EXPECT_EQ(m.errors[1].path, "cat/img1.png");
    EXPECT_NE(read_all(root_ / "out" / "manifest.csv").find("# error,cat/broken.png"), std::string::npos);
}

TEST_F(CorruptorTree, DiskBaselineAndMissingKernels) {
    auto j = job("out");
    j.corruptions = {Corruption::disk_baseline};
    j.stack = {};
    const auto m = corrupt_dataset(j);
    EXPECT_EQ(m.rows.size(), 50u);
    for (const auto& r : m.rows) EXPECT_EQ(r.variant, 0);

    j.corruptions = {Corruption::astigmatism};
    EXPECT_THROW(corrupt_dataset(j), ConfigError);
}

TEST_F(CorruptorTree, UnwritableDestination) {
    std::ofstream(root_ / "file") << "x";
    auto j = job("file/sub");
    EXPECT_THROW(corrupt_dataset(j), IoError);
}
