#include <opticsbench/convolution.hpp>
#include <opticsbench/pupil_psf.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace opticsbench;

namespace {

Kernel random_kernel(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Kernel k;
    for (auto& v : k.data) v = u(rng);
    return k;
}

ImageD random_image(int w, int h, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    ImageD img(w, h, c);
    for (auto& v : img.data) v = u(rng);
    return img;
}

}  // namespace

TEST(Reflect101, Indices) {
    EXPECT_EQ(reflect101(-1, 5), 1);
    EXPECT_EQ(reflect101(-2, 5), 2);
    EXPECT_EQ(reflect101(5, 5), 3);
    EXPECT_EQ(reflect101(6, 5), 2);
    EXPECT_EQ(reflect101(-9, 5), 1);
    EXPECT_EQ(reflect101(3, 1), 0);
}

TEST(Convolution, MatchesDirectSum) {
    // out(y, x) = sum_{v,u} k(v, u) * in(reflect(y + 12 - v), reflect(x + 12 - u)).
    const auto img = random_image(30, 27, 3, 1);
    const Kernel k = random_kernel(2);
    const ImageD out = convolve(img, k);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; y += 4)
            for (int x = 0; x < img.width; x += 3) {
                double acc = 0.0;
                for (int v = 0; v < 25; ++v)
                    for (int u = 0; u < 25; ++u)
                        acc += k.at(c, v, u) * img.at(c, reflect101(y + 12 - v, img.height), reflect101(x + 12 - u, img.width));
                EXPECT_NEAR(out.at(c, y, x), acc, 1e-9);
            }
}

TEST(Convolution, DeltaIsIdentity) {
    Image8 img(40, 33, 3);
    std::mt19937 rng(4);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(convolve_rgb(img, delta_kernel()), img);
}

TEST(Convolution, ConstantImageUnchanged) {
    const Image8 img(50, 50, 3, 173);
    EXPECT_EQ(convolve_rgb(img, disk_baseline_kernel(5)), img);
}

TEST(Convolution, FftPathAgrees) {
    const auto img = random_image(64, 48, 1, 5);
    const Kernel k = random_kernel(6);
    ImageD direct(64, 48, 1);
    convolve_plane<double>(img.plane(0), 64, 48, k.channel(1), direct.plane(0));
    const FftConvolver fc(img);
    const ImageD viafft = fc.convolve(k.channel(1));
    for (std::size_t i = 0; i < direct.data.size(); ++i) EXPECT_NEAR(viafft.data[i], direct.data[i], 1e-8);
}

TEST(Convolution, RejectsWrongShapes) {
    EXPECT_THROW(convolve(ImageD(10, 10, 1), delta_kernel()), ConfigError);
}
