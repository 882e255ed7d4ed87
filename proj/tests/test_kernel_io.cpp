#include <opticsbench/kernel_io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace opticsbench;

namespace {

KernelStack random_stack(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    KernelStack s;
    for (auto c : kOpticalCorruptions)
        for (int sev = 1; sev <= kSeverities; ++sev)
            for (int v = 0; v < 2; ++v) {
                Kernel k;
                for (auto& x : k.data) x = u(rng);
                k.label = {c, sev, v};
                s.insert(std::move(k));
            }
    return s;
}

std::uint64_t format_offset(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_kernel_stack(bytes);
    } catch (const FormatError& e) {
        return e.offset();
    }
    ADD_FAILURE() << "no FormatError";
    return ~0ull;
}

}  // namespace

TEST(KernelIo, FileSizeForFullStack) {
    // 32-byte header + 40 * (4 label bytes + 3 * 625 float32).
    EXPECT_EQ(okf_file_size(40), 300192u);
    EXPECT_EQ(encode_kernel_stack(random_stack(1)).size(), 300192u);
}

TEST(KernelIo, RoundTripIsBitExact) {
    const auto s = random_stack(2);
    EXPECT_EQ(decode_kernel_stack(encode_kernel_stack(s)), s);
}

TEST(KernelIo, HeaderLayoutIsLittleEndian) {
    KernelStack s;
    Kernel k = delta_kernel();
    k.label = {Corruption::trefoil, 4, 1};
    s.insert(k);
    const auto b = encode_kernel_stack(s);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "OKF1");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[8], 25);
    EXPECT_EQ(b[12], 25);
    EXPECT_EQ(b[16], 3);
    EXPECT_EQ(b[32], 3);  // trefoil id
    EXPECT_EQ(b[33], 4);
    EXPECT_EQ(b[34], 1);
    // Center element of channel 0 is 1.0f = 0x3f800000.
    const std::size_t center = 36 + 4 * (12 * 25 + 12);
    EXPECT_EQ(b[center + 2], 0x80);
    EXPECT_EQ(b[center + 3], 0x3f);
}

TEST(KernelIo, MalformedInputsReportOffsets) {
    const auto good = encode_kernel_stack(random_stack(3));

    auto bad = good;
    bad[0] = 'X';
    EXPECT_EQ(format_offset(bad), 0u);

    bad = good;
    bad[8] = 24;
    EXPECT_EQ(format_offset(bad), 8u);

    bad = good;
    bad[16] = 4;
    EXPECT_EQ(format_offset(bad), 16u);

    bad = good;
    bad.resize(good.size() - 10);
    EXPECT_EQ(format_offset(bad), bad.size());

    bad = good;
    bad[32 + 7504] = 9;  // corruption id of the second kernel
    EXPECT_EQ(format_offset(bad), 32u + 7504u);

    bad = good;
    bad[32 + 1] = 6;
    EXPECT_EQ(format_offset(bad), 33u);

    bad = good;
    bad.push_back(0);
    EXPECT_EQ(format_offset(bad), good.size());

    bad = good;
    bad[32 + 7504 + 2] = 0;  // second kernel now duplicates the first label
    EXPECT_EQ(format_offset(bad), 32u + 7504u);
}

TEST(KernelIo, FileRoundTripAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "opticsbench_kernel_io";
    std::filesystem::create_directories(dir);
    const auto s = random_stack(4);
    write_kernel_file(s, dir / "k.okf");
    EXPECT_EQ(read_kernel_file(dir / "k.okf"), s);
    EXPECT_THROW(read_kernel_file(dir / "missing.okf"), IoError);
    EXPECT_THROW(write_kernel_file(s, dir / "no" / "such" / "dir.okf"), IoError);
    std::filesystem::remove_all(dir);
}

TEST(KernelIo, MixedWavelengthsRejected) {
    KernelStack s = random_stack(5);
    Kernel k = s.at({Corruption::coma, 2, 0});
    k.wavelengths_nm[0] = 600.0;
    s.insert(k);
    EXPECT_THROW(encode_kernel_stack(s), ConfigError);
}
