#pragma once

// OKF1 kernel stack files.
//
//   0   char[4]  "OKF1"
//   4   u32      kernel count
//   8   u32      height (25)
//   12  u32      width (25)
//   16  u32      channels (3)
//   20  f32[3]   wavelengths in nm
//   32  per kernel: u8 corruption id, u8 severity, u8 variant, u8 pad,
//       then channels x height x width f32 values
//
// All multi-byte fields are little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"

namespace opticsbench {

inline constexpr std::array<char, 4> kOkfMagic{'O', 'K', 'F', '1'};
inline constexpr std::size_t kOkfHeaderBytes = 32;
inline constexpr std::size_t kOkfLabelBytes = 4;
inline constexpr std::size_t kOkfKernelBytes = kOkfLabelBytes + sizeof(float) * kChannels * kKernelPlane;

inline constexpr std::size_t okf_file_size(std::size_t kernel_count) {
    return kOkfHeaderBytes + kernel_count * kOkfKernelBytes;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace detail

inline std::vector<std::uint8_t> encode_kernel_stack(const KernelStack& stack) {
    std::array<double, kChannels> wl{610.0, 530.0, 470.0};
    if (!stack.empty()) wl = stack.begin()->second.wavelengths_nm;
    for (const auto& [label, k] : stack)
        if (k.wavelengths_nm != wl) throw ConfigError("kernel " + label.to_string() + " has different wavelengths");

    std::vector<std::uint8_t> out;
    out.reserve(okf_file_size(stack.size()));
    out.insert(out.end(), kOkfMagic.begin(), kOkfMagic.end());
    detail::put_u32(out, static_cast<std::uint32_t>(stack.size()));
    detail::put_u32(out, kKernelSize);
    detail::put_u32(out, kKernelSize);
    detail::put_u32(out, kChannels);
    for (double w : wl) detail::put_f32(out, static_cast<float>(w));
    for (const auto& [label, k] : stack) {
        out.push_back(static_cast<std::uint8_t>(label.corruption));
        out.push_back(static_cast<std::uint8_t>(label.severity));
        out.push_back(static_cast<std::uint8_t>(label.variant));
        out.push_back(0);
        for (float v : k.data) detail::put_f32(out, v);
    }
    return out;
}

inline KernelStack decode_kernel_stack(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kOkfMagic.data(), 4) != 0) throw FormatError("bad magic", 0);
    if (bytes.size() < kOkfHeaderBytes) throw FormatError("truncated header", bytes.size());
    const std::uint8_t* p = bytes.data();
    const std::uint32_t count = detail::get_u32(p + 4);
    const std::uint32_t h = detail::get_u32(p + 8);
    const std::uint32_t w = detail::get_u32(p + 12);
    const std::uint32_t ch = detail::get_u32(p + 16);
    if (h != kKernelSize) throw FormatError("height " + std::to_string(h) + " != 25", 8);
    if (w != kKernelSize) throw FormatError("width " + std::to_string(w) + " != 25", 12);
    if (ch != kChannels) throw FormatError("channels " + std::to_string(ch) + " != 3", 16);
    std::array<double, kChannels> wl{};
    for (int c = 0; c < kChannels; ++c) wl[c] = detail::get_f32(p + 20 + 4 * c);

    KernelStack stack;
    std::size_t off = kOkfHeaderBytes;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (bytes.size() - off < kOkfKernelBytes) throw FormatError("truncated kernel " + std::to_string(i), bytes.size());
        const std::uint8_t id = p[off], sev = p[off + 1], var = p[off + 2];
        if (id > static_cast<std::uint8_t>(Corruption::disk_baseline))
            throw FormatError("unknown corruption id " + std::to_string(id), off);
        if (sev < 1 || sev > kSeverities) throw FormatError("severity " + std::to_string(sev) + " out of range", off + 1);
        if (var > 1) throw FormatError("variant " + std::to_string(var) + " out of range", off + 2);
        Kernel k;
        k.label = {static_cast<Corruption>(id), sev, var};
        k.wavelengths_nm = wl;
        if (stack.contains(k.label)) throw FormatError("duplicate kernel " + k.label.to_string(), off);
        const std::uint8_t* d = p + off + kOkfLabelBytes;
        for (std::size_t j = 0; j < k.data.size(); ++j) k.data[j] = detail::get_f32(d + 4 * j);
        stack.insert(std::move(k));
        off += kOkfKernelBytes;
    }
    if (off != bytes.size()) throw FormatError("trailing bytes after last kernel", off);
    return stack;
}

inline void write_kernel_file(const KernelStack& stack, const std::filesystem::path& path) {
    const auto bytes = encode_kernel_stack(stack);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

inline KernelStack read_kernel_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_kernel_stack(bytes);
}

}  // namespace opticsbench
