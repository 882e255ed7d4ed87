#pragma once

// 2-D convolution of image planes with 25x25 kernels, reflect-101 borders.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "image.hpp"
#include "kernel.hpp"

namespace opticsbench {

namespace detail {

inline std::vector<double> reflect_pad(std::span<const double> src, int width, int height, int pad) {
    const int pw = width + 2 * pad;
    const int ph = height + 2 * pad;
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = reflect101(y - pad, height);
        for (int x = 0; x < pw; ++x)
            out[static_cast<std::size_t>(y) * pw + x] = src[static_cast<std::size_t>(sy) * width + reflect101(x - pad, width)];
    }
    return out;
}

}  // namespace detail

// True convolution (kernel flipped) of one plane; out must hold width*height values.
template <typename T>
void convolve_plane(std::span<const T> src, int width, int height, std::span<const float> kernel,
                    std::span<double> out) {
    constexpr int half = kKernelSize / 2;
    if (kernel.size() != static_cast<std::size_t>(kKernelPlane)) throw ConfigError("kernel plane must be 25x25");
    std::vector<double> in(src.begin(), src.end());
    const auto padded = detail::reflect_pad(in, width, height, half);
    const int pw = width + 2 * half;
    std::vector<double> acc(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int v = 0; v < kKernelSize; ++v) {
            const double* row = padded.data() + static_cast<std::size_t>(y + 2 * half - v) * pw + 2 * half;
            for (int u = 0; u < kKernelSize; ++u) {
                const double w = kernel[static_cast<std::size_t>(v) * kKernelSize + u];
                if (w == 0.0) continue;
                const double* s = row - u;
                for (int x = 0; x < width; ++x) acc[x] += w * s[x];
            }
        }
        std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(y) * width);
    }
}

// Per-channel convolution; channel c of the image uses channel c of the kernel.
template <typename T>
ImageD convolve(const Image<T>& img, const Kernel& kernel) {
    if (img.channels != kChannels) throw ConfigError("convolve expects a 3-channel image");
    ImageD out(img.width, img.height, img.channels);
    for (int c = 0; c < img.channels; ++c) convolve_plane<T>(img.plane(c), img.width, img.height, kernel.channel(c), out.plane(c));
    return out;
}

// Convolution of an 8-bit RGB image; results are rounded and clamped to [0, 255].
inline Image8 convolve_rgb(const Image8& img, const Kernel& kernel) { return to_u8(convolve(img, kernel)); }

// Repeated convolution of one fixed single-channel image with many kernels.
// Uses a reflect-101 padded DFT, so results match convolve_plane up to rounding.
class FftConvolver {
public:
    explicit FftConvolver(const ImageD& gray) : width_(gray.width), height_(gray.height) {
        if (gray.channels != 1) throw ConfigError("FftConvolver expects a single-channel image");
        constexpr int half = kKernelSize / 2;
        pw_ = width_ + 2 * half;
        ph_ = height_ + 2 * half;
        const auto padded = detail::reflect_pad(gray.plane(0), width_, height_, half);
        spectrum_.assign(padded.begin(), padded.end());
        fft2d(spectrum_, ph_, pw_);
    }

    ImageD convolve(std::span<const float> kernel) const {
        constexpr int half = kKernelSize / 2;
        ComplexBuffer k(static_cast<std::size_t>(pw_) * ph_, Complex{});
        for (int v = 0; v < kKernelSize; ++v)
            for (int u = 0; u < kKernelSize; ++u) {
                const int r = (v - half + ph_) % ph_;
                const int c = (u - half + pw_) % pw_;
                k[static_cast<std::size_t>(r) * pw_ + c] = kernel[static_cast<std::size_t>(v) * kKernelSize + u];
            }
        fft2d(k, ph_, pw_);
        for (std::size_t i = 0; i < k.size(); ++i) k[i] *= spectrum_[i];
        fft2d(k, ph_, pw_, true);
        const double scale = 1.0 / (static_cast<double>(pw_) * ph_);
        ImageD out(width_, height_, 1);
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                out.at(0, y, x) = k[static_cast<std::size_t>(y + half) * pw_ + (x + half)].real() * scale;
        return out;
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

private:
    int width_, height_, pw_ = 0, ph_ = 0;
    ComplexBuffer spectrum_;
};

}  // namespace opticsbench
