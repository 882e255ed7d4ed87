#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace opticsbench {

// Planar image, channel-major then row-major: data[(c * height + y) * width + x].
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, int c, T fill = T{})
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width) * height; }

    T& at(int c, int y, int x) noexcept { return data[(c * static_cast<std::size_t>(height) + y) * width + x]; }
    const T& at(int c, int y, int x) const noexcept {
        return data[(c * static_cast<std::size_t>(height) + y) * width + x];
    }

    std::span<T> plane(int c) noexcept { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const T> plane(int c) const noexcept { return {data.data() + c * plane_size(), plane_size()}; }

    bool same_shape(const Image& o) const noexcept {
        return width == o.width && height == o.height && channels == o.channels;
    }

    bool operator==(const Image&) const = default;
};

using Image8 = Image<std::uint8_t>;
using ImageD = Image<double>;

// Single-channel double image; RGB inputs are averaged over channels.
template <typename T>
ImageD to_gray(const Image<T>& img) {
    ImageD out(img.width, img.height, 1);
    if (img.channels == 1) {
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<double>(img.data[i]);
        return out;
    }
    const std::size_t n = img.plane_size();
    for (int c = 0; c < img.channels; ++c) {
        const auto p = img.plane(c);
        for (std::size_t i = 0; i < n; ++i) out.data[i] += static_cast<double>(p[i]);
    }
    for (auto& v : out.data) v /= img.channels;
    return out;
}

inline std::uint8_t saturate_u8(double v) noexcept {
    const double r = std::nearbyint(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

template <typename T>
Image8 to_u8(const Image<T>& img) {
    Image8 out(img.width, img.height, img.channels);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = saturate_u8(static_cast<double>(img.data[i]));
    return out;
}

// Reflect-101 border index (… c b | a b c d | c b …), valid for any offset.
inline int reflect101(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace opticsbench
