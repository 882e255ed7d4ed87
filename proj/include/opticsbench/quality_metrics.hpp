#pragma once

// PSF-level and image-level quality metrics and the synthetic charts they run on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "image.hpp"
#include "kernel.hpp"
#include "rng.hpp"

namespace opticsbench {

inline constexpr int kMtfPad = 64;
inline constexpr int kChartSize = 224;

// |DFT| of a zero-padded kernel channel divided by its DC value; DC at (size/2, size/2).
// The source plane is kept so slices can be evaluated off the DFT grid.
struct Mtf2d {
    int size = kMtfPad;
    std::vector<double> values;
    std::vector<double> kernel;  // 25x25 source plane

    double at(int row, int col) const noexcept { return values[static_cast<std::size_t>(row) * size + col]; }
};

template <typename T>
Mtf2d mtf2d(std::span<const T> channel, int pad = kMtfPad) {
    if (channel.size() != static_cast<std::size_t>(kKernelPlane)) throw ConfigError("mtf2d expects a 25x25 plane");
    if (pad < kKernelSize) throw ConfigError("MTF padding smaller than the kernel");
    Mtf2d m;
    m.size = pad;
    m.kernel.assign(channel.begin(), channel.end());
    ComplexBuffer buf(static_cast<std::size_t>(pad) * pad, Complex{});
    for (int y = 0; y < kKernelSize; ++y)
        for (int x = 0; x < kKernelSize; ++x)
            buf[static_cast<std::size_t>(y) * pad + x] = m.kernel[static_cast<std::size_t>(y) * kKernelSize + x];
    fft2d(buf, pad, pad);
    const double dc = std::abs(buf[0]);
    if (!(dc > 0.0)) throw DomainError("MTF of an all-zero kernel channel");
    m.values.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) m.values[i] = std::abs(buf[i]) / dc;
    m.values[0] = 1.0;
    fftshift(m.values, pad, pad);
    return m;
}

// Frequencies in cycles/pixel on [0, 0.5]; angle_deg empty for radial curves.
struct MtfCurve {
    std::vector<double> frequencies;
    std::vector<double> values;
    std::optional<int> angle_deg;
};

// Slice along a ray from DC at the frequencies k / size, k = 0..size/2; angles are
// measured from +x (columns) towards +y (rows). Values are the exact DTFT of the
// kernel along the ray, so diagonal slices need no interpolation between DFT bins.
inline MtfCurve mtf_slice(const Mtf2d& mtf, int angle_deg) {
    constexpr double s = std::numbers::sqrt2 / 2.0;
    double dx = 0.0, dy = 0.0;
    switch (angle_deg) {
        case 0: dx = 1.0; break;
        case 45: dx = s; dy = s; break;
        case 90: dy = 1.0; break;
        case 135: dx = -s; dy = s; break;
        default: throw DomainError("unsupported MTF slice angle " + std::to_string(angle_deg));
    }
    if (mtf.kernel.size() != static_cast<std::size_t>(kKernelPlane)) throw ConfigError("Mtf2d without its source kernel");
    double dc = 0.0;
    for (double v : mtf.kernel) dc += v;
    const int steps = mtf.size / 2;
    MtfCurve curve;
    curve.angle_deg = angle_deg;
    std::array<Complex, kKernelSize> ex{}, ey{};
    for (int k = 0; k <= steps; ++k) {
        const double f = static_cast<double>(k) / mtf.size;
        for (int i = 0; i < kKernelSize; ++i) {
            ex[i] = std::polar(1.0, -2.0 * std::numbers::pi * f * dx * i);
            ey[i] = std::polar(1.0, -2.0 * std::numbers::pi * f * dy * i);
        }
        Complex acc{};
        for (int y = 0; y < kKernelSize; ++y) {
            Complex row{};
            for (int x = 0; x < kKernelSize; ++x) row += mtf.kernel[static_cast<std::size_t>(y) * kKernelSize + x] * ex[x];
            acc += row * ey[y];
        }
        curve.frequencies.push_back(f);
        curve.values.push_back(std::abs(acc) / dc);
    }
    curve.values[0] = 1.0;
    return curve;
}

inline constexpr std::array<int, 4> kSliceAngles{0, 45, 90, 135};

// First downward crossing of 0.5, linearly interpolated.
inline std::optional<double> mtf50(const MtfCurve& curve) {
    const auto& f = curve.frequencies;
    const auto& v = curve.values;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] >= 0.5 && v[i + 1] < 0.5) {
            const double t = (v[i] - 0.5) / (v[i] - v[i + 1]);
            return f[i] + t * (f[i + 1] - f[i]);
        }
    }
    return std::nullopt;
}

namespace detail {

template <typename Fn>
double trapezoid(const MtfCurve& curve, Fn weight) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < curve.values.size(); ++i) {
        const double f0 = curve.frequencies[i], f1 = curve.frequencies[i + 1];
        acc += 0.5 * (f1 - f0) * (weight(f0) * curve.values[i] + weight(f1) * curve.values[i + 1]);
    }
    return acc;
}

}  // namespace detail

inline double auc(const MtfCurve& curve) {
    return detail::trapezoid(curve, [](double) { return 1.0; });
}

// Band-pass contrast sensitivity f * exp(-c f), with c set so the peak sits at 0.1 cycles/pixel.
inline constexpr double kCsfPeak = 0.1;

inline double csf(double f) noexcept { return f * std::exp(-f / kCsfPeak); }

inline double acutance(const MtfCurve& curve) {
    MtfCurve ones = curve;
    std::fill(ones.values.begin(), ones.values.end(), 1.0);
    const double norm = detail::trapezoid(ones, csf);
    if (!(norm > 0.0)) throw DomainError("acutance of an empty curve");
    return detail::trapezoid(curve, csf) / norm;
}

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, range 255.
// Only positions where the window fits entirely inside the image are averaged.
inline double ssim(const ImageD& a, const ImageD& b) {
    if (!a.same_shape(b)) throw DomainError("ssim: image dimensions differ");
    if (a.channels != 1) return ssim(to_gray(a), to_gray(b));
    constexpr int win = 11;
    constexpr double sigma = 1.5;
    constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    if (a.width < win || a.height < win) throw DomainError("ssim: image smaller than the 11x11 window");

    std::array<double, win> g{};
    double gs = 0.0;
    for (int i = 0; i < win; ++i) {
        const double d = i - win / 2;
        g[i] = std::exp(-d * d / (2 * sigma * sigma));
        gs += g[i];
    }
    for (auto& v : g) v /= gs;

    const int w = a.width, h = a.height;
    const int ow = w - win + 1, oh = h - win + 1;
    // Separable "valid" filtering of x, y, x^2, y^2, xy.
    auto filter = [&](auto value) {
        std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int i = 0; i < win; ++i) acc += g[i] * value(static_cast<std::size_t>(y) * w + x + i);
                tmp[static_cast<std::size_t>(y) * ow + x] = acc;
            }
        std::vector<double> out(static_cast<std::size_t>(ow) * oh);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int i = 0; i < win; ++i) acc += g[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
                out[static_cast<std::size_t>(y) * ow + x] = acc;
            }
        return out;
    };
    const auto& xa = a.data;
    const auto& xb = b.data;
    const auto mu_a = filter([&](std::size_t i) { return xa[i]; });
    const auto mu_b = filter([&](std::size_t i) { return xb[i]; });
    const auto e_aa = filter([&](std::size_t i) { return xa[i] * xa[i]; });
    const auto e_bb = filter([&](std::size_t i) { return xb[i] * xb[i]; });
    const auto e_ab = filter([&](std::size_t i) { return xa[i] * xb[i]; });

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
        const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        total += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

inline double ssim(const Image8& a, const Image8& b) { return ssim(to_gray(a), to_gray(b)); }

// 10 log10(255^2 / MSE); +infinity for identical inputs.
inline double psnr(const ImageD& a, const ImageD& b) {
    if (!a.same_shape(b)) throw DomainError("psnr: image dimensions differ");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

inline double psnr(const Image8& a, const Image8& b) {
    ImageD da(a.width, a.height, a.channels), db(b.width, b.height, b.channels);
    if (!a.same_shape(b)) throw DomainError("psnr: image dimensions differ");
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        da.data[i] = a.data[i];
        db.data[i] = b.data[i];
    }
    return psnr(da, db);
}

enum class ChartKind { slanted_edge, spilled_coins };

struct ChartImage {
    Image8 pixels;  // single channel
    ChartKind kind = ChartKind::slanted_edge;
    std::uint64_t seed = 0;
};

// Dark/light edge through the image center, tilted angle_deg from vertical, light on the right.
// Each pixel takes the exact area fraction of its square lying on the light side.
inline ChartImage gen_slanted_edge(double angle_deg = 5.0, int size = kChartSize) {
    if (angle_deg < 2.0 || angle_deg > 10.0) throw DomainError("slanted edge angle must be in [2, 10] degrees");
    if (size <= 0) throw DomainError("chart size must be positive");
    const double t = std::tan(angle_deg * std::numbers::pi / 180.0);
    const double c = 0.5 * size;
    // Antiderivative of clamp(u, 0, 1).
    auto ramp = [](double u) { return u <= 0.0 ? 0.0 : (u >= 1.0 ? u - 0.5 : 0.5 * u * u); };
    ChartImage chart;
    chart.kind = ChartKind::slanted_edge;
    chart.pixels = Image8(size, size, 1);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            // Light width inside the pixel at row y' is clamp(x + 1 - edge(y')), edge(y') = c + (y' - c) t.
            const double a0 = x + 1 - c + c * t;
            const double coverage = (ramp(a0 - t * y) - ramp(a0 - t * (y + 1))) / t;
            chart.pixels.at(0, y, x) = saturate_u8(255.0 * coverage);
        }
    return chart;
}

struct SpilledCoinsParams {
    double min_radius = 1.0;
    double max_radius = 40.0;
    int min_gray = 50;
    int max_gray = 200;
};

// Dead-leaves chart: disks with radius pdf proportional to r^-3, uniform gray levels,
// stacked until every pixel is covered. Disks are generated front to back and only
// paint pixels still uncovered, which is the same picture as painting back to front.
inline ChartImage gen_spilled_coins(std::uint64_t seed, int size = kChartSize, SpilledCoinsParams params = {}) {
    if (size <= 0) throw DomainError("chart size must be positive");
    CounterRng rng(stream_key(seed, 0x5c0175ULL));
    const double ratio2 = (params.min_radius / params.max_radius) * (params.min_radius / params.max_radius);
    const int levels = params.max_gray - params.min_gray + 1;

    ChartImage chart;
    chart.kind = ChartKind::spilled_coins;
    chart.seed = seed;
    chart.pixels = Image8(size, size, 1);
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(size) * size, 0);
    std::size_t remaining = covered.size();
    while (remaining > 0) {
        const double r = params.min_radius / std::sqrt(1.0 - rng.uniform() * (1.0 - ratio2));
        const double cx = rng.uniform() * size;
        const double cy = rng.uniform() * size;
        const auto gray = static_cast<std::uint8_t>(params.min_gray + std::min(levels - 1, static_cast<int>(rng.uniform() * levels)));
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + r)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const std::size_t idx = static_cast<std::size_t>(y) * size + x;
                if (covered[idx]) continue;
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                if (dx * dx + dy * dy <= r * r) {
                    covered[idx] = 1;
                    chart.pixels.data[idx] = gray;
                    --remaining;
                }
            }
    }
    return chart;
}

// Texture MTF by the cross-spectral method: per radial frequency band,
// sum Re{conj(R) D} / sum |R|^2, DC-normalized and clamped to [0, 1.1].
//
// Both images are analyzed through their even (reflect-101) periodic extension of
// size (2w-2) x (2h-2). Convolving with reflect-101 borders and then extending
// equals circular convolution of the extension for point-symmetric kernels, so the
// cross-spectrum sees no edge discontinuity. That spectrum is real and is computed
// as a DCT-I of the image itself.
class TextureMtfMeter {
public:
    explicit TextureMtfMeter(const ImageD& reference)
        : width_(reference.width), height_(reference.height), ref_(spectrum(gray(reference))) {
        if (width_ < 4 || height_ < 4) throw DomainError("texture_mtf: image too small");
    }

    MtfCurve measure(const ImageD& degraded) const {
        const ImageD deg = gray(degraded);
        if (deg.width != width_ || deg.height != height_) throw DomainError("texture_mtf: image dimensions differ");
        const auto ds = spectrum(deg);
        const int ew = 2 * width_ - 2, eh = 2 * height_ - 2;
        const int n = std::min(width_, height_);
        const int bins = n / 2 + 1;
        std::vector<double> num(bins, 0.0), den(bins, 0.0);
        for (int y = 0; y < height_; ++y) {
            const double fy = static_cast<double>(y) / eh;
            const double my = (y == 0 || y == height_ - 1) ? 1.0 : 2.0;
            for (int x = 0; x < width_; ++x) {
                const double fx = static_cast<double>(x) / ew;
                const long b = std::lround(std::sqrt(fx * fx + fy * fy) * n);
                if (b >= bins) continue;
                // Multiplicity of this frequency in the full extension spectrum.
                const double m = my * ((x == 0 || x == width_ - 1) ? 1.0 : 2.0);
                const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
                num[b] += m * ref_[i] * ds[i];
                den[b] += m * ref_[i] * ref_[i];
            }
        }
        MtfCurve curve;
        for (int b = 0; b < bins; ++b) {
            if (!(den[b] > 0.0))
                throw DomainError("texture_mtf: reference has no energy at frequency band " + std::to_string(b));
            curve.frequencies.push_back(static_cast<double>(b) / n);
            curve.values.push_back(num[b] / den[b]);
        }
        const double dc = curve.values[0];
        if (!(std::abs(dc) > 0.0)) throw DomainError("texture_mtf: degraded image has no DC component");
        for (auto& v : curve.values) v = std::clamp(v / dc, 0.0, 1.1);
        curve.values[0] = 1.0;
        return curve;
    }

private:
    static ImageD gray(const ImageD& img) { return img.channels == 1 ? img : to_gray(img); }

    static RealBuffer spectrum(const ImageD& g) {
        RealBuffer buf(g.data.begin(), g.data.end());
        if (g.width >= 2 && g.height >= 2) dct1_2d(buf, g.height, g.width);
        return buf;
    }

    int width_, height_;
    RealBuffer ref_;
};

inline MtfCurve texture_mtf(const ImageD& reference, const ImageD& degraded) {
    return TextureMtfMeter(reference).measure(degraded);
}

inline MtfCurve texture_mtf(const ChartImage& reference, const ImageD& degraded) {
    return texture_mtf(to_gray(reference.pixels), degraded);
}

}  // namespace opticsbench
