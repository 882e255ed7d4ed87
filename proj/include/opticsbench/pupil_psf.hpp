#pragma once

// Scalar-diffraction PSF generation: circular pupil with a Zernike phase,
// propagated to the image plane by a 2-D DFT, then cropped and binned to a
// 25x25 l1-normalized kernel per color channel.
//
// Sampling geometry. The pupil of the shortest channel wavelength spans
// pupil_diameter samples of a grid_size grid, so its PSF is sampled at
// Q = grid_size / pupil_diameter samples per lambda*F#. Longer wavelengths get
// a proportionally smaller pupil in samples, which keeps the image-plane sample
// pitch common to all channels and makes their PSFs scale with lambda.
// One image pixel integrates samples_per_pixel x samples_per_pixel PSF samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "kernel.hpp"
#include "zernike.hpp"

namespace opticsbench {

struct PupilGrid {
    int grid_size = 256;
    int pupil_diameter = 128;
    int samples_per_pixel = 5;
    std::vector<std::uint8_t> mask;  // grid_size^2, row-major

    double oversampling() const noexcept { return static_cast<double>(grid_size) / pupil_diameter; }

    std::size_t mask_count() const noexcept {
        std::size_t n = 0;
        for (auto m : mask) n += m;
        return n;
    }
};

namespace detail {

// Pupil sample (r, c) in units of the pupil radius; the circle is centered between
// the four middle samples so the mask is symmetric under both mirror flips.
inline double pupil_coord(int i, int grid_size, double radius) noexcept {
    return (i - 0.5 * (grid_size - 1)) / radius;
}

}  // namespace detail

inline PupilGrid build_pupil(int grid_size = 256, int pupil_diameter = 128, int samples_per_pixel = 5) {
    if (grid_size <= 0 || pupil_diameter <= 0 || grid_size % 2 != 0 || pupil_diameter % 2 != 0)
        throw ConfigError("grid size and pupil diameter must be positive even integers");
    if (grid_size < 2 * pupil_diameter)
        throw ConfigError("oversampling Q = " + std::to_string(static_cast<double>(grid_size) / pupil_diameter) +
                          " < 2 would alias the PSF");
    if (samples_per_pixel < 1) throw ConfigError("samples_per_pixel must be >= 1");
    if (kKernelSize * samples_per_pixel > grid_size)
        throw ConfigError("kernel window exceeds the PSF grid");

    PupilGrid p;
    p.grid_size = grid_size;
    p.pupil_diameter = pupil_diameter;
    p.samples_per_pixel = samples_per_pixel;
    p.mask.assign(static_cast<std::size_t>(grid_size) * grid_size, 0);
    const double radius = 0.5 * pupil_diameter;
    for (int r = 0; r < grid_size; ++r) {
        const double y = detail::pupil_coord(r, grid_size, radius);
        for (int c = 0; c < grid_size; ++c) {
            const double x = detail::pupil_coord(c, grid_size, radius);
            p.mask[static_cast<std::size_t>(r) * grid_size + c] = (x * x + y * y <= 1.0) ? 1 : 0;
        }
    }
    return p;
}

// Pupil diameter in samples used for one channel of spec.
inline double channel_pupil_diameter(const PupilGrid& pupil, const ZernikeSpec& spec, int channel) {
    const double shortest = *std::min_element(spec.wavelengths_nm.begin(), spec.wavelengths_nm.end());
    return pupil.pupil_diameter * shortest / spec.wavelengths_nm.at(channel);
}

// |DFT{Circ * exp(-i 2pi/lambda W)}|^2 for one channel, DC at (N/2, N/2).
// Scaled by 1/N^2 so the total energy equals the number of open pupil samples.
inline std::vector<double> psf_mono(const PupilGrid& pupil, const ZernikeSpec& spec, int channel) {
    spec.validate();
    if (channel < 0 || channel >= kChannels) throw DomainError("channel out of range");
    const int n = pupil.grid_size;
    const double lambda = spec.wavelengths_nm[channel];
    const double radius = 0.5 * channel_pupil_diameter(pupil, spec, channel);
    const bool reference = radius * 2.0 == pupil.pupil_diameter;

    ComplexBuffer field(static_cast<std::size_t>(n) * n, Complex{0.0, 0.0});
    for (int r = 0; r < n; ++r) {
        const double y = detail::pupil_coord(r, n, radius);
        if (std::abs(y) > 1.0) continue;
        for (int c = 0; c < n; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * n + c;
            const double x = detail::pupil_coord(c, n, radius);
            const bool open = reference ? pupil.mask[idx] != 0 : (x * x + y * y <= 1.0);
            if (!open) continue;
            const double phase = -2.0 * std::numbers::pi / lambda * wavefront(spec, channel, x, y);
            field[idx] = std::polar(1.0, phase);
        }
    }
    fft2d(field, n, n);

    const double scale = 1.0 / (static_cast<double>(n) * n);
    std::vector<double> psf(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) psf[i] = std::norm(field[i]) * scale;
    fftshift(psf, n, n);
    return psf;
}

struct CropResult {
    std::vector<double> plane;     // size x size, sums to 1
    double energy_fraction = 0.0;  // share of the raw energy inside the window
};

// Crops a size x size pixel window (each pixel binning samples_per_pixel^2 raw
// samples) centered on the intensity centroid of a DC-centered raw PSF, then
// divides by the window sum. Indices wrap, as the raw PSF is DFT-periodic.
inline CropResult crop_normalize(std::span<const double> raw, int grid_size, int size = kKernelSize,
                                 int samples_per_pixel = 1) {
    if (size <= 0 || size % 2 == 0) throw ConfigError("crop size must be odd and positive");
    if (raw.size() != static_cast<std::size_t>(grid_size) * grid_size) throw ConfigError("raw PSF has wrong size");
    const int span = size * samples_per_pixel;
    if (span > grid_size) throw ConfigError("crop window larger than the PSF grid");

    double total = 0.0, mx = 0.0, my = 0.0;
    for (int r = 0; r < grid_size; ++r)
        for (int c = 0; c < grid_size; ++c) {
            const double v = raw[static_cast<std::size_t>(r) * grid_size + c];
            total += v;
            mx += v * c;
            my += v * r;
        }
    if (!(total > 0.0)) throw DegenerateKernelError("PSF has no energy");
    const double cx = mx / total;
    const double cy = my / total;
    const long x0 = std::lround(cx - 0.5 * (span - 1));
    const long y0 = std::lround(cy - 0.5 * (span - 1));

    auto wrap = [grid_size](long i) {
        long m = i % grid_size;
        return static_cast<int>(m < 0 ? m + grid_size : m);
    };

    CropResult out;
    out.plane.assign(static_cast<std::size_t>(size) * size, 0.0);
    double sum = 0.0;
    for (int py = 0; py < size; ++py)
        for (int px = 0; px < size; ++px) {
            double acc = 0.0;
            for (int sy = 0; sy < samples_per_pixel; ++sy) {
                const int r = wrap(y0 + py * samples_per_pixel + sy);
                for (int sx = 0; sx < samples_per_pixel; ++sx) {
                    const int c = wrap(x0 + px * samples_per_pixel + sx);
                    acc += raw[static_cast<std::size_t>(r) * grid_size + c];
                }
            }
            out.plane[static_cast<std::size_t>(py) * size + px] = acc;
            sum += acc;
        }
    if (sum < 1e-12) throw DegenerateKernelError("kernel window holds no energy");
    for (auto& v : out.plane) v /= sum;
    out.energy_fraction = sum / total;
    return out;
}

inline std::string channel_name(int c) {
    static constexpr std::array<const char*, kChannels> names{"red", "green", "blue"};
    return "channel " + std::to_string(c) + " (" + names.at(c) + ")";
}

// Full RGB kernel; energy_fraction, when given, receives the per-channel window energy share.
inline Kernel psf_rgb(const ZernikeSpec& spec, const PupilGrid& pupil,
                      std::array<double, kChannels>* energy_fraction = nullptr) {
    Kernel k;
    k.wavelengths_nm = spec.wavelengths_nm;
    for (int c = 0; c < kChannels; ++c) {
        CropResult crop;
        try {
            const auto raw = psf_mono(pupil, spec, c);
            crop = crop_normalize(raw, pupil.grid_size, kKernelSize, pupil.samples_per_pixel);
        } catch (const DegenerateKernelError& e) {
            throw DegenerateKernelError(channel_name(c) + ": " + e.what());
        }
        auto dst = k.channel(c);
        for (int i = 0; i < kKernelPlane; ++i) dst[i] = static_cast<float>(crop.plane[i]);
        if (energy_fraction) (*energy_fraction)[c] = crop.energy_fraction;
    }
    return k;
}

struct DiskParams {
    double radius;
    double alias_blur;
};

// Disk radii and anti-alias blur of the common defocus-blur corruption, severities 1..5.
inline constexpr std::array<DiskParams, kSeverities> kDiskSeverities{{
    {3.0, 0.1}, {4.0, 0.5}, {6.0, 0.5}, {8.0, 0.5}, {10.0, 0.5},
}};

// Uniform disk rasterized on the kernel grid, smoothed by a truncated Gaussian
// (3 taps up to radius 8, 5 taps beyond), then l1-normalized on all channels.
inline Kernel disk_kernel(double radius, double alias_blur) {
    if (!(radius >= 1.0)) throw DomainError("disk radius must be >= 1");
    if (!(alias_blur >= 0.0)) throw DomainError("alias blur must be >= 0");
    constexpr int half = kKernelSize / 2;
    if (radius > half) throw ConfigError("disk radius exceeds the 25x25 kernel support");

    std::vector<double> plane(kKernelPlane, 0.0);
    for (int y = -half; y <= half; ++y)
        for (int x = -half; x <= half; ++x)
            if (x * x + y * y <= radius * radius) plane[(y + half) * kKernelSize + (x + half)] = 1.0;

    if (alias_blur > 0.0) {
        const int taps = radius <= 8.0 ? 3 : 5;
        const int r = taps / 2;
        std::vector<double> g(taps);
        double gs = 0.0;
        for (int i = 0; i < taps; ++i) {
            const double d = i - r;
            g[i] = std::exp(-d * d / (2.0 * alias_blur * alias_blur));
            gs += g[i];
        }
        for (auto& v : g) v /= gs;
        std::vector<double> tmp(kKernelPlane, 0.0);
        for (int y = 0; y < kKernelSize; ++y)
            for (int x = 0; x < kKernelSize; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    const int xx = x + i;
                    if (xx >= 0 && xx < kKernelSize) acc += g[i + r] * plane[y * kKernelSize + xx];
                }
                tmp[y * kKernelSize + x] = acc;
            }
        for (int y = 0; y < kKernelSize; ++y)
            for (int x = 0; x < kKernelSize; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    const int yy = y + i;
                    if (yy >= 0 && yy < kKernelSize) acc += g[i + r] * tmp[yy * kKernelSize + x];
                }
                plane[y * kKernelSize + x] = acc;
            }
    }

    double sum = 0.0;
    for (double v : plane) sum += v;
    Kernel k;
    for (int c = 0; c < kChannels; ++c) {
        auto dst = k.channel(c);
        for (int i = 0; i < kKernelPlane; ++i) dst[i] = static_cast<float>(plane[i] / sum);
    }
    k.label = {Corruption::disk_baseline, 1, 0};
    return k;
}

inline Kernel disk_baseline_kernel(int severity) {
    if (severity < 1 || severity > kSeverities) throw DomainError("severity must be in 1..5");
    const auto p = kDiskSeverities[static_cast<std::size_t>(severity - 1)];
    Kernel k = disk_kernel(p.radius, p.alias_blur);
    k.label = {Corruption::disk_baseline, severity, 0};
    return k;
}

}  // namespace opticsbench
