#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "zernike.hpp"

namespace opticsbench {

inline constexpr int kKernelSize = 25;
inline constexpr int kKernelPlane = kKernelSize * kKernelSize;
inline constexpr int kSeverities = 5;

// Numeric values are the on-disk corruption ids of the kernel file format.
enum class Corruption : std::uint8_t {
    astigmatism = 0,
    coma = 1,
    defocus_spherical = 2,
    trefoil = 3,
    disk_baseline = 4,
};

inline constexpr std::array<Corruption, 4> kOpticalCorruptions{
    Corruption::astigmatism, Corruption::coma, Corruption::defocus_spherical, Corruption::trefoil};

// The disk baseline is written to datasets and logs under the common corruption-benchmark name.
constexpr std::string_view corruption_name(Corruption c) noexcept {
    switch (c) {
        case Corruption::astigmatism: return "astigmatism";
        case Corruption::coma: return "coma";
        case Corruption::defocus_spherical: return "defocus_spherical";
        case Corruption::trefoil: return "trefoil";
        case Corruption::disk_baseline: return "defocus_blur";
    }
    return "unknown";
}

inline std::optional<Corruption> parse_corruption(std::string_view name) noexcept {
    for (auto c : {Corruption::astigmatism, Corruption::coma, Corruption::defocus_spherical, Corruption::trefoil,
                   Corruption::disk_baseline})
        if (name == corruption_name(c)) return c;
    if (name == "disk_baseline" || name == "disk") return Corruption::disk_baseline;
    if (name == "defocus_and_spherical" || name == "defocus") return Corruption::defocus_spherical;
    return std::nullopt;
}

// Zernike mode pair of each optical corruption; variant v uses modes[v].
inline std::array<FringeIndex, 2> corruption_modes(Corruption c) {
    switch (c) {
        case Corruption::astigmatism: return {FringeIndex{5}, FringeIndex{6}};
        case Corruption::coma: return {FringeIndex{7}, FringeIndex{8}};
        case Corruption::defocus_spherical: return {FringeIndex{4}, FringeIndex{9}};
        case Corruption::trefoil: return {FringeIndex{10}, FringeIndex{11}};
        case Corruption::disk_baseline: break;
    }
    throw ConfigError("the disk baseline has no Zernike modes");
}

struct KernelLabel {
    Corruption corruption = Corruption::disk_baseline;
    int severity = 1;
    int variant = 0;

    auto operator<=>(const KernelLabel&) const = default;

    std::string to_string() const {
        return std::string(corruption_name(corruption)) + "/s" + std::to_string(severity) + "/v" +
               std::to_string(variant);
    }
};

// 25x25x3 l1-normalized PSF, channel-major then row-major.
struct Kernel {
    std::vector<float> data = std::vector<float>(kChannels * kKernelPlane, 0.0f);
    std::array<double, kChannels> wavelengths_nm{610.0, 530.0, 470.0};
    KernelLabel label{};

    std::span<float> channel(int c) { return {data.data() + c * kKernelPlane, kKernelPlane}; }
    std::span<const float> channel(int c) const { return {data.data() + c * kKernelPlane, kKernelPlane}; }

    float at(int c, int y, int x) const { return data[static_cast<std::size_t>(c * kKernelPlane + y * kKernelSize + x)]; }
    float& at(int c, int y, int x) { return data[static_cast<std::size_t>(c * kKernelPlane + y * kKernelSize + x)]; }

    double channel_sum(int c) const {
        double s = 0.0;
        for (float v : channel(c)) s += v;
        return s;
    }

    bool operator==(const Kernel&) const = default;
};

// Every channel sums to 1 within tol, and every entry is finite and non-negative.
inline bool is_normalized(const Kernel& k, double tol = 1e-6) {
    for (float v : k.data)
        if (!std::isfinite(v) || v < 0.0f) return false;
    for (int c = 0; c < kChannels; ++c)
        if (std::abs(k.channel_sum(c) - 1.0) > tol) return false;
    return true;
}

// Identity kernel: all energy at the center pixel of every channel.
inline Kernel delta_kernel() {
    Kernel k;
    for (int c = 0; c < kChannels; ++c) k.at(c, kKernelSize / 2, kKernelSize / 2) = 1.0f;
    return k;
}

class KernelStack {
public:
    void insert(Kernel k) {
        const KernelLabel key = k.label;
        kernels_.insert_or_assign(key, std::move(k));
    }

    const Kernel& at(const KernelLabel& key) const {
        auto it = kernels_.find(key);
        if (it == kernels_.end()) throw ConfigError("kernel stack has no entry " + key.to_string());
        return it->second;
    }
    const Kernel* find(const KernelLabel& key) const {
        auto it = kernels_.find(key);
        return it == kernels_.end() ? nullptr : &it->second;
    }
    bool contains(const KernelLabel& key) const { return kernels_.count(key) != 0; }

    std::size_t size() const noexcept { return kernels_.size(); }
    bool empty() const noexcept { return kernels_.empty(); }

    // Iteration is ordered by (corruption, severity, variant).
    auto begin() const { return kernels_.begin(); }
    auto end() const { return kernels_.end(); }

    std::vector<KernelLabel> labels() const {
        std::vector<KernelLabel> out;
        out.reserve(kernels_.size());
        for (const auto& [key, k] : kernels_) out.push_back(key);
        return out;
    }

    // Subset with the given severity.
    KernelStack at_severity(int severity) const {
        KernelStack out;
        for (const auto& [key, k] : kernels_)
            if (key.severity == severity) out.insert(k);
        return out;
    }

    // Four optical corruptions x five severities x two variants.
    bool is_complete_benchmark() const {
        for (auto c : kOpticalCorruptions)
            for (int s = 1; s <= kSeverities; ++s)
                for (int v = 0; v < 2; ++v)
                    if (!contains({c, s, v})) return false;
        return true;
    }

    bool operator==(const KernelStack&) const = default;

private:
    std::map<KernelLabel, Kernel> kernels_;
};

}  // namespace opticsbench
