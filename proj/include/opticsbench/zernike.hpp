#pragma once

// Zernike Fringe polynomials 1..12 (unnormalized, value 1 at the pupil edge)
// and wavefront assembly from per-channel coefficient vectors.

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "error.hpp"

namespace opticsbench {

inline constexpr int kMaxFringeIndex = 12;
inline constexpr int kChannels = 3;

class FringeIndex {
public:
    constexpr explicit FringeIndex(int j) : j_(j) {
        if (j < 1 || j > kMaxFringeIndex) throw DomainError("Fringe index out of range [1,12]: " + std::to_string(j));
    }
    constexpr int value() const noexcept { return j_; }
    // Modes 4..11 make up the benchmark set; tilt and piston are excluded.
    constexpr bool in_benchmark_set() const noexcept { return j_ >= 4 && j_ <= 11; }
    constexpr auto operator<=>(const FringeIndex&) const = default;

private:
    int j_;
};

struct RadialAzimuthalOrder {
    int n;
    int m;  // signed: m > 0 cosine term, m < 0 sine term
};

// Fixed Fringe ordering table.
constexpr RadialAzimuthalOrder fringe_to_nm(FringeIndex j) noexcept {
    constexpr std::array<RadialAzimuthalOrder, kMaxFringeIndex> table{{
        {0, 0}, {1, 1}, {1, -1}, {2, 0}, {2, 2}, {2, -2},
        {3, 1}, {3, -1}, {4, 0}, {3, 3}, {3, -3}, {4, 2},
    }};
    return table[static_cast<std::size_t>(j.value() - 1)];
}

constexpr std::string_view fringe_name(FringeIndex j) noexcept {
    constexpr std::array<std::string_view, kMaxFringeIndex> names{
        "piston",          "tilt x",           "tilt y",          "defocus",
        "oblique astigmatism", "vertical astigmatism", "horizontal coma", "vertical coma",
        "spherical",       "oblique trefoil",  "vertical trefoil", "secondary vertical astigmatism",
    };
    return names[static_cast<std::size_t>(j.value() - 1)];
}

namespace detail {

// Assumes rho already validated.
inline double fringe_unchecked(int j, double rho, double theta) noexcept {
    const double r2 = rho * rho;
    switch (j) {
        case 1: return 1.0;
        case 2: return rho * std::cos(theta);
        case 3: return rho * std::sin(theta);
        case 4: return 2.0 * r2 - 1.0;
        case 5: return r2 * std::cos(2.0 * theta);
        case 6: return r2 * std::sin(2.0 * theta);
        case 7: return (3.0 * r2 - 2.0) * rho * std::cos(theta);
        case 8: return (3.0 * r2 - 2.0) * rho * std::sin(theta);
        case 9: return 6.0 * r2 * r2 - 6.0 * r2 + 1.0;
        case 10: return r2 * rho * std::cos(3.0 * theta);
        case 11: return r2 * rho * std::sin(3.0 * theta);
        case 12: return (4.0 * r2 - 3.0) * r2 * std::cos(2.0 * theta);
        default: return 0.0;
    }
}

// Points computed from a unit-disk mask may overshoot rho = 1 by a few ulps.
inline double checked_rho(double rho) {
    constexpr double slack = 1e-12;
    if (!(rho >= 0.0) || rho > 1.0 + slack) throw DomainError("rho outside [0,1]: " + std::to_string(rho));
    return rho > 1.0 ? 1.0 : rho;
}

}  // namespace detail

inline double eval_fringe(FringeIndex j, double rho, double theta) {
    return detail::fringe_unchecked(j.value(), detail::checked_rho(rho), theta);
}

// Per-channel Fringe coefficients in waves of that channel's wavelength.
struct ZernikeSpec {
    // Index 0 unused so that coefficients[c][j] reads naturally.
    std::array<std::array<double, kMaxFringeIndex + 1>, kChannels> coefficients{};
    std::array<double, kChannels> wavelengths_nm{610.0, 530.0, 470.0};

    double coefficient(int channel, FringeIndex j) const { return coefficients.at(channel)[j.value()]; }

    ZernikeSpec& set(int channel, FringeIndex j, double waves) {
        if (!std::isfinite(waves)) throw DomainError("non-finite Zernike coefficient");
        coefficients.at(channel)[j.value()] = waves;
        return *this;
    }

    // Same wave count on every channel.
    ZernikeSpec& set_all(FringeIndex j, double waves) {
        for (int c = 0; c < kChannels; ++c) set(c, j, waves);
        return *this;
    }

    bool is_zero(int channel) const {
        for (double a : coefficients.at(channel))
            if (a != 0.0) return false;
        return true;
    }

    void validate() const {
        for (double w : wavelengths_nm)
            if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("wavelengths must be positive and finite");
        for (const auto& ch : coefficients)
            for (double a : ch)
                if (!std::isfinite(a)) throw DomainError("non-finite Zernike coefficient");
    }

    bool operator==(const ZernikeSpec&) const = default;
};

// Sum of A_j * Z_j at (rho, theta) for one channel, in waves.
inline double wavefront_waves_polar(const ZernikeSpec& spec, int channel, double rho, double theta) {
    rho = detail::checked_rho(rho);
    const auto& a = spec.coefficients.at(channel);
    double w = 0.0;
    for (int j = 1; j <= kMaxFringeIndex; ++j)
        if (a[j] != 0.0) w += a[j] * detail::fringe_unchecked(j, rho, theta);
    return w;
}

// Optical path difference at pupil point (x, y), in the units of the channel wavelength (nm).
inline double wavefront(const ZernikeSpec& spec, int channel, double x, double y) {
    if (channel < 0 || channel >= kChannels) throw DomainError("channel out of range");
    const double r2 = x * x + y * y;
    if (r2 > 1.0 + 1e-12) throw DomainError("point outside the unit pupil");
    return spec.wavelengths_nm[channel] * wavefront_waves_polar(spec, channel, std::sqrt(r2), std::atan2(y, x));
}

}  // namespace opticsbench
