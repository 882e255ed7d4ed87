#pragma once

// Training-time optical augmentation: each image is blurred by a randomly chosen
// kernel and mixed with its clean version by a Beta(alpha, alpha) weight, then
// the whole batch is normalized per channel.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "convolution.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace opticsbench {

// N x 3 x H x W values, sample-major then planar.
struct ImageBatch {
    int count = 0;
    int channels = kChannels;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    ImageBatch() = default;
    ImageBatch(int n, int h, int w, int c = kChannels)
        : count(n), channels(c), height(h), width(w), data(static_cast<std::size_t>(n) * c * h * w, 0.0f) {}

    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
    std::size_t sample_size() const noexcept { return plane_size() * channels; }

    float& at(int i, int c, int y, int x) noexcept {
        return data[i * sample_size() + c * plane_size() + static_cast<std::size_t>(y) * width + x];
    }
    float at(int i, int c, int y, int x) const noexcept {
        return data[i * sample_size() + c * plane_size() + static_cast<std::size_t>(y) * width + x];
    }

    std::span<float> plane(int i, int c) noexcept { return {data.data() + i * sample_size() + c * plane_size(), plane_size()}; }
    std::span<const float> plane(int i, int c) const noexcept {
        return {data.data() + i * sample_size() + c * plane_size(), plane_size()};
    }

    bool operator==(const ImageBatch&) const = default;
};

// ImageNet statistics.
inline constexpr std::array<double, kChannels> kDefaultMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, kChannels> kDefaultStd{0.229, 0.224, 0.225};

struct AugmentConfig {
    KernelStack stack;
    int severity = 3;
    bool all_severities = false;  // draw from every severity in the stack instead of one
    double alpha = 1.0;
    std::array<double, kChannels> mean = kDefaultMean;
    std::array<double, kChannels> stddev = kDefaultStd;
    std::uint64_t seed = 0;
    std::optional<double> forced_p;  // replaces the Beta draw, for limit-case checks
    unsigned threads = 1;

    void validate() const {
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        for (double s : stddev) if (!(s > 0.0)) throw ConfigError("std components must be > 0");
        if (forced_p && !(*forced_p >= 0.0 && *forced_p <= 1.0)) throw ConfigError("forced p must be in [0, 1]");
        if (!all_severities && (severity < 1 || severity > kSeverities)) throw ConfigError("severity must be in 1..5");
    }

    // Kernels eligible for drawing, in stack order.
    std::vector<KernelLabel> keys() const {
        std::vector<KernelLabel> out;
        for (const auto& [label, k] : stack)
            if (all_severities || label.severity == severity) out.push_back(label);
        if (out.empty()) throw ConfigError("no kernels in the augmentation stack for severity " + std::to_string(severity));
        return out;
    }
};

struct MixDraw {
    KernelLabel kernel{};
    double p = 0.0;
};

// Draw for the sample with the given global index; a pure function of (seed, index).
inline MixDraw draw_mix(const AugmentConfig& cfg, const std::vector<KernelLabel>& keys, std::uint64_t index) {
    CounterRng rng(stream_key(cfg.seed, index));
    MixDraw d;
    std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
    d.kernel = keys[pick(rng)];
    if (cfg.forced_p) {
        d.p = *cfg.forced_p;
    } else {
        std::gamma_distribution<double> gamma(cfg.alpha, 1.0);
        const double x = gamma(rng);
        const double y = gamma(rng);
        d.p = x + y > 0.0 ? x / (x + y) : 0.5;
    }
    return d;
}

inline void normalize_batch(ImageBatch& batch, const std::array<double, kChannels>& mean,
                            const std::array<double, kChannels>& stddev) {
    if (batch.channels != kChannels) throw ConfigError("normalize_batch expects 3 channels");
    for (double s : stddev) if (!(s > 0.0)) throw ConfigError("std components must be > 0");
    for (int i = 0; i < batch.count; ++i)
        for (int c = 0; c < kChannels; ++c)
            for (float& v : batch.plane(i, c)) v = static_cast<float>((v - mean[c]) / stddev[c]);
}

inline void denormalize_batch(ImageBatch& batch, const std::array<double, kChannels>& mean,
                              const std::array<double, kChannels>& stddev) {
    for (int i = 0; i < batch.count; ++i)
        for (int c = 0; c < kChannels; ++c)
            for (float& v : batch.plane(i, c)) v = static_cast<float>(v * stddev[c] + mean[c]);
}

// Blurs and mixes every sample, without the final normalization. Sample i uses
// draw index first_index + i. draws, when given, receives the per-sample draws.
inline ImageBatch optics_mix_batch(const ImageBatch& batch, const AugmentConfig& cfg, std::uint64_t first_index = 0,
                                   std::vector<MixDraw>* draws = nullptr) {
    cfg.validate();
    if (batch.channels != kChannels) throw ConfigError("augmentation expects 3-channel batches");
    const auto keys = cfg.keys();
    ImageBatch out = batch;
    std::vector<MixDraw> local(static_cast<std::size_t>(batch.count));
    parallel_for(static_cast<std::size_t>(batch.count), cfg.threads, [&](std::size_t i) {
        const int n = static_cast<int>(i);
        const MixDraw d = draw_mix(cfg, keys, first_index + i);
        local[i] = d;
        const Kernel& k = cfg.stack.at(d.kernel);
        std::vector<double> blurred(batch.plane_size());
        for (int c = 0; c < kChannels; ++c) {
            const auto src = batch.plane(n, c);
            convolve_plane<float>(src, batch.width, batch.height, k.channel(c), blurred);
            auto dst = out.plane(n, c);
            for (std::size_t j = 0; j < blurred.size(); ++j) {
                const double b = std::clamp(blurred[j], 0.0, 1.0);
                dst[j] = static_cast<float>((1.0 - d.p) * src[j] + d.p * b);
            }
        }
    });
    if (draws) *draws = std::move(local);
    return out;
}

inline ImageBatch optics_augment_batch(const ImageBatch& batch, const AugmentConfig& cfg, std::uint64_t first_index = 0,
                                       std::vector<MixDraw>* draws = nullptr) {
    ImageBatch out = optics_mix_batch(batch, cfg, first_index, draws);
    normalize_batch(out, cfg.mean, cfg.stddev);
    return out;
}

// Stateful front end for data loaders: successive batches continue the sample counter.
class Augmentor {
public:
    explicit Augmentor(AugmentConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    ImageBatch operator()(const ImageBatch& batch, std::vector<MixDraw>* draws = nullptr) {
        const std::uint64_t first = next_.fetch_add(static_cast<std::uint64_t>(batch.count));
        return optics_augment_batch(batch, cfg_, first, draws);
    }

    std::uint64_t samples_seen() const noexcept { return next_.load(); }
    const AugmentConfig& config() const noexcept { return cfg_; }

private:
    AugmentConfig cfg_;
    std::atomic<std::uint64_t> next_{0};
};

struct GateDraw {
    std::array<double, 4> q{};  // flat Dirichlet sample
    bool apply_external = false;
    bool apply_optics = false;
};

// q ~ Dirichlet(1,1,1,1); the external augmenter runs with probability q[0] and
// the optical one with probability q[1]. q[2], q[3] carry the remaining mass.
template <typename Rng>
GateDraw pipeline_gate(Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    GateDraw g;
    double sum = 0.0;
    for (auto& v : g.q) {
        v = expo(rng);
        sum += v;
    }
    for (auto& v : g.q) v /= sum;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    g.apply_external = u(rng) < g.q[0];
    g.apply_optics = u(rng) < g.q[1];
    return g;
}

}  // namespace opticsbench
