#pragma once

// Matches Zernike kernels to the disk baseline in optical strength: for each
// (corruption, severity, variant) a grid of coefficient offsets around an initial
// guess is scored against the baseline by PSF-level and chart-level metrics and
// the candidate with the smallest composite distance wins.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "convolution.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "pupil_psf.hpp"
#include "quality_metrics.hpp"
#include "zernike.hpp"

namespace opticsbench {

using MetricWeights = std::map<std::string, double>;

// Uniform weight per metric family (PSF level, slanted edge, spilled coins),
// split evenly over the terms of each family.
inline MetricWeights default_metric_weights() {
    constexpr double psf = 1.0 / 3.0 / 10.0;  // 4 MTF50 + 4 AUC slices, SSIM, PSNR
    constexpr double edge = 1.0 / 3.0 / 2.0;
    constexpr double coins = 1.0 / 3.0 / 4.0;
    return {
        {"mtf50", psf},      {"auc", psf},        {"kernel_ssim", psf}, {"kernel_psnr", psf},
        {"edge_ssim", edge}, {"edge_psnr", edge}, {"coins_ssim", coins}, {"coins_psnr", coins},
        {"acutance", coins}, {"texture_mtf50", coins},
    };
}

struct MatchConfig {
    std::map<int, double> initial_guess;  // severity -> waves; missing severities are calibrated
    double step = 0.1;
    double search_half_width = 0.5;
    MetricWeights metric_weights = default_metric_weights();
    int metric_channel = 1;        // channel used by PSF-level metrics and the charts
    bool joint_secondary = false;  // also sweep the partner mode of the pair around 0
    std::array<double, kChannels> wavelengths_nm{610.0, 530.0, 470.0};
    double edge_angle_deg = 5.0;
    std::uint64_t chart_seed = 0;
    unsigned threads = 1;

    int half_steps() const { return static_cast<int>(std::lround(search_half_width / step)); }

    void validate() const {
        if (!(step > 0.0)) throw ConfigError("match step must be > 0");
        if (search_half_width < 0.0) throw ConfigError("search half width must be >= 0");
        const double k = search_half_width / step;
        if (std::abs(k - std::round(k)) > 1e-9) throw ConfigError("search half width must be a multiple of the step");
        if (metric_channel < 0 || metric_channel >= kChannels) throw ConfigError("metric channel out of range");
        for (const auto& [name, w] : metric_weights)
            if (!(w >= 0.0)) throw ConfigError("metric weight must be >= 0: " + name);
    }
};

// Charts and their FFT convolvers, shared by all candidates.
struct MatchCharts {
    ChartImage edge;
    ChartImage coins;
    ImageD coins_gray;
    FftConvolver edge_conv;
    FftConvolver coins_conv;
    TextureMtfMeter coins_texture;

    MatchCharts(double edge_angle_deg, std::uint64_t seed)
        : edge(gen_slanted_edge(edge_angle_deg)),
          coins(gen_spilled_coins(seed)),
          coins_gray(to_gray(coins.pixels)),
          edge_conv(to_gray(edge.pixels)),
          coins_conv(coins_gray),
          coins_texture(coins_gray) {}
};

// Everything the distance needs from one kernel.
struct KernelMeasurement {
    std::vector<double> plane;  // metric channel, 25x25
    std::array<std::optional<double>, 4> slice_mtf50{};
    std::array<double, 4> slice_auc{};
    ImageD edge_blurred;
    ImageD coins_blurred;
    double acutance = 0.0;
    std::optional<double> texture_mtf50;
};

inline KernelMeasurement measure_kernel(const Kernel& k, const MatchCharts& charts, int channel) {
    KernelMeasurement m;
    const auto ch = k.channel(channel);
    m.plane.assign(ch.begin(), ch.end());
    const Mtf2d mtf = mtf2d(ch);
    for (std::size_t i = 0; i < kSliceAngles.size(); ++i) {
        const auto curve = mtf_slice(mtf, kSliceAngles[i]);
        m.slice_mtf50[i] = mtf50(curve);
        m.slice_auc[i] = auc(curve);
    }
    m.edge_blurred = charts.edge_conv.convolve(ch);
    m.coins_blurred = charts.coins_conv.convolve(ch);
    const auto tex = charts.coins_texture.measure(m.coins_blurred);
    m.acutance = acutance(tex);
    m.texture_mtf50 = mtf50(tex);
    return m;
}

struct MetricTerm {
    std::string metric;
    std::optional<int> angle_deg;
    double candidate = 0.0;
    double baseline = 0.0;
    double distance = 0.0;
    double weight = 0.0;
};

struct MatchReport {
    KernelLabel label{};
    ZernikeSpec spec;                 // chosen coefficients, all channels
    int primary_mode = 0;             // Fringe index swept for this variant
    int secondary_mode = 0;           // partner mode; nonzero coefficient only with joint sweeps
    double primary_coefficient = 0.0;
    double secondary_coefficient = 0.0;
    double initial_guess = 0.0;
    double offset = 0.0;              // primary_coefficient - initial_guess
    std::vector<MetricTerm> terms;
    double composite = 0.0;
    std::vector<std::string> flags;

    const MetricTerm* term(std::string_view metric, std::optional<int> angle = std::nullopt) const {
        for (const auto& t : terms)
            if (t.metric == metric && t.angle_deg == angle) return &t;
        return nullptr;
    }
};

namespace detail {

inline double relative_diff(double c, double b) {
    if (b == 0.0) return c == 0.0 ? 0.0 : std::abs(c);
    return std::abs(c - b) / std::abs(b);
}

// Similarity scores turned into distances that vanish for identical inputs.
inline double ssim_distance(double s) { return std::max(0.0, 1.0 - s); }
inline double psnr_distance(double db) { return std::isinf(db) ? 0.0 : std::pow(10.0, -db / 20.0); }

inline ImageD scaled_plane(const std::vector<double>& p, double scale) {
    ImageD img(kKernelSize, kKernelSize, 1);
    for (std::size_t i = 0; i < p.size(); ++i) img.data[i] = p[i] * scale;
    return img;
}

inline double weight_of(const MetricWeights& w, const std::string& metric) {
    auto it = w.find(metric);
    return it == w.end() ? 0.0 : it->second;
}

}  // namespace detail

// Metric terms and composite distance between two measured kernels.
inline MatchReport kernel_distance(const KernelMeasurement& cand, const KernelMeasurement& base,
                                   const MetricWeights& weights) {
    MatchReport r;
    auto add = [&](std::string metric, std::optional<int> angle, double c, double b, double d) {
        r.terms.push_back({metric, angle, c, b, d, detail::weight_of(weights, metric)});
    };

    for (std::size_t i = 0; i < kSliceAngles.size(); ++i) {
        const int angle = kSliceAngles[i];
        const auto& c = cand.slice_mtf50[i];
        const auto& b = base.slice_mtf50[i];
        if (c && b) {
            add("mtf50", angle, *c, *b, detail::relative_diff(*c, *b));
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            add("mtf50", angle, c.value_or(nan), b.value_or(nan), 0.0);
            r.terms.back().weight = 0.0;
            r.flags.push_back("no MTF50 crossing at " + std::to_string(angle) + " deg; AUC only");
        }
    }
    for (std::size_t i = 0; i < kSliceAngles.size(); ++i)
        add("auc", kSliceAngles[i], cand.slice_auc[i], base.slice_auc[i],
            detail::relative_diff(cand.slice_auc[i], base.slice_auc[i]));

    // Kernel arrays compared as images after scaling both to a common peak of 255.
    const double peak = std::max(*std::max_element(cand.plane.begin(), cand.plane.end()),
                                 *std::max_element(base.plane.begin(), base.plane.end()));
    const double scale = peak > 0.0 ? 255.0 / peak : 1.0;
    const auto kc = detail::scaled_plane(cand.plane, scale);
    const auto kb = detail::scaled_plane(base.plane, scale);
    const double k_ssim = ssim(kc, kb);
    const double k_psnr = psnr(kc, kb);
    add("kernel_ssim", std::nullopt, k_ssim, 1.0, detail::ssim_distance(k_ssim));
    add("kernel_psnr", std::nullopt, k_psnr, std::numeric_limits<double>::infinity(), detail::psnr_distance(k_psnr));

    const double e_ssim = ssim(cand.edge_blurred, base.edge_blurred);
    const double e_psnr = psnr(cand.edge_blurred, base.edge_blurred);
    add("edge_ssim", std::nullopt, e_ssim, 1.0, detail::ssim_distance(e_ssim));
    add("edge_psnr", std::nullopt, e_psnr, std::numeric_limits<double>::infinity(), detail::psnr_distance(e_psnr));

    const double c_ssim = ssim(cand.coins_blurred, base.coins_blurred);
    const double c_psnr = psnr(cand.coins_blurred, base.coins_blurred);
    add("coins_ssim", std::nullopt, c_ssim, 1.0, detail::ssim_distance(c_ssim));
    add("coins_psnr", std::nullopt, c_psnr, std::numeric_limits<double>::infinity(), detail::psnr_distance(c_psnr));

    add("acutance", std::nullopt, cand.acutance, base.acutance, detail::relative_diff(cand.acutance, base.acutance));
    if (cand.texture_mtf50 && base.texture_mtf50) {
        add("texture_mtf50", std::nullopt, *cand.texture_mtf50, *base.texture_mtf50,
            detail::relative_diff(*cand.texture_mtf50, *base.texture_mtf50));
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        add("texture_mtf50", std::nullopt, cand.texture_mtf50.value_or(nan), base.texture_mtf50.value_or(nan), 0.0);
        r.terms.back().weight = 0.0;
        r.flags.push_back("no texture MTF50 crossing");
    }

    r.composite = 0.0;
    for (const auto& t : r.terms) r.composite += t.weight * t.distance;
    return r;
}

inline MatchReport kernel_distance(const Kernel& candidate, const Kernel& baseline, const MatchCharts& charts,
                                   const MatchConfig& cfg = {}) {
    if (!is_normalized(candidate) || !is_normalized(baseline)) throw ConfigError("kernel_distance expects normalized kernels");
    return kernel_distance(measure_kernel(candidate, charts, cfg.metric_channel),
                           measure_kernel(baseline, charts, cfg.metric_channel), cfg.metric_weights);
}

// Mean of the slice MTF50 values that exist; nullopt when no slice crosses 0.5.
inline std::optional<double> mean_slice_mtf50(std::span<const float> plane) {
    const Mtf2d mtf = mtf2d(plane);
    double sum = 0.0;
    int n = 0;
    for (int a : kSliceAngles)
        if (auto v = mtf50(mtf_slice(mtf, a))) {
            sum += *v;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

namespace detail {

inline ZernikeSpec candidate_spec(const MatchConfig& cfg, FringeIndex primary, double a, FringeIndex secondary, double b) {
    ZernikeSpec spec;
    spec.wavelengths_nm = cfg.wavelengths_nm;
    spec.set_all(primary, a);
    if (b != 0.0) spec.set_all(secondary, b);
    return spec;
}

inline std::optional<double> channel_mtf50(const PupilGrid& pupil, const ZernikeSpec& spec, int channel) {
    const auto raw = psf_mono(pupil, spec, channel);
    const auto crop = crop_normalize(raw, pupil.grid_size, kKernelSize, pupil.samples_per_pixel);
    std::vector<float> plane(crop.plane.begin(), crop.plane.end());
    return mean_slice_mtf50(plane);
}

}  // namespace detail

// Coefficient of the given mode whose mean slice MTF50 equals the baseline's,
// found by a coarse scan plus bisection and snapped to the step grid.
inline double calibrate_initial_guess(FringeIndex mode, const Kernel& baseline, const MatchConfig& cfg,
                                      const PupilGrid& pupil) {
    const auto target = mean_slice_mtf50(baseline.channel(cfg.metric_channel));
    if (!target) throw MatchError("baseline kernel has no MTF50 crossing");
    auto sharper = [&](double a) {
        const auto spec = detail::candidate_spec(cfg, mode, a, mode, 0.0);
        const auto m = detail::channel_mtf50(pupil, spec, cfg.metric_channel);
        return !m || *m > *target;
    };
    constexpr double coarse = 0.25;
    constexpr double limit = 10.0;
    double lo = 0.0, hi = coarse;
    while (hi <= limit && sharper(hi)) {
        lo = hi;
        hi += coarse;
    }
    if (hi > limit) return std::round(limit / cfg.step) * cfg.step;
    for (int i = 0; i < 12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (sharper(mid) ? lo : hi) = mid;
    }
    return std::round(0.5 * (lo + hi) / cfg.step) * cfg.step;
}

// Grid search for one (corruption, severity, variant) cell against its baseline.
inline MatchReport match_kernel(Corruption corruption, int severity, int variant, const Kernel& baseline,
                                const MatchConfig& cfg, const PupilGrid& pupil, const MatchCharts& charts) {
    cfg.validate();
    if (corruption == Corruption::disk_baseline) throw MatchError("cannot match the baseline against itself by Zernike modes");
    if (severity < 1 || severity > kSeverities) throw MatchError("severity out of range");
    if (variant != 0 && variant != 1) throw MatchError("variant must be 0 or 1");
    const auto modes = corruption_modes(corruption);
    const FringeIndex primary = modes[static_cast<std::size_t>(variant)];
    const FringeIndex secondary = modes[static_cast<std::size_t>(1 - variant)];

    double guess = 0.0;
    if (auto it = cfg.initial_guess.find(severity); it != cfg.initial_guess.end())
        guess = it->second;
    else
        guess = calibrate_initial_guess(primary, baseline, cfg, pupil);
    const long guess_idx = std::lround(guess / cfg.step);
    const int k = cfg.half_steps();

    struct Candidate {
        double a, b;
        std::optional<MatchReport> report;
    };
    std::vector<Candidate> grid;
    for (int i = -k; i <= k; ++i) {
        const double a = static_cast<double>(guess_idx + i) * cfg.step;
        if (cfg.joint_secondary) {
            for (int j = -k; j <= k; ++j) grid.push_back({a, static_cast<double>(j) * cfg.step, std::nullopt});
        } else {
            grid.push_back({a, 0.0, std::nullopt});
        }
    }
    if (grid.empty()) throw MatchError("empty search grid");

    const auto base = measure_kernel(baseline, charts, cfg.metric_channel);
    parallel_for(grid.size(), cfg.threads, [&](std::size_t i) {
        const auto spec = detail::candidate_spec(cfg, primary, grid[i].a, secondary, grid[i].b);
        try {
            const Kernel kern = psf_rgb(spec, pupil);
            grid[i].report = kernel_distance(measure_kernel(kern, charts, cfg.metric_channel), base, cfg.metric_weights);
        } catch (const DegenerateKernelError&) {
            // left empty; skipped below
        }
    });

    // Smallest composite; ties go to the smaller total magnitude, then to the
    // candidate carrying more of it on the lower-index mode, then grid order.
    const Candidate* best = nullptr;
    auto better = [&](const Candidate& x, const Candidate& y) {
        if (x.report->composite != y.report->composite) return x.report->composite < y.report->composite;
        const double mx = std::abs(x.a) + std::abs(x.b), my = std::abs(y.a) + std::abs(y.b);
        if (mx != my) return mx < my;
        const bool primary_lower = primary.value() < secondary.value();
        const double lx = primary_lower ? std::abs(x.a) : std::abs(x.b);
        const double ly = primary_lower ? std::abs(y.a) : std::abs(y.b);
        return lx > ly;
    };
    for (const auto& c : grid) {
        if (!c.report) continue;
        if (!best || better(c, *best)) best = &c;
    }
    if (!best) throw MatchError("all candidates degenerate for " + KernelLabel{corruption, severity, variant}.to_string());

    MatchReport r = *best->report;
    r.label = {corruption, severity, variant};
    r.spec = detail::candidate_spec(cfg, primary, best->a, secondary, best->b);
    r.primary_mode = primary.value();
    r.secondary_mode = secondary.value();
    r.primary_coefficient = best->a;
    r.secondary_coefficient = best->b;
    r.initial_guess = static_cast<double>(guess_idx) * cfg.step;
    r.offset = best->a - r.initial_guess;
    if (k > 0 && std::abs(r.offset) >= cfg.search_half_width - 0.5 * cfg.step)
        r.flags.push_back("optimum on the search boundary");
    return r;
}

inline MatchReport match_kernel(Corruption corruption, int severity, int variant, const Kernel& baseline,
                                const MatchConfig& cfg, const PupilGrid& pupil) {
    const MatchCharts charts(cfg.edge_angle_deg, cfg.chart_seed);
    return match_kernel(corruption, severity, variant, baseline, cfg, pupil, charts);
}

// Copy of spec with the blue channel's coefficients zeroed (red/green-only blur).
inline ZernikeSpec rg_variant(ZernikeSpec spec) {
    spec.coefficients[2].fill(0.0);
    return spec;
}

struct BenchmarkStack {
    KernelStack stack;      // 40 optical kernels
    KernelStack rg_stack;   // same coefficients, blue channel unaberrated
    KernelStack baselines;  // disk kernels per severity
    std::vector<MatchReport> reports;
};

inline BenchmarkStack build_benchmark_stack(const MatchConfig& cfg, const PupilGrid& pupil) {
    cfg.validate();
    const MatchCharts charts(cfg.edge_angle_deg, cfg.chart_seed);

    BenchmarkStack out;
    for (int s = 1; s <= kSeverities; ++s) {
        Kernel disk = disk_baseline_kernel(s);
        disk.wavelengths_nm = cfg.wavelengths_nm;
        out.baselines.insert(std::move(disk));
    }

    std::vector<KernelLabel> cells;
    for (auto c : kOpticalCorruptions)
        for (int s = 1; s <= kSeverities; ++s)
            for (int v = 0; v < 2; ++v) cells.push_back({c, s, v});

    struct CellResult {
        MatchReport report;
        Kernel kernel, rg_kernel;
    };
    std::vector<CellResult> results(cells.size());
    MatchConfig inner = cfg;
    inner.threads = 1;
    parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
        const auto& cell = cells[i];
        try {
            auto& res = results[i];
            res.report = match_kernel(cell.corruption, cell.severity, cell.variant,
                                      out.baselines.at({Corruption::disk_baseline, cell.severity, 0}), inner, pupil, charts);
            res.kernel = psf_rgb(res.report.spec, pupil);
            res.kernel.label = cell;
            res.rg_kernel = psf_rgb(rg_variant(res.report.spec), pupil);
            res.rg_kernel.label = cell;
        } catch (const Error& e) {
            throw MatchError("matching failed for " + std::string(corruption_name(cell.corruption)) + " severity " +
                             std::to_string(cell.severity) + ": " + e.what());
        }
    });
    for (auto& res : results) {
        out.stack.insert(std::move(res.kernel));
        out.rg_stack.insert(std::move(res.rg_kernel));
        out.reports.push_back(std::move(res.report));
    }
    return out;
}

// One row per metric term, then coefficient rows and a composite summary row per report.
inline void write_match_reports(std::ostream& os, const std::vector<MatchReport>& reports) {
    os << "corruption,severity,variant,metric,angle,candidate,baseline,distance,weight\n";
    for (const auto& r : reports) {
        const std::string prefix = std::string(corruption_name(r.label.corruption)) + "," +
                                   std::to_string(r.label.severity) + "," + std::to_string(r.label.variant) + ",";
        for (const auto& t : r.terms)
            os << prefix << t.metric << "," << (t.angle_deg ? std::to_string(*t.angle_deg) : "") << ","
               << format_number(t.candidate) << "," << format_number(t.baseline) << "," << format_number(t.distance)
               << "," << format_number(t.weight) << "\n";
        os << prefix << "coefficient_Z" << r.primary_mode << ",," << format_number(r.primary_coefficient) << ","
           << format_number(r.initial_guess) << ",,\n";
        if (r.secondary_coefficient != 0.0)
            os << prefix << "coefficient_Z" << r.secondary_mode << ",," << format_number(r.secondary_coefficient)
               << ",0,,\n";
        os << prefix << "composite,,,," << format_number(r.composite) << ",1\n";
    }
}

}  // namespace opticsbench
