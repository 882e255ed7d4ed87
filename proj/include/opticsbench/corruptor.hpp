#pragma once

// Applies kernel stacks to a class-subdirectory image tree and writes the
// benchmark layout <dst>/<corruption>/<severity>/<class>/<stem>.<ext>.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <system_error>
#include <tuple>
#include <vector>

#include "convolution.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "pupil_psf.hpp"
#include "rng.hpp"

namespace opticsbench {

inline constexpr int kResizeShortSide = 256;
inline constexpr int kCropSize = 224;
inline constexpr int kMinInputSide = 32;

// Bilinear resampling with pixel-center alignment; source coordinates are clamped at the borders.
inline Image8 resize_bilinear(const Image8& src, int width, int height) {
    if (width <= 0 || height <= 0) throw DomainError("resize target must be positive");
    if (src.width == width && src.height == height) return src;
    const double sx = static_cast<double>(src.width) / width;
    const double sy = static_cast<double>(src.height) / height;

    struct Tap {
        int i0, i1;
        double w1;
    };
    auto taps = [](int n_out, int n_in, double scale) {
        std::vector<Tap> t(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            const double s = std::clamp((o + 0.5) * scale - 0.5, 0.0, static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, n_in - 1);
            t[static_cast<std::size_t>(o)] = {i0, i1, s - i0};
        }
        return t;
    };
    const auto tx = taps(width, src.width, sx);
    const auto ty = taps(height, src.height, sy);

    Image8 out(width, height, src.channels);
    for (int c = 0; c < src.channels; ++c)
        for (int y = 0; y < height; ++y) {
            const Tap& a = ty[static_cast<std::size_t>(y)];
            for (int x = 0; x < width; ++x) {
                const Tap& b = tx[static_cast<std::size_t>(x)];
                const double top = src.at(c, a.i0, b.i0) * (1.0 - b.w1) + src.at(c, a.i0, b.i1) * b.w1;
                const double bot = src.at(c, a.i1, b.i0) * (1.0 - b.w1) + src.at(c, a.i1, b.i1) * b.w1;
                out.at(c, y, x) = saturate_u8(top * (1.0 - a.w1) + bot * a.w1);
            }
        }
    return out;
}

inline Image8 center_crop(const Image8& src, int width, int height) {
    if (src.width < width || src.height < height) throw DomainError("crop larger than image");
    const int x0 = (src.width - width) / 2;
    const int y0 = (src.height - height) / 2;
    Image8 out(width, height, src.channels);
    for (int c = 0; c < src.channels; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.at(c, y, x) = src.at(c, y0 + y, x0 + x);
    return out;
}

// Short side to 256 (aspect preserved) or, with anisotropic, both sides to 256; then center crop 224.
inline Image8 preprocess(const Image8& img, bool anisotropic = false) {
    if (std::min(img.width, img.height) < kMinInputSide)
        throw DomainError("image side " + std::to_string(std::min(img.width, img.height)) + " < " +
                          std::to_string(kMinInputSide));
    int w = kResizeShortSide, h = kResizeShortSide;
    if (!anisotropic) {
        if (img.width <= img.height)
            h = static_cast<int>(std::lround(static_cast<double>(img.height) * kResizeShortSide / img.width));
        else
            w = static_cast<int>(std::lround(static_cast<double>(img.width) * kResizeShortSide / img.height));
    }
    return center_crop(resize_bilinear(img, w, h), kCropSize, kCropSize);
}

inline int assign_variant(std::uint64_t seed, std::uint64_t image_index) {
    CounterRng rng(stream_key(seed, image_index));
    return static_cast<int>(rng() >> 63);
}

struct CorruptionJob {
    std::filesystem::path src_root;
    std::filesystem::path dst_root;
    KernelStack stack;
    std::uint64_t seed = 0;
    std::vector<Corruption> corruptions{kOpticalCorruptions.begin(), kOpticalCorruptions.end()};
    std::vector<int> severities{1, 2, 3, 4, 5};
    ImageFormat format = ImageFormat::png;
    bool anisotropic_resize = false;
    unsigned threads = 1;
};

struct ManifestRow {
    std::string path;  // relative to src_root, '/' separated
    Corruption corruption = Corruption::disk_baseline;
    int severity = 0;
    int variant = 0;
    std::string output;  // relative to dst_root
};

struct ManifestError {
    std::string path;
    std::string message;
};

struct Manifest {
    std::vector<ManifestRow> rows;
    std::vector<ManifestError> errors;

    bool operator==(const Manifest& o) const {
        auto eq_row = [](const ManifestRow& a, const ManifestRow& b) {
            return a.path == b.path && a.corruption == b.corruption && a.severity == b.severity &&
                   a.variant == b.variant && a.output == b.output;
        };
        auto eq_err = [](const ManifestError& a, const ManifestError& b) {
            return a.path == b.path && a.message == b.message;
        };
        return std::equal(rows.begin(), rows.end(), o.rows.begin(), o.rows.end(), eq_row) &&
               std::equal(errors.begin(), errors.end(), o.errors.begin(), o.errors.end(), eq_err);
    }
};

// CSV rows followed by one '#'-prefixed line per skipped input.
inline void write_manifest(std::ostream& os, const Manifest& m) {
    os << "path,corruption,severity,variant,output\n";
    for (const auto& r : m.rows)
        os << csv_field(r.path) << ',' << corruption_name(r.corruption) << ',' << r.severity << ',' << r.variant << ','
           << csv_field(r.output) << '\n';
    for (const auto& e : m.errors) os << "# error," << csv_field(e.path) << ',' << csv_field(e.message) << '\n';
}

inline bool is_image_file(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    static const std::set<std::string> known{".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".tif", ".tiff", ".webp"};
    return known.count(ext) != 0;
}

// Relative paths of all image files below root, sorted.
inline std::vector<std::string> list_images(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError("source directory not found: " + root.string());
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && is_image_file(entry.path()))
            out.push_back(entry.path().lexically_relative(root).generic_string());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string output_relpath(Corruption c, int severity, const std::string& rel, ImageFormat f) {
    const std::filesystem::path p(rel);
    std::filesystem::path out = std::filesystem::path(std::string(corruption_name(c))) / std::to_string(severity);
    if (p.has_parent_path()) out /= p.parent_path();
    out /= p.stem().string() + image_extension(f);
    return out.generic_string();
}

// Processes the given listing (relative paths, any order). Variants key on each
// path's index in the sorted listing, so the order of `listing` does not matter.
inline Manifest corrupt_dataset(const CorruptionJob& job, std::vector<std::string> listing) {
    namespace fs = std::filesystem;
    std::sort(listing.begin(), listing.end());
    listing.erase(std::unique(listing.begin(), listing.end()), listing.end());

    std::vector<Corruption> corruptions = job.corruptions;
    std::sort(corruptions.begin(), corruptions.end());
    corruptions.erase(std::unique(corruptions.begin(), corruptions.end()), corruptions.end());
    std::vector<int> severities = job.severities;
    std::sort(severities.begin(), severities.end());
    severities.erase(std::unique(severities.begin(), severities.end()), severities.end());
    for (int s : severities)
        if (s < 1 || s > kSeverities) throw ConfigError("severity " + std::to_string(s) + " out of range");

    // Resolve every kernel up front; the disk baseline falls back to the built-in disks.
    std::map<KernelLabel, Kernel> kernels;
    for (auto c : corruptions)
        for (int s : severities)
            for (int v = 0; v < (c == Corruption::disk_baseline ? 1 : 2); ++v) {
                const KernelLabel key{c, s, v};
                if (const Kernel* k = job.stack.find(key))
                    kernels.emplace(key, *k);
                else if (c == Corruption::disk_baseline)
                    kernels.emplace(key, disk_baseline_kernel(s));
                else
                    throw ConfigError("kernel stack has no entry " + key.to_string());
            }
    for (const auto& [key, k] : kernels)
        if (!is_normalized(k)) throw ConfigError("kernel " + key.to_string() + " is not normalized");

    // Inputs whose outputs would collide (same stem, different extension) are skipped.
    std::vector<std::string> collision(listing.size());
    {
        std::map<std::string, std::string> owner;
        for (std::size_t i = 0; i < listing.size(); ++i) {
            const auto key = output_relpath(Corruption::disk_baseline, 1, listing[i], job.format);
            auto [it, inserted] = owner.emplace(key, listing[i]);
            if (!inserted) collision[i] = "output name collides with " + it->second;
        }
    }

    for (auto c : corruptions)
        for (int s : severities) {
            std::error_code ec;
            fs::create_directories(job.dst_root / std::string(corruption_name(c)) / std::to_string(s), ec);
            if (ec) throw IoError("cannot create output directory under " + job.dst_root.string() + ": " + ec.message());
        }

    struct Result {
        std::vector<ManifestRow> rows;
        std::string error;
    };
    std::vector<Result> results(listing.size());
    parallel_for(listing.size(), job.threads, [&](std::size_t i) {
        const std::string& rel = listing[i];
        Result& res = results[i];
        if (!collision[i].empty()) {
            res.error = collision[i];
            return;
        }
        Image8 clean;
        try {
            clean = preprocess(read_image(job.src_root / rel), job.anisotropic_resize);
        } catch (const Error& e) {
            res.error = e.what();
            return;
        }
        const int variant = assign_variant(job.seed, i);
        for (auto c : corruptions)
            for (int s : severities) {
                const int v = c == Corruption::disk_baseline ? 0 : variant;
                const Image8 out = convolve_rgb(clean, kernels.at({c, s, v}));
                const std::string out_rel = output_relpath(c, s, rel, job.format);
                const fs::path out_path = job.dst_root / out_rel;
                std::error_code ec;
                fs::create_directories(out_path.parent_path(), ec);
                if (ec) throw IoError("cannot create " + out_path.parent_path().string() + ": " + ec.message());
                write_image(out_path, out, job.format);
                res.rows.push_back({rel, c, s, v, out_rel});
            }
    });

    Manifest m;
    for (std::size_t i = 0; i < listing.size(); ++i) {
        if (!results[i].error.empty()) m.errors.push_back({listing[i], results[i].error});
        for (auto& r : results[i].rows) m.rows.push_back(std::move(r));
    }
    std::stable_sort(m.rows.begin(), m.rows.end(), [](const ManifestRow& a, const ManifestRow& b) {
        return std::tie(a.corruption, a.severity, a.path) < std::tie(b.corruption, b.severity, b.path);
    });

    std::ofstream os(job.dst_root / "manifest.csv", std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + (job.dst_root / "manifest.csv").string());
    write_manifest(os, m);
    return m;
}

inline Manifest corrupt_dataset(const CorruptionJob& job) { return corrupt_dataset(job, list_images(job.src_root)); }

}  // namespace opticsbench
