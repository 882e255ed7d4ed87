#pragma once

// Image decoding and encoding through OpenCV. Images are held as planar RGB
// (or single-channel gray) 8-bit buffers.

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "error.hpp"
#include "image.hpp"

namespace opticsbench {

enum class ImageFormat { png, jpeg };

inline const char* image_extension(ImageFormat f) noexcept { return f == ImageFormat::png ? ".png" : ".jpg"; }

inline constexpr int kJpegQuality = 95;

// Decodes any format OpenCV understands into 3-channel RGB; alpha is dropped, gray is replicated.
inline Image8 read_image(const std::filesystem::path& path) {
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot decode image " + path.string());
    Image8 img(bgr.cols, bgr.rows, 3);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x)
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = row[x][2 - c];
    }
    return img;
}

inline cv::Mat to_mat(const Image8& img) {
    if (img.channels == 1) {
        cv::Mat m(img.height, img.width, CV_8UC1);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) m.at<std::uint8_t>(y, x) = img.at(0, y, x);
        return m;
    }
    if (img.channels != 3) throw ConfigError("only 1- and 3-channel images can be encoded");
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) row[x][2 - c] = img.at(c, y, x);
    }
    return m;
}

// Encoder parameters are pinned so repeated runs produce identical bytes.
inline std::vector<int> encode_params(ImageFormat f) {
    if (f == ImageFormat::png) return {cv::IMWRITE_PNG_COMPRESSION, 6};
    return {cv::IMWRITE_JPEG_QUALITY, kJpegQuality, cv::IMWRITE_JPEG_OPTIMIZE, 0};
}

inline std::vector<std::uint8_t> encode_image(const Image8& img, ImageFormat f = ImageFormat::png) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(image_extension(f), to_mat(img), buf, encode_params(f))) throw IoError("image encoding failed");
    return buf;
}

inline void write_image(const std::filesystem::path& path, const Image8& img, ImageFormat f = ImageFormat::png) {
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), to_mat(img), encode_params(f));
    } catch (const cv::Exception& e) {
        throw IoError("cannot write " + path.string() + ": " + e.what());
    }
    if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace opticsbench
