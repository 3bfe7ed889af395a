#ifndef SPP_IMAGE_HPP
#define SPP_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "spp/errors.hpp"

namespace spp {

// Row-major grayscale image with intensities in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline GrayImage make_image(int width, int height, double fill = 0.0) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
    return img;
}

namespace detail {

inline bool supported_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg";
}

} // namespace detail

// Decode an image file and convert to grayscale in [0,1]. Color inputs are
// reduced with BT.601 luminance weights (0.299 R + 0.587 G + 0.114 B).
inline GrayImage load_gray(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw UnreadableFile("cannot read file: " + path.string());
    if (!detail::supported_extension(path))
        throw UnsupportedFormat("unsupported image format: " + path.string());

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile("cannot open file: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());

    cv::Mat raw = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8UC1, bytes.data()),
                               cv::IMREAD_UNCHANGED);
    if (raw.empty())
        throw UnreadableFile("failed to decode image: " + path.string());
    if (raw.depth() != CV_8U) {
        double maxv = raw.depth() == CV_16U ? 65535.0 : 255.0;
        raw.convertTo(raw, CV_8U, 255.0 / maxv);
    }

    GrayImage img = make_image(raw.cols, raw.rows);
    if (raw.channels() == 1) {
        for (int y = 0; y < raw.rows; ++y)
            for (int x = 0; x < raw.cols; ++x)
                img.at(y, x) = raw.at<std::uint8_t>(y, x) / 255.0;
    } else if (raw.channels() == 3 || raw.channels() == 4) {
        for (int y = 0; y < raw.rows; ++y) {
            for (int x = 0; x < raw.cols; ++x) {
                const std::uint8_t* px = raw.ptr<std::uint8_t>(y) + x * raw.channels();
                // OpenCV decodes as BGR(A)
                double lum = 0.299 * px[2] + 0.587 * px[1] + 0.114 * px[0];
                img.at(y, x) = std::min(lum / 255.0, 1.0);
            }
        }
    } else {
        throw UnsupportedFormat("unsupported channel count in " + path.string());
    }
    return img;
}

// Bilinear resize to d x d with half-pixel-centered sampling. Identity
// (bit-exact) when the input is already d x d.
inline GrayImage resize(const GrayImage& img, int d) {
    if (d < 1)
        throw ConfigInvalid("resize: target size must be >= 1");
    if (img.width == d && img.height == d)
        return img;

    GrayImage out = make_image(d, d);
    const double sx = static_cast<double>(img.width) / d;
    const double sy = static_cast<double>(img.height) / d;
    for (int y = 0; y < d; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        int y0 = static_cast<int>(std::floor(fy));
        int y1 = std::min(y0 + 1, img.height - 1);
        double wy = fy - y0;
        for (int x = 0; x < d; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            int x0 = static_cast<int>(std::floor(fx));
            int x1 = std::min(x0 + 1, img.width - 1);
            double wx = fx - x0;
            double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
            double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
            out.at(y, x) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

// Write as 8-bit grayscale; format from the extension (PNG for the harness).
inline void save_gray(const GrayImage& img, const std::filesystem::path& path) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(
                std::lround(std::clamp(img.at(y, x), 0.0, 1.0) * 255.0));
    if (!cv::imwrite(path.string(), m))
        throw IoError("failed to write image: " + path.string());
}

// Directory-per-class dataset index. Deterministic: classes and files sorted
// lexicographically.
struct DatasetIndex {
    std::vector<std::string> classes;
    std::vector<std::vector<std::filesystem::path>> samples; // per class
    int skipped_files = 0;  // non-image files encountered
    int skipped_classes = 0; // empty subdirectories

    std::size_t total_images() const {
        std::size_t n = 0;
        for (const auto& s : samples) n += s.size();
        return n;
    }
};

inline DatasetIndex scan_dataset(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        throw UnreadableFile("dataset directory not found: " + root.string());

    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(root))
        if (e.is_directory())
            dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());

    DatasetIndex idx;
    for (const auto& dir : dirs) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (!e.is_regular_file())
                continue;
            if (detail::supported_extension(e.path()))
                files.push_back(e.path());
            else
                ++idx.skipped_files;
        }
        if (files.empty()) {
            ++idx.skipped_classes;
            continue;
        }
        std::sort(files.begin(), files.end());
        idx.classes.push_back(dir.filename().string());
        idx.samples.push_back(std::move(files));
    }
    if (idx.classes.empty())
        throw EmptyDataset("no class directory with images under " + root.string());
    return idx;
}

} // namespace spp

#endif
