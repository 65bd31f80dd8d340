#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcf {

// 8-bit RGB, row-major, interleaved channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0) {
        if (w < 1 || h < 1) throw std::invalid_argument("non-positive image dims");
    }

    std::uint8_t& at(int x, int y, int c) {
        return data[(std::size_t(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(std::size_t(y) * width + x) * 3 + c];
    }

    bool operator==(const Image&) const = default;
};

// Single-channel float grid, row-major.
struct FloatGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    FloatGrid() = default;
    FloatGrid(int w, int h) : width(w), height(h), data(std::size_t(w) * h, 0.0) {}

    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
};

// PNG/JPEG codec wrappers.
Image load_image(const std::string& path);
void save_png(const Image& img, const std::string& path);
std::vector<std::uint8_t> encode_png_gray(const std::vector<std::uint8_t>& pixels,
                                          int width, int height);

}  // namespace qcf
