#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kmoco {

// Minimal deterministic PNG writer (zlib deflate, filter 0, fixed settings).
// `pixels` is row-major RGB, 3 bytes per pixel.
std::vector<std::uint8_t> encode_png_rgb(const std::vector<std::uint8_t>& pixels, int width,
                                         int height);
void write_png_rgb(const std::string& path, const std::vector<std::uint8_t>& pixels, int width,
                   int height);

// 8-bit grayscale raster helper.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

std::vector<std::uint8_t> gray_to_rgb(const GrayImage& img);

} // namespace kmoco
