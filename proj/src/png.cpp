#include "kmoco/png.hpp"

#include <zlib.h>

#include <fstream>
#include <stdexcept>

namespace kmoco {

namespace {

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
    push_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + crc_start,
                            static_cast<uInt>(out.size() - crc_start));
    push_u32_be(out, static_cast<std::uint32_t>(crc));
}

} // namespace

std::vector<std::uint8_t> encode_png_rgb(const std::vector<std::uint8_t>& pixels, int width,
                                         int height) {
    if (width <= 0 || height <= 0 ||
        pixels.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("png: pixel buffer does not match dimensions");

    // raw scanlines, filter byte 0 per row
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * 3));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * width * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) !=
        Z_OK)
        throw std::runtime_error("png: deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<std::uint8_t> ihdr;
    push_u32_be(ihdr, static_cast<std::uint32_t>(width));
    push_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", compressed);
    push_chunk(out, "IEND", {});
    return out;
}

void write_png_rgb(const std::string& path, const std::vector<std::uint8_t>& pixels, int width,
                   int height) {
    const std::vector<std::uint8_t> bytes = encode_png_rgb(pixels, width, height);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("png: cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("png: write failed for " + path);
}

std::vector<std::uint8_t> gray_to_rgb(const GrayImage& img) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        rgb[3 * i] = img.pixels[i];
        rgb[3 * i + 1] = img.pixels[i];
        rgb[3 * i + 2] = img.pixels[i];
    }
    return rgb;
}

} // namespace kmoco
