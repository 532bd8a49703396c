#include "kmoco/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace kmoco {

namespace {

// 5x7 bitmap glyphs, MSB = leftmost column of each row.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
    static const std::map<char, std::array<std::uint8_t, 7>> table = {
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
        {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
        {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
        {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
        {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
        {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
        {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
        {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    };
    return table;
}

void put_pixel(RgbRaster& r, int x, int y, std::uint8_t red, std::uint8_t green,
               std::uint8_t blue) {
    if (x < 0 || x >= r.width || y < 0 || y >= r.height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * r.width + x) * 3;
    r.pixels[i] = red;
    r.pixels[i + 1] = green;
    r.pixels[i + 2] = blue;
}

void draw_text(RgbRaster& r, int x, int y, const std::string& text) {
    int cx = x;
    for (char ch : text) {
        auto it = glyphs().find(ch);
        if (it != glyphs().end()) {
            for (int row = 0; row < 7; ++row) {
                for (int col = 0; col < 5; ++col) {
                    if (it->second[row] & (1 << (4 - col))) put_pixel(r, cx + col, y + row, 0, 0, 0);
                }
            }
        }
        cx += 6;
    }
}

void draw_dot(RgbRaster& r, int x, int y, int radius, std::uint8_t red, std::uint8_t green,
              std::uint8_t blue) {
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) put_pixel(r, x + dx, y + dy, red, green, blue);
    }
}

} // namespace

GrayImage magnitude_to_gray(const ComplexImage& img) {
    GrayImage g(img.width(), img.height());
    const double mx = img.max_abs();
    const double scale = mx > 0.0 ? 255.0 / mx : 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double v = std::abs(img.at(y, x)) * scale;
            g.at(y, x) = static_cast<std::uint8_t>(std::clamp(v + 0.5, 0.0, 255.0));
        }
    }
    return g;
}

RgbRaster render_triptych(const ComplexImage& corrupted, const ComplexImage& corrected,
                          const ComplexImage& target) {
    const GrayImage panels[3] = {magnitude_to_gray(corrupted), magnitude_to_gray(corrected),
                                 magnitude_to_gray(target)};
    const int h = panels[0].height;
    const int w = panels[0].width;
    for (const GrayImage& p : panels) {
        if (p.height != h || p.width != w)
            throw std::invalid_argument("triptych: panel shape mismatch");
    }
    const int sep = 2;
    RgbRaster out;
    out.width = 3 * w + 2 * sep;
    out.height = h;
    out.pixels.assign(static_cast<std::size_t>(out.width) * out.height * 3, 255);
    for (int p = 0; p < 3; ++p) {
        const int x0 = p * (w + sep);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint8_t v = panels[p].pixels[static_cast<std::size_t>(y) * w + x];
                put_pixel(out, x0 + x, y, v, v, v);
            }
        }
    }
    return out;
}

RgbRaster render_scan_order(const ScanOrder& order) {
    const int margin_left = 42;
    const int margin_bottom = 26;
    const int margin_top = 10;
    const int margin_right = 14;
    const int plot_w = 520;
    const int plot_h = 390;

    RgbRaster r;
    r.width = margin_left + plot_w + margin_right;
    r.height = margin_top + plot_h + margin_bottom;
    r.pixels.assign(static_cast<std::size_t>(r.width) * r.height * 3, 255);

    const int len = order.length();
    const int cols = order.n_columns();
    auto px = [&](int t) {
        return margin_left + (len == 1 ? 0 : t * (plot_w - 1) / (len - 1));
    };
    auto py = [&](int col) {
        // column 0 at the bottom, like a conventional axis
        return margin_top + (plot_h - 1) - (cols == 1 ? 0 : col * (plot_h - 1) / (cols - 1));
    };

    // axes
    for (int x = margin_left - 1; x < margin_left + plot_w; ++x)
        put_pixel(r, x, margin_top + plot_h, 0, 0, 0);
    for (int y = margin_top; y <= margin_top + plot_h; ++y)
        put_pixel(r, margin_left - 1, y, 0, 0, 0);

    for (const ScanOrder::Timing& e : order.timings()) {
        const bool is_center = e.t == order.t_center();
        if (is_center) {
            draw_dot(r, px(e.t), py(e.column), 2, 220, 0, 0);
        } else {
            draw_dot(r, px(e.t), py(e.column), 1, 0, 0, 0);
        }
    }

    // tick labels: extremes of both axes, plus axis names
    draw_text(r, margin_left - 2, margin_top + plot_h + 4, "0");
    const std::string t_max = std::to_string(len - 1);
    draw_text(r, margin_left + plot_w - static_cast<int>(t_max.size()) * 6,
              margin_top + plot_h + 4, t_max);
    draw_text(r, margin_left + plot_w / 2 - 3, margin_top + plot_h + 14, "t");
    draw_text(r, margin_left - 14, margin_top + plot_h - 8, "0");
    const std::string c_max = std::to_string(cols - 1);
    draw_text(r, std::max(0, margin_left - 4 - static_cast<int>(c_max.size()) * 6), margin_top,
              c_max);
    draw_text(r, 2, margin_top + plot_h / 2 - 4, "kx");
    return r;
}

void write_raster_png(const RgbRaster& raster, const std::string& path) {
    write_png_rgb(path, raster.pixels, raster.width, raster.height);
}

} // namespace kmoco
