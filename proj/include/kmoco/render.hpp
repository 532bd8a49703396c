#pragma once

#include "kmoco/complex_image.hpp"
#include "kmoco/png.hpp"
#include "kmoco/scan_order.hpp"

namespace kmoco {

// Magnitude raster, windowed by the image's own max.
GrayImage magnitude_to_gray(const ComplexImage& img);

struct RgbRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // RGB
};

// Three-panel figure: corrupted | corrected | target magnitudes with thin
// separators, each panel max-normalized.
RgbRaster render_triptych(const ComplexImage& corrupted, const ComplexImage& corrected,
                          const ComplexImage& target);

// Scatter of (t, column) with axes, tick labels, and the t_center acquisition
// highlighted in red.
RgbRaster render_scan_order(const ScanOrder& order);

void write_raster_png(const RgbRaster& raster, const std::string& path);

} // namespace kmoco
