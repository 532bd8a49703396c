#pragma once

#include "kmoco/complex_image.hpp"
#include "kmoco/scan_order.hpp"

namespace kmoco {

// Per-coil complex spatial sensitivity maps, jointly normalized so that
// sum_i |s_i(j,k)|^2 == 1 at every pixel.
struct SensitivityMaps {
    std::vector<ComplexImage> maps;

    int n_coils() const { return static_cast<int>(maps.size()); }
    int height() const { return maps.empty() ? 0 : maps[0].height(); }
    int width() const { return maps.empty() ? 0 : maps[0].width(); }
};

// Per-coil k-space planes tied to the scan order that acquired them.
// Columns never acquired under the order are identically zero.
struct MultiCoilKSpace {
    std::vector<ComplexImage> planes;
    ScanOrder order;

    int n_coils() const { return static_cast<int>(planes.size()); }
    int height() const { return planes.empty() ? 0 : planes[0].height(); }
    int width() const { return planes.empty() ? 0 : planes[0].width(); }
};

// Loop coils at equal angles on a circle of `coil_radius` pixels around the
// image center. Raw per-coil magnitude follows the on-axis Biot-Savart field
// of a circular loop, with a smooth phase proportional to the distance from
// the coil; joint per-pixel normalization is applied last.
SensitivityMaps biot_savart_maps(int height, int width, int n_coils, double coil_radius);

// k_i = fft2_centered(x .* s_i), with columns outside the order's sample set
// zeroed afterwards.
MultiCoilKSpace coil_project(const ComplexImage& x, const SensitivityMaps& maps,
                             const ScanOrder& order);

// x = sum_i conj(s_i) .* ifft2_centered(k_i)  (adjoint coil combination).
ComplexImage coil_combine(const MultiCoilKSpace& k, const SensitivityMaps& maps);

} // namespace kmoco
