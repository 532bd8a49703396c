#include "kmoco/coils.hpp"

#include "kmoco/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace kmoco {

SensitivityMaps biot_savart_maps(int height, int width, int n_coils, double coil_radius) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("biot_savart_maps: dimensions must be positive");
    if (n_coils < 1) throw std::invalid_argument("biot_savart_maps: need at least one coil");

    const double cy = (height - 1) / 2.0;
    const double cx = (width - 1) / 2.0;
    // loop radius scales with the grid; phase winds slowly with distance
    const double loop_radius = 0.25 * std::min(height, width);
    const double phase_per_px = 2.0 * 3.14159265358979323846 / (4.0 * std::min(height, width));

    SensitivityMaps out;
    out.maps.reserve(n_coils);
    for (int i = 0; i < n_coils; ++i) {
        const double theta = 2.0 * 3.14159265358979323846 * i / n_coils;
        const double coil_y = cy + coil_radius * std::sin(theta);
        const double coil_x = cx + coil_radius * std::cos(theta);
        ComplexImage m(height, width);
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                const double dy = r - coil_y;
                const double dx = c - coil_x;
                const double d2 = dx * dx + dy * dy;
                const double mag =
                    loop_radius * loop_radius / std::pow(loop_radius * loop_radius + d2, 1.5);
                const double phase = phase_per_px * std::sqrt(d2);
                m.at(r, c) = cplx(mag * std::cos(phase), mag * std::sin(phase));
            }
        }
        out.maps.push_back(std::move(m));
    }

    // joint normalization: sum_i |s_i|^2 == 1 per pixel
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double ss = 0.0;
            for (const ComplexImage& m : out.maps) ss += std::norm(m.at(r, c));
            const double inv = 1.0 / std::sqrt(ss);
            for (ComplexImage& m : out.maps) m.at(r, c) *= inv;
        }
    }
    return out;
}

MultiCoilKSpace coil_project(const ComplexImage& x, const SensitivityMaps& maps,
                             const ScanOrder& order) {
    if (maps.n_coils() < 1) throw std::invalid_argument("coil_project: no coils");
    if (x.height() != maps.height() || x.width() != maps.width())
        throw std::invalid_argument("coil_project: image/map shape mismatch");
    if (order.n_columns() != x.width())
        throw std::invalid_argument("coil_project: order width does not match image");

    const std::vector<unsigned char> sampled = order.sample_set();
    MultiCoilKSpace out;
    out.order = order;
    out.planes.reserve(maps.n_coils());
    for (int i = 0; i < maps.n_coils(); ++i) {
        ComplexImage k = fft2_centered(hadamard(x, maps.maps[i]));
        for (int r = 0; r < k.height(); ++r) {
            cplx* row = k.row(r);
            for (int c = 0; c < k.width(); ++c) {
                if (!sampled[c]) row[c] = cplx(0.0, 0.0);
            }
        }
        out.planes.push_back(std::move(k));
    }
    return out;
}

ComplexImage coil_combine(const MultiCoilKSpace& k, const SensitivityMaps& maps) {
    if (k.n_coils() != maps.n_coils())
        throw std::invalid_argument("coil_combine: coil count mismatch");
    if (k.n_coils() < 1) throw std::invalid_argument("coil_combine: no coils");
    if (k.height() != maps.height() || k.width() != maps.width())
        throw std::invalid_argument("coil_combine: shape mismatch");

    ComplexImage x(k.height(), k.width());
    for (int i = 0; i < k.n_coils(); ++i) {
        const ComplexImage xi = ifft2_centered(k.planes[i]);
        const ComplexImage& s = maps.maps[i];
        for (int r = 0; r < x.height(); ++r) {
            cplx* xr = x.row(r);
            const cplx* xir = xi.row(r);
            const cplx* sr = s.row(r);
            for (int c = 0; c < x.width(); ++c) xr[c] += xir[c] * std::conj(sr[c]);
        }
    }
    return x;
}

} // namespace kmoco
