#include "kmoco/resample.hpp"

#include <cmath>

namespace kmoco {

ComplexImage resample_rigid(const ComplexImage& img, const RigidTransform& t) {
    validate_transform(t, img.height(), img.width());
    if (t.is_identity()) return img;

    const int h = img.height();
    const int w = img.width();
    const double cy = (h - 1) / 2.0;
    const double cx = (w - 1) / 2.0;
    // inverse rotation: output pixel pulled back to source coordinates.
    // Positive angle is counter-clockwise with y pointing up (rows run down).
    const double cos_a = std::cos(t.angle);
    const double sin_a = std::sin(t.angle);

    ComplexImage out(h, w);
    for (int r = 0; r < h; ++r) {
        const double qy = r - cy - t.shift_y;
        for (int c = 0; c < w; ++c) {
            const double qx = c - cx - t.shift_x;
            const double sx = cos_a * qx - sin_a * qy + cx;
            const double sy = sin_a * qx + cos_a * qy + cy;

            const double fx0 = std::floor(sx);
            const double fy0 = std::floor(sy);
            const int x0 = static_cast<int>(fx0);
            const int y0 = static_cast<int>(fy0);
            const double wx = sx - fx0;
            const double wy = sy - fy0;

            auto tap = [&](int yy, int xx) -> cplx {
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) return cplx(0.0, 0.0);
                return img.at(yy, xx);
            };
            const cplx v00 = tap(y0, x0);
            const cplx v01 = tap(y0, x0 + 1);
            const cplx v10 = tap(y0 + 1, x0);
            const cplx v11 = tap(y0 + 1, x0 + 1);
            out.at(r, c) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                           wy * ((1.0 - wx) * v10 + wx * v11);
        }
    }
    return out;
}

} // namespace kmoco
