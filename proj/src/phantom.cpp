#include "kmoco/phantom.hpp"

#include "kmoco/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kmoco {

namespace {

struct Ellipse {
    double cx, cy;   // center in normalized [-1,1] support coordinates
    double a, b;     // semi-axes, normalized
    double theta;    // rotation
    double amp;
};

bool inside(const Ellipse& e, double x, double y) {
    const double dx = x - e.cx;
    const double dy = y - e.cy;
    const double ct = std::cos(e.theta);
    const double st = std::sin(e.theta);
    const double u = (ct * dx + st * dy) / e.a;
    const double v = (-st * dx + ct * dy) / e.b;
    return u * u + v * v <= 1.0;
}

} // namespace

Phantom synth_phantom(std::uint64_t seed, int height, int width) {
    if (height < 16 || width < 16)
        throw std::invalid_argument("synth_phantom: dimensions must be at least 16");

    Rng rng(Rng::derive_seed(seed, 0x7068616e746f6dULL));

    // head-like support ellipse, keeping a zero border ring of width >= 4
    const double cy = (height - 1) / 2.0;
    const double cx = (width - 1) / 2.0;
    const double support_b = height / 2.0 - 5.0;
    const double support_a = width / 2.0 - 5.0;

    const int n_inner = 5 + static_cast<int>(rng.uniform_int(7)); // 5..11 inner ellipses
    std::vector<Ellipse> ellipses;
    ellipses.push_back({0.0, 0.0, 1.0, 1.0, 0.0, 0.45 + 0.25 * rng.uniform()}); // base "skull"
    for (int i = 0; i < n_inner; ++i) {
        Ellipse e;
        e.cx = rng.uniform(-0.55, 0.55);
        e.cy = rng.uniform(-0.55, 0.55);
        e.a = rng.uniform(0.08, 0.45);
        e.b = rng.uniform(0.08, 0.45);
        e.theta = rng.uniform(-1.5707963267948966, 1.5707963267948966);
        e.amp = rng.uniform(-0.35, 0.55);
        ellipses.push_back(e);
    }

    // smooth low-order polynomial phase over the support
    double p[6];
    for (double& v : p) v = rng.uniform(-0.6, 0.6);

    ComplexImage img(height, width);
    auto rasterize = [&](const std::vector<Ellipse>& shapes) {
        double max_mag = 0.0;
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                const double y = (r - cy) / support_b;
                const double x = (c - cx) / support_a;
                if (x * x + y * y > 1.0) {
                    img.at(r, c) = cplx(0.0, 0.0); // outside the head support
                    continue;
                }
                double mag = 0.0;
                for (const Ellipse& e : shapes) {
                    if (inside(e, x, y)) mag += e.amp;
                }
                mag = std::clamp(mag, 0.0, 1.0);
                const double phase = p[0] + p[1] * x + p[2] * y + p[3] * x * x + p[4] * x * y +
                                     p[5] * y * y;
                img.at(r, c) = cplx(mag * std::cos(phase), mag * std::sin(phase));
                max_mag = std::max(max_mag, mag);
            }
        }
        return max_mag;
    };

    double max_mag = rasterize(ellipses);
    if (max_mag == 0.0) {
        // pathological draw where negative ellipses blanket the support
        max_mag = rasterize({ellipses[0]});
    }
    const double inv = 1.0 / max_mag;
    for (cplx& v : img.data()) v *= inv;
    return Phantom{std::move(img), seed};
}

} // namespace kmoco
