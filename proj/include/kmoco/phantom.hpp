#pragma once

#include "kmoco/complex_image.hpp"

#include <cstdint>

namespace kmoco {

// Seeded synthetic ground-truth image: a Shepp-Logan-style superposition of
// random ellipses with piecewise-constant magnitude in [0,1] and a smooth
// low-order polynomial phase, zero outside a centered head-like ellipse.
// Max magnitude is normalized to 1 and a border ring of width 4 stays zero.
struct Phantom {
    ComplexImage image;
    std::uint64_t seed = 0;
};

Phantom synth_phantom(std::uint64_t seed, int height, int width);

} // namespace kmoco
