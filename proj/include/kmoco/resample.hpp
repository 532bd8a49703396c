#pragma once

#include "kmoco/complex_image.hpp"

namespace kmoco {

// Resample `img` under the rigid map (rotate about the geometric center
// ((H-1)/2, (W-1)/2) by t.angle, counter-clockwise with y up, then translate
// by (t.shift_x, t.shift_y)). Bilinear interpolation on real and imaginary
// parts independently; samples outside the source domain are zero.
// The identity transform returns the input bit-for-bit.
ComplexImage resample_rigid(const ComplexImage& img, const RigidTransform& t);

} // namespace kmoco
