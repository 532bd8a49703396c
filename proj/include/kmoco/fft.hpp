#pragma once

#include "kmoco/complex_image.hpp"

namespace kmoco {

// Centered orthonormal 2-D DFT: zero frequency lands at (H/2, W/2) (floor),
// and ||fft2_centered(x)||_2 == ||x||_2. Any positive dimensions are
// supported (radix-2 where possible, Bluestein otherwise).
ComplexImage fft2_centered(const ComplexImage& img);
ComplexImage ifft2_centered(const ComplexImage& k);

// In-place 1-D transforms on a contiguous buffer, orthonormal scaling,
// no centering. Exposed for tests and the Bluestein path.
void fft_1d(cplx* data, int n, bool inverse);

// Circular shift: out[r][c] = in[(r - shift_rows) mod H][(c - shift_cols) mod W].
ComplexImage circular_shift(const ComplexImage& img, int shift_rows, int shift_cols);

} // namespace kmoco
