#pragma once

#include "kmoco/complex_image.hpp"
#include "kmoco/net/tensor.hpp"

namespace kmoco {

// Contrast-weighted SSIM loss parameters: exponents (alpha, beta, gamma) and
// the c-offsets derived from the target's max. Local statistics use an 11x11
// Gaussian window (sigma 1.5, normalized to sum 1) with mirror padding.
struct LossParams {
    double alpha = 0.3;
    double beta = 1.0;
    double gamma = 0.3;
    double c1_factor = 0.01;
    double c2_factor = 0.03;
    int window = 11;
    double sigma = 1.5;
};

// Loss in [0, 1/2]: 1/2 - 1/2 * mean of the per-pixel factor product.
// Fractional exponents clamp negative bases at 0 (with zero gradient on the
// clamped branch); an exponent of exactly 1 keeps the signed base. If
// grad_x is non-null the exact reverse-mode gradient w.r.t. x is written.
// x and y are single-channel tensors.
double ssim_c(const net::Tensor& x, const net::Tensor& y, const LossParams& p,
              net::Tensor* grad_x = nullptr);

// Eq-8-style total: ssim_c on real parts plus ssim_c on imaginary parts,
// c-offsets computed per part from the corresponding target part.
double total_loss(const ComplexImage& x_out, const ComplexImage& y_dp, const LossParams& p,
                  ComplexImage* grad_x = nullptr);

// Standard single-scale SSIM (exponents 1,1,1 equivalent), same window and
// c conventions; data_max overrides the max{y}-derived offsets when the two
// images should share constants.
double ssim(const net::Tensor& x, const net::Tensor& y, const LossParams& p);
double ssim(const net::Tensor& x, const net::Tensor& y, const LossParams& p, double data_max);

// ||x - y||^2 / ||y||^2 on complex images.
double nmse(const ComplexImage& x, const ComplexImage& y);

net::Tensor magnitude_image(const ComplexImage& img);
net::Tensor real_part(const ComplexImage& img);
net::Tensor imag_part(const ComplexImage& img);

} // namespace kmoco
