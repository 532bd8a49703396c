#pragma once

#include "kmoco/net/tensor.hpp"

#include <span>

namespace kmoco::net {

// 2-D convolution, zero padding of kernel/2 on each side, square kernel.
// Output spatial size is H/stride x W/stride for even H, W (odd kernel).
// `weights` is (out_c, in_c, k, k) row-major, `bias` is (out_c).
void conv2d_forward(const Tensor& in, std::span<const double> weights,
                    std::span<const double> bias, int out_c, int k, int stride, Tensor& out);

// Gradients of the convolution. grad_in is overwritten; grad_weights and
// grad_bias are accumulated into (callers zero them once per step).
void conv2d_backward(const Tensor& in, std::span<const double> weights, int out_c, int k,
                     int stride, const Tensor& grad_out, Tensor& grad_in,
                     std::span<double> grad_weights, std::span<double> grad_bias);

void conv2d_out_shape(const Tensor& in, int out_c, int stride, Tensor& out);

// LeakyReLU, elementwise. Backward gates the incoming gradient by the
// recorded preactivation sign.
void leaky_relu_forward(const Tensor& pre, double slope, Tensor& out);
void leaky_relu_backward(const Tensor& pre, double slope, Tensor& grad);

// Nearest-neighbor x2 upsampling.
void upsample2_forward(const Tensor& in, Tensor& out);
void upsample2_backward(const Tensor& grad_out, Tensor& grad_in);

// Channel concatenation [a; b].
void concat_forward(const Tensor& a, const Tensor& b, Tensor& out);
void concat_backward(const Tensor& grad_out, Tensor& grad_a, Tensor& grad_b);

} // namespace kmoco::net
