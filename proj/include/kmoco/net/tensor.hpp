#pragma once

#include "kmoco/complex_image.hpp"

#include <cstddef>
#include <vector>

namespace kmoco::net {

// Dense (channels, height, width) activation tensor, double precision.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_)
        : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

    std::size_t size() const { return v.size(); }
    double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
    const double* plane(int ch) const {
        return v.data() + static_cast<std::size_t>(ch) * h * w;
    }
    double& at(int ch, int y, int x) {
        return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    double at(int ch, int y, int x) const {
        return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// Complex image <-> 2-channel tensor (real, imaginary).
Tensor to_tensor(const ComplexImage& img);
ComplexImage to_image(const Tensor& t);

} // namespace kmoco::net
