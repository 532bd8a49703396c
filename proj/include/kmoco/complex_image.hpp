#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kmoco {

using cplx = std::complex<double>;

// Dense 2-D complex field, row-major. Used both for images and for
// single-coil k-space planes. Rows run along the readout axis (height),
// columns along the phase-encode axis (width).
class ComplexImage {
public:
    ComplexImage() = default;

    ComplexImage(int height, int width)
        : height_(height), width_(width), data_(check_dims(height, width)) {}

    ComplexImage(int height, int width, std::vector<cplx> data)
        : height_(height), width_(width), data_(std::move(data)) {
        check_dims(height, width);
        if (data_.size() != static_cast<std::size_t>(height_) * width_)
            throw std::invalid_argument("ComplexImage: data length != height*width");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    cplx& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    const cplx& at(int row, int col) const {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }

    cplx* row(int r) { return data_.data() + static_cast<std::size_t>(r) * width_; }
    const cplx* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * width_; }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    bool same_shape(const ComplexImage& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    double norm2() const;      // l2 norm of the flattened field
    double max_abs() const;
    bool all_finite() const;

    ComplexImage& operator+=(const ComplexImage& other);
    ComplexImage& operator-=(const ComplexImage& other);
    ComplexImage& operator*=(double s);

private:
    static std::size_t check_dims(int h, int w) {
        if (h <= 0 || w <= 0)
            throw std::invalid_argument("ComplexImage: dimensions must be positive");
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<cplx> data_;
};

ComplexImage operator+(ComplexImage a, const ComplexImage& b);
ComplexImage operator-(ComplexImage a, const ComplexImage& b);

// Elementwise complex product.
ComplexImage hadamard(const ComplexImage& a, const ComplexImage& b);

// Elementwise product with the conjugate of b.
ComplexImage hadamard_conj(const ComplexImage& a, const ComplexImage& b);

// Rigid in-plane map: rotate by `angle` (radians, counter-clockwise about the
// geometric image center) then translate by (shift_x, shift_y) pixels.
// shift_x moves along columns, shift_y along rows; both may be fractional.
struct RigidTransform {
    double angle = 0.0;
    double shift_x = 0.0;
    double shift_y = 0.0;

    bool is_identity() const { return angle == 0.0 && shift_x == 0.0 && shift_y == 0.0; }
};

void validate_transform(const RigidTransform& t, int height, int width);

} // namespace kmoco
