#include "kmoco/complex_image.hpp"

#include <cmath>

namespace kmoco {

double ComplexImage::norm2() const {
    double acc = 0.0;
    for (const cplx& v : data_) acc += std::norm(v);
    return std::sqrt(acc);
}

double ComplexImage::max_abs() const {
    double m = 0.0;
    for (const cplx& v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool ComplexImage::all_finite() const {
    for (const cplx& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

ComplexImage& ComplexImage::operator+=(const ComplexImage& other) {
    if (!same_shape(other)) throw std::invalid_argument("ComplexImage+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexImage& ComplexImage::operator-=(const ComplexImage& other) {
    if (!same_shape(other)) throw std::invalid_argument("ComplexImage-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexImage& ComplexImage::operator*=(double s) {
    for (cplx& v : data_) v *= s;
    return *this;
}

ComplexImage operator+(ComplexImage a, const ComplexImage& b) {
    a += b;
    return a;
}

ComplexImage operator-(ComplexImage a, const ComplexImage& b) {
    a -= b;
    return a;
}

ComplexImage hadamard(const ComplexImage& a, const ComplexImage& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("hadamard: shape mismatch");
    ComplexImage out(a.height(), a.width());
    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = out.data();
    for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] * bv[i];
    return out;
}

ComplexImage hadamard_conj(const ComplexImage& a, const ComplexImage& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("hadamard_conj: shape mismatch");
    ComplexImage out(a.height(), a.width());
    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = out.data();
    for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] * std::conj(bv[i]);
    return out;
}

void validate_transform(const RigidTransform& t, int height, int width) {
    const double pi = 3.14159265358979323846;
    if (!(t.angle >= -pi && t.angle < pi))
        throw std::invalid_argument("RigidTransform: angle out of [-pi, pi)");
    if (std::abs(t.shift_y) > height / 2.0 || std::abs(t.shift_x) > width / 2.0)
        throw std::invalid_argument("RigidTransform: shift exceeds half the image extent");
}

} // namespace kmoco
