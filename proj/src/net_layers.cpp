#include "kmoco/net/layers.hpp"

#include <algorithm>
#include <stdexcept>

namespace kmoco::net {

Tensor to_tensor(const ComplexImage& img) {
    Tensor t(2, img.height(), img.width());
    double* re = t.plane(0);
    double* im = t.plane(1);
    const cplx* src = img.data().data();
    for (std::size_t i = 0; i < img.size(); ++i) {
        re[i] = src[i].real();
        im[i] = src[i].imag();
    }
    return t;
}

ComplexImage to_image(const Tensor& t) {
    if (t.c != 2) throw std::invalid_argument("to_image: tensor must have 2 channels");
    ComplexImage img(t.h, t.w);
    const double* re = t.plane(0);
    const double* im = t.plane(1);
    cplx* dst = img.data().data();
    for (std::size_t i = 0; i < img.size(); ++i) dst[i] = cplx(re[i], im[i]);
    return img;
}

void conv2d_out_shape(const Tensor& in, int out_c, int stride, Tensor& out) {
    const int oh = (in.h + stride - 1) / stride;
    const int ow = (in.w + stride - 1) / stride;
    if (out.c != out_c || out.h != oh || out.w != ow) out = Tensor(out_c, oh, ow);
}

void conv2d_forward(const Tensor& in, std::span<const double> weights,
                    std::span<const double> bias, int out_c, int k, int stride, Tensor& out) {
    if (weights.size() != static_cast<std::size_t>(out_c) * in.c * k * k)
        throw std::invalid_argument("conv2d: weight size mismatch");
    if (bias.size() != static_cast<std::size_t>(out_c))
        throw std::invalid_argument("conv2d: bias size mismatch");
    conv2d_out_shape(in, out_c, stride, out);
    const int pad = k / 2;
    const int oh = out.h;
    const int ow = out.w;

    for (int oc = 0; oc < out_c; ++oc) {
        double* oplane = out.plane(oc);
        std::fill(oplane, oplane + static_cast<std::size_t>(oh) * ow, bias[oc]);
        for (int ic = 0; ic < in.c; ++ic) {
            const double* iplane = in.plane(ic);
            const double* wk = weights.data() +
                               (static_cast<std::size_t>(oc) * in.c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = wk[ky * k + kx];
                    if (wv == 0.0) continue;
                    // valid output x-range for this tap
                    int ox_lo = 0;
                    while (ox_lo * stride + kx - pad < 0) ++ox_lo;
                    int ox_hi = ow;
                    while (ox_hi > ox_lo && (ox_hi - 1) * stride + kx - pad >= in.w) --ox_hi;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= in.h) continue;
                        const double* irow = iplane + static_cast<std::size_t>(iy) * in.w;
                        double* orow = oplane + static_cast<std::size_t>(oy) * ow;
                        if (stride == 1) {
                            const double* ir = irow + kx - pad + ox_lo;
                            for (int ox = ox_lo; ox < ox_hi; ++ox)
                                orow[ox] += wv * ir[ox - ox_lo];
                        } else {
                            for (int ox = ox_lo; ox < ox_hi; ++ox)
                                orow[ox] += wv * irow[ox * stride + kx - pad];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward(const Tensor& in, std::span<const double> weights, int out_c, int k,
                     int stride, const Tensor& grad_out, Tensor& grad_in,
                     std::span<double> grad_weights, std::span<double> grad_bias) {
    const int pad = k / 2;
    const int oh = grad_out.h;
    const int ow = grad_out.w;
    if (grad_in.c != in.c || grad_in.h != in.h || grad_in.w != in.w)
        grad_in = Tensor(in.c, in.h, in.w);
    grad_in.zero();

    for (int oc = 0; oc < out_c; ++oc) {
        const double* gplane = grad_out.plane(oc);
        double gb = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) gb += gplane[i];
        grad_bias[oc] += gb;

        for (int ic = 0; ic < in.c; ++ic) {
            const double* iplane = in.plane(ic);
            double* giplane = grad_in.plane(ic);
            const std::size_t wbase = (static_cast<std::size_t>(oc) * in.c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = weights[wbase + ky * k + kx];
                    double gw = 0.0;
                    int ox_lo = 0;
                    while (ox_lo * stride + kx - pad < 0) ++ox_lo;
                    int ox_hi = ow;
                    while (ox_hi > ox_lo && (ox_hi - 1) * stride + kx - pad >= in.w) --ox_hi;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= in.h) continue;
                        const double* irow = iplane + static_cast<std::size_t>(iy) * in.w;
                        double* girow = giplane + static_cast<std::size_t>(iy) * in.w;
                        const double* grow = gplane + static_cast<std::size_t>(oy) * ow;
                        if (stride == 1) {
                            const int off = kx - pad;
                            const double* ir = irow + off + ox_lo;
                            double* gir = girow + off + ox_lo;
                            double acc = 0.0;
                            for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                const double g = grow[ox];
                                acc += g * ir[ox - ox_lo];
                                gir[ox - ox_lo] += wv * g;
                            }
                            gw += acc;
                        } else {
                            for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                const int ix = ox * stride + kx - pad;
                                const double g = grow[ox];
                                gw += g * irow[ix];
                                girow[ix] += wv * g;
                            }
                        }
                    }
                    grad_weights[wbase + ky * k + kx] += gw;
                }
            }
        }
    }
}

void leaky_relu_forward(const Tensor& pre, double slope, Tensor& out) {
    if (out.c != pre.c || out.h != pre.h || out.w != pre.w) out = Tensor(pre.c, pre.h, pre.w);
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const double x = pre.v[i];
        out.v[i] = x > 0.0 ? x : slope * x;
    }
}

void leaky_relu_backward(const Tensor& pre, double slope, Tensor& grad) {
    for (std::size_t i = 0; i < pre.size(); ++i) {
        if (!(pre.v[i] > 0.0)) grad.v[i] *= slope;
    }
}

void upsample2_forward(const Tensor& in, Tensor& out) {
    if (out.c != in.c || out.h != in.h * 2 || out.w != in.w * 2)
        out = Tensor(in.c, in.h * 2, in.w * 2);
    for (int ch = 0; ch < in.c; ++ch) {
        const double* ip = in.plane(ch);
        double* op = out.plane(ch);
        for (int y = 0; y < out.h; ++y) {
            const double* irow = ip + static_cast<std::size_t>(y / 2) * in.w;
            double* orow = op + static_cast<std::size_t>(y) * out.w;
            for (int x = 0; x < out.w; ++x) orow[x] = irow[x / 2];
        }
    }
}

void upsample2_backward(const Tensor& grad_out, Tensor& grad_in) {
    const int ih = grad_out.h / 2;
    const int iw = grad_out.w / 2;
    if (grad_in.c != grad_out.c || grad_in.h != ih || grad_in.w != iw)
        grad_in = Tensor(grad_out.c, ih, iw);
    grad_in.zero();
    for (int ch = 0; ch < grad_out.c; ++ch) {
        const double* gp = grad_out.plane(ch);
        double* ip = grad_in.plane(ch);
        for (int y = 0; y < grad_out.h; ++y) {
            const double* grow = gp + static_cast<std::size_t>(y) * grad_out.w;
            double* irow = ip + static_cast<std::size_t>(y / 2) * iw;
            for (int x = 0; x < grad_out.w; ++x) irow[x / 2] += grow[x];
        }
    }
}

void concat_forward(const Tensor& a, const Tensor& b, Tensor& out) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("concat: spatial mismatch");
    if (out.c != a.c + b.c || out.h != a.h || out.w != a.w)
        out = Tensor(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.v.size());
}

void concat_backward(const Tensor& grad_out, Tensor& grad_a, Tensor& grad_b) {
    std::copy(grad_out.v.begin(), grad_out.v.begin() + grad_a.size(), grad_a.v.begin());
    std::copy(grad_out.v.begin() + grad_a.size(), grad_out.v.end(), grad_b.v.begin());
}

} // namespace kmoco::net
