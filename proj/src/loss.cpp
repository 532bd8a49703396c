#include "kmoco/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kmoco {

using net::Tensor;

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// mirror (symmetric) index: ...cba|abc...xyz|zyx...
int reflect(int i, int n) {
    if (i < 0) return -1 - i;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

// separable correlation with the window along rows then columns
void corr2(const Tensor& in, const std::vector<double>& win, Tensor& tmp, Tensor& out) {
    const int h = in.h, w = in.w;
    const int half = static_cast<int>(win.size()) / 2;
    if (tmp.h != h || tmp.w != w || tmp.c != 1) tmp = Tensor(1, h, w);
    if (out.h != h || out.w != w || out.c != 1) out = Tensor(1, h, w);
    for (int y = 0; y < h; ++y) {
        const double* irow = in.plane(0) + static_cast<std::size_t>(y) * w;
        double* trow = tmp.plane(0) + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int o = -half; o <= half; ++o) acc += win[o + half] * irow[reflect(x + o, w)];
            trow[x] = acc;
        }
    }
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int o = -half; o <= half; ++o)
                acc += win[o + half] * tmp.at(0, reflect(y + o, h), x);
            out.at(0, y, x) = acc;
        }
    }
}

// adjoint of corr2 (scatter with the same mirror index map, reversed axis order)
void corr2_adjoint(const Tensor& g, const std::vector<double>& win, Tensor& tmp, Tensor& out) {
    const int h = g.h, w = g.w;
    const int half = static_cast<int>(win.size()) / 2;
    if (tmp.h != h || tmp.w != w || tmp.c != 1) tmp = Tensor(1, h, w);
    if (out.h != h || out.w != w || out.c != 1) out = Tensor(1, h, w);
    tmp.zero();
    out.zero();
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            const double v = g.at(0, y, x);
            if (v == 0.0) continue;
            for (int o = -half; o <= half; ++o)
                tmp.at(0, reflect(y + o, h), x) += win[o + half] * v;
        }
    }
    for (int y = 0; y < h; ++y) {
        double* trow = tmp.plane(0) + static_cast<std::size_t>(y) * w;
        double* orow = out.plane(0) + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const double v = trow[x];
            if (v == 0.0) continue;
            for (int o = -half; o <= half; ++o) orow[reflect(x + o, w)] += win[o + half] * v;
        }
    }
}

double max_of(const Tensor& t) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : t.v) m = std::max(m, v);
    return m;
}

// (factor)^exponent with the clamping rule for fractional exponents
double pow_clamped(double base, double e, double* dbase) {
    if (e == 1.0) {
        if (dbase) *dbase = 1.0;
        return base;
    }
    if (base <= 0.0) {
        if (dbase) *dbase = 0.0;
        return 0.0;
    }
    const double p = std::pow(base, e);
    if (dbase) *dbase = e * p / base;
    return p;
}

struct LocalStats {
    Tensor mu_x, mu_y, vx_raw, vy_raw, cxy_raw;
};

void compute_stats(const Tensor& x, const Tensor& y, const std::vector<double>& win,
                   LocalStats& s) {
    const int h = x.h, w = x.w;
    Tensor tmp, prod(1, h, w);
    corr2(x, win, tmp, s.mu_x);
    corr2(y, win, tmp, s.mu_y);

    for (std::size_t i = 0; i < prod.size(); ++i) prod.v[i] = x.v[i] * x.v[i];
    corr2(prod, win, tmp, s.vx_raw);
    for (std::size_t i = 0; i < prod.size(); ++i) prod.v[i] = y.v[i] * y.v[i];
    corr2(prod, win, tmp, s.vy_raw);
    for (std::size_t i = 0; i < prod.size(); ++i) prod.v[i] = x.v[i] * y.v[i];
    corr2(prod, win, tmp, s.cxy_raw);

    for (std::size_t i = 0; i < s.vx_raw.size(); ++i) {
        s.vx_raw.v[i] -= s.mu_x.v[i] * s.mu_x.v[i];
        s.vy_raw.v[i] -= s.mu_y.v[i] * s.mu_y.v[i];
        s.cxy_raw.v[i] -= s.mu_x.v[i] * s.mu_y.v[i];
    }
}

void check_pair(const Tensor& x, const Tensor& y, const LossParams& p) {
    if (x.c != 1 || y.c != 1)
        throw std::invalid_argument("ssim: inputs must be single-channel");
    if (x.h != y.h || x.w != y.w) throw std::invalid_argument("ssim: shape mismatch");
    const int half = p.window / 2;
    if (x.h <= half || x.w <= half)
        throw std::invalid_argument("ssim: image smaller than the window half-width");
}

} // namespace

double ssim_c(const Tensor& x, const Tensor& y, const LossParams& p, Tensor* grad_x) {
    check_pair(x, y, p);
    const std::vector<double> win = gaussian_window(p.window, p.sigma);
    const double ymax = max_of(y);
    // squared offsets stay positive for negative maxima; a tiny floor keeps
    // all-zero targets finite without disturbing the exact self-similarity
    const double c1 = std::max(p.c1_factor * ymax * p.c1_factor * ymax, 1e-300);
    const double c2 = std::max(p.c2_factor * ymax * p.c2_factor * ymax, 1e-300);

    LocalStats st;
    compute_stats(x, y, win, st);

    const std::size_t n = x.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    Tensor d_mu(1, x.h, x.w), d_vx(1, x.h, x.w), d_cxy(1, x.h, x.w);
    double mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = st.mu_x.v[i];
        const double my = st.mu_y.v[i];
        const double vx = std::max(st.vx_raw.v[i], 0.0);
        const double vy = std::max(st.vy_raw.v[i], 0.0);
        const double cxy = st.cxy_raw.v[i];
        const double s = std::sqrt(vx * vy);

        const double n1 = 2.0 * mx * my + c1;
        const double d1 = mx * mx + my * my + c1;
        const double f1 = n1 / d1;
        const double n2 = 2.0 * s + c2;
        const double d2 = vx + vy + c2;
        const double f2 = n2 / d2;
        const double n3 = cxy + 0.5 * c2;
        const double d3 = s + 0.5 * c2;
        const double f3 = n3 / d3;

        double dF1, dF2, dF3;
        const double F1 = pow_clamped(f1, p.alpha, grad_x ? &dF1 : nullptr);
        const double F2 = pow_clamped(f2, p.beta, grad_x ? &dF2 : nullptr);
        const double F3 = pow_clamped(f3, p.gamma, grad_x ? &dF3 : nullptr);
        mean_p += F1 * F2 * F3;

        if (grad_x) {
            const double dP = -0.5 * inv_n; // dL/dP at this pixel
            const double g1 = dP * dF1 * F2 * F3;
            const double g2 = dP * F1 * dF2 * F3;
            const double g3 = dP * F1 * F2 * dF3;

            const double df1_dmx = (2.0 * my * d1 - n1 * 2.0 * mx) / (d1 * d1);
            const double ds = g2 * (2.0 / d2) + g3 * (-n3 / (d3 * d3));
            const double ds_dvx = (s > 0.0) ? vy / (2.0 * s) : 0.0;
            double dvx = g2 * (-n2 / (d2 * d2)) + ds * ds_dvx;
            if (st.vx_raw.v[i] <= 0.0) dvx = 0.0; // clamped variance
            const double dcxy = g3 / d3;

            d_mu.v[i] = g1 * df1_dmx - 2.0 * mx * dvx - my * dcxy;
            d_vx.v[i] = dvx;
            d_cxy.v[i] = dcxy;
        }
    }
    mean_p *= inv_n;
    const double loss = 0.5 - 0.5 * mean_p;

    if (grad_x) {
        Tensor tmp, a_mu, a_vx, a_cxy;
        corr2_adjoint(d_mu, win, tmp, a_mu);
        corr2_adjoint(d_vx, win, tmp, a_vx);
        corr2_adjoint(d_cxy, win, tmp, a_cxy);
        if (grad_x->c != 1 || grad_x->h != x.h || grad_x->w != x.w)
            *grad_x = Tensor(1, x.h, x.w);
        for (std::size_t i = 0; i < n; ++i)
            grad_x->v[i] = a_mu.v[i] + 2.0 * x.v[i] * a_vx.v[i] + y.v[i] * a_cxy.v[i];
    }
    return loss;
}

double total_loss(const ComplexImage& x_out, const ComplexImage& y_dp, const LossParams& p,
                  ComplexImage* grad_x) {
    if (!x_out.same_shape(y_dp)) throw std::invalid_argument("total_loss: shape mismatch");
    const Tensor xr = real_part(x_out);
    const Tensor xi = imag_part(x_out);
    const Tensor yr = real_part(y_dp);
    const Tensor yi = imag_part(y_dp);
    Tensor gr, gi;
    const double lr = ssim_c(xr, yr, p, grad_x ? &gr : nullptr);
    const double li = ssim_c(xi, yi, p, grad_x ? &gi : nullptr);
    if (grad_x) {
        *grad_x = ComplexImage(x_out.height(), x_out.width());
        cplx* g = grad_x->data().data();
        for (std::size_t i = 0; i < grad_x->size(); ++i) g[i] = cplx(gr.v[i], gi.v[i]);
    }
    return lr + li;
}

double ssim(const Tensor& x, const Tensor& y, const LossParams& p, double data_max) {
    check_pair(x, y, p);
    const std::vector<double> win = gaussian_window(p.window, p.sigma);
    const double c1 = std::max(p.c1_factor * data_max * p.c1_factor * data_max, 1e-300);
    const double c2 = std::max(p.c2_factor * data_max * p.c2_factor * data_max, 1e-300);

    LocalStats st;
    compute_stats(x, y, win, st);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mx = st.mu_x.v[i];
        const double my = st.mu_y.v[i];
        const double vx = std::max(st.vx_raw.v[i], 0.0);
        const double vy = std::max(st.vy_raw.v[i], 0.0);
        const double cxy = st.cxy_raw.v[i];
        acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return acc / static_cast<double>(x.size());
}

double ssim(const Tensor& x, const Tensor& y, const LossParams& p) {
    return ssim(x, y, p, max_of(y));
}

double nmse(const ComplexImage& x, const ComplexImage& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("nmse: shape mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::norm(x.data()[i] - y.data()[i]);
        den += std::norm(y.data()[i]);
    }
    if (den == 0.0) throw std::invalid_argument("nmse: zero reference");
    return num / den;
}

Tensor magnitude_image(const ComplexImage& img) {
    Tensor t(1, img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i) t.v[i] = std::abs(img.data()[i]);
    return t;
}

Tensor real_part(const ComplexImage& img) {
    Tensor t(1, img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i) t.v[i] = img.data()[i].real();
    return t;
}

Tensor imag_part(const ComplexImage& img) {
    Tensor t(1, img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i) t.v[i] = img.data()[i].imag();
    return t;
}

} // namespace kmoco
