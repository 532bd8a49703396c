#include "kmoco/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace kmoco {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Twiddle factors e^{-2*pi*i*k/n}, k = 0..n/2-1, for the forward radix-2 pass.
struct Radix2Plan {
    int n;
    std::vector<cplx> twiddle; // size n/2
};

const Radix2Plan& radix2_plan(int n) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<Radix2Plan>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto plan = std::make_unique<Radix2Plan>();
        plan->n = n;
        plan->twiddle.resize(n / 2);
        for (int k = 0; k < n / 2; ++k) {
            const double a = -2.0 * kPi * k / n;
            plan->twiddle[k] = cplx(std::cos(a), std::sin(a));
        }
        it = cache.emplace(n, std::move(plan)).first;
    }
    return *it->second;
}

// Unscaled in-place radix-2 Cooley-Tukey, n a power of two.
void fft_pow2(cplx* a, int n, bool inverse) {
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const Radix2Plan& plan = radix2_plan(n);
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                cplx w = plan.twiddle[static_cast<std::size_t>(k) * step];
                if (inverse) w = std::conj(w);
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// Chirp factors for Bluestein's algorithm at length n, plus the
// precomputed FFT of the chirp filter at padded length m.
struct BluesteinPlan {
    int n;
    int m;
    std::vector<cplx> chirp;    // e^{-i*pi*k^2/n}, k = 0..n-1
    std::vector<cplx> filter_f; // FFT (length m, unscaled) of conj chirp kernel
};

const BluesteinPlan& bluestein_plan(int n) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<BluesteinPlan>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto plan = std::make_unique<BluesteinPlan>();
        plan->n = n;
        plan->m = next_pow2(2 * n - 1);
        plan->chirp.resize(n);
        for (int k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the argument small for large n
            const long long k2 = (static_cast<long long>(k) * k) % (2LL * n);
            const double a = -kPi * static_cast<double>(k2) / n;
            plan->chirp[k] = cplx(std::cos(a), std::sin(a));
        }
        plan->filter_f.assign(plan->m, cplx(0.0, 0.0));
        plan->filter_f[0] = std::conj(plan->chirp[0]);
        for (int k = 1; k < n; ++k) {
            plan->filter_f[k] = std::conj(plan->chirp[k]);
            plan->filter_f[plan->m - k] = std::conj(plan->chirp[k]);
        }
        fft_pow2(plan->filter_f.data(), plan->m, false);
        it = cache.emplace(n, std::move(plan)).first;
    }
    return *it->second;
}

// Unscaled arbitrary-length DFT via Bluestein (chirp-z).
void fft_bluestein(cplx* a, int n, bool inverse) {
    const BluesteinPlan& plan = bluestein_plan(n);
    const int m = plan.m;
    std::vector<cplx> buf(m, cplx(0.0, 0.0));
    if (!inverse) {
        for (int k = 0; k < n; ++k) buf[k] = a[k] * plan.chirp[k];
    } else {
        for (int k = 0; k < n; ++k) buf[k] = a[k] * std::conj(plan.chirp[k]);
    }
    fft_pow2(buf.data(), m, false);
    if (!inverse) {
        for (int k = 0; k < m; ++k) buf[k] *= plan.filter_f[k];
    } else {
        for (int k = 0; k < m; ++k) buf[k] *= std::conj(plan.filter_f[k]);
    }
    fft_pow2(buf.data(), m, true);
    const double scale = 1.0 / m; // undo the unscaled m-point round trip
    if (!inverse) {
        for (int k = 0; k < n; ++k) a[k] = buf[k] * plan.chirp[k] * scale;
    } else {
        for (int k = 0; k < n; ++k) a[k] = buf[k] * std::conj(plan.chirp[k]) * scale;
    }
}

void fft_1d_unscaled(cplx* a, int n, bool inverse) {
    if (n == 1) return;
    if (is_pow2(n)) {
        fft_pow2(a, n, inverse);
    } else {
        fft_bluestein(a, n, inverse);
    }
}

// fftshift <-> ifftshift as index maps. For even sizes the two coincide.
int ifftshift_index(int i, int n) { return (i + (n + 1) / 2) % n; }

ComplexImage fft2_impl(const ComplexImage& img, bool inverse) {
    if (img.height() <= 0 || img.width() <= 0)
        throw std::invalid_argument("fft2: dimensions must be positive");
    const int h = img.height();
    const int w = img.width();

    // pre-shift so the centered origin moves to index 0
    ComplexImage work(h, w);
    for (int r = 0; r < h; ++r) {
        const int sr = ifftshift_index(r, h);
        for (int c = 0; c < w; ++c) work.at(sr, ifftshift_index(c, w)) = img.at(r, c);
    }

    for (int r = 0; r < h; ++r) fft_1d_unscaled(work.row(r), w, inverse);

    std::vector<cplx> col(h);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) col[r] = work.at(r, c);
        fft_1d_unscaled(col.data(), h, inverse);
        for (int r = 0; r < h; ++r) work.at(r, c) = col[r];
    }

    // post-shift back to the centered convention, orthonormal scaling
    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    ComplexImage out(h, w);
    for (int r = 0; r < h; ++r) {
        const int sr = ifftshift_index(r, h);
        for (int c = 0; c < w; ++c) out.at(r, c) = work.at(sr, ifftshift_index(c, w)) * scale;
    }
    return out;
}

} // namespace

void fft_1d(cplx* data, int n, bool inverse) {
    if (n <= 0) throw std::invalid_argument("fft_1d: length must be positive");
    fft_1d_unscaled(data, n, inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) data[i] *= scale;
}

ComplexImage fft2_centered(const ComplexImage& img) { return fft2_impl(img, false); }

ComplexImage ifft2_centered(const ComplexImage& k) { return fft2_impl(k, true); }

ComplexImage circular_shift(const ComplexImage& img, int shift_rows, int shift_cols) {
    const int h = img.height();
    const int w = img.width();
    ComplexImage out(h, w);
    const int sr = ((shift_rows % h) + h) % h;
    const int sc = ((shift_cols % w) + w) % w;
    for (int r = 0; r < h; ++r) {
        const int src_r = (r - sr + h) % h;
        for (int c = 0; c < w; ++c) out.at(r, c) = img.at(src_r, (c - sc + w) % w);
    }
    return out;
}

} // namespace kmoco
