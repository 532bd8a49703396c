#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kmoco/fft.hpp"
#include "kmoco/phantom.hpp"
#include "kmoco/resample.hpp"
#include "oracles.hpp"

using namespace kmoco;

TEST_CASE("fft2_centered: unit impulse at center becomes a constant plane") {
    ComplexImage x(8, 8);
    x.at(4, 4) = cplx(1.0, 0.0);
    const ComplexImage k = fft2_centered(x);
    for (const cplx& v : k.data()) {
        CHECK(v.real() == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("ifft2_centered: constant plane becomes the center impulse") {
    ComplexImage k(8, 8);
    for (cplx& v : k.data()) v = cplx(0.125, 0.0);
    const ComplexImage x = ifft2_centered(k);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            const double want = (r == 4 && c == 4) ? 1.0 : 0.0;
            CHECK(std::abs(x.at(r, c) - cplx(want, 0.0)) < 1e-13);
        }
    }
}

TEST_CASE("fft2/ifft2 are mutually inverse") {
    Rng rng(11);
    const ComplexImage x = oracle::random_image(rng, 16, 16);
    CHECK(oracle::rel_err(ifft2_centered(fft2_centered(x)), x) < 1e-12);
    const ComplexImage k = oracle::random_image(rng, 16, 16);
    CHECK(oracle::rel_err(fft2_centered(ifft2_centered(k)), k) < 1e-12);
}

TEST_CASE("fft2 preserves the l2 norm (Parseval, direct summation)") {
    Rng rng(12);
    const ComplexImage x = oracle::random_image(rng, 32, 32);
    double direct = 0.0;
    for (const cplx& v : x.data()) direct += std::norm(v);
    const ComplexImage k = fft2_centered(x);
    double transformed = 0.0;
    for (const cplx& v : k.data()) transformed += std::norm(v);
    CHECK(std::sqrt(transformed) == doctest::Approx(std::sqrt(direct)).epsilon(1e-12));
}

TEST_CASE("fft2 matches the brute-force centered DFT, even and odd sizes") {
    Rng rng(13);
    for (auto [h, w] : {std::pair{8, 8}, std::pair{6, 10}, std::pair{13, 13},
                        std::pair{12, 20}}) {
        const ComplexImage x = oracle::random_image(rng, h, w);
        CHECK(oracle::rel_err(fft2_centered(x), oracle::dft2_centered(x, false)) < 1e-11);
        CHECK(oracle::rel_err(ifft2_centered(x), oracle::dft2_centered(x, true)) < 1e-11);
    }
}

TEST_CASE("Bluestein path handles the production widths 260 and 300") {
    Rng rng(14);
    const ComplexImage x = oracle::random_image(rng, 10, 260);
    CHECK(oracle::rel_err(ifft2_centered(fft2_centered(x)), x) < 1e-12);
    const ComplexImage y = oracle::random_image(rng, 300, 4);
    CHECK(oracle::rel_err(ifft2_centered(fft2_centered(y)), y) < 1e-12);
}

TEST_CASE("single nonzero k-space column gives row-constant magnitude") {
    ComplexImage k(16, 16);
    for (int r = 0; r < 16; ++r) k.at(r, 11) = cplx(0.3, -0.1);
    const ComplexImage x = ifft2_centered(k);
    const ComplexImage want = oracle::dft2_centered(k, true);
    CHECK(oracle::rel_err(x, want) < 1e-11);
    for (int r = 0; r < 16; ++r) {
        const double m0 = std::abs(x.at(r, 0));
        for (int c = 1; c < 16; ++c) CHECK(std::abs(x.at(r, c)) == doctest::Approx(m0).epsilon(1e-10));
    }
}

TEST_CASE("fft2 is linear") {
    Rng rng(15);
    const ComplexImage x = oracle::random_image(rng, 16, 16);
    const ComplexImage y = oracle::random_image(rng, 16, 16);
    const cplx a(0.7, -0.2), b(-1.1, 0.4);
    ComplexImage combo(16, 16);
    for (std::size_t i = 0; i < combo.size(); ++i)
        combo.data()[i] = a * x.data()[i] + b * y.data()[i];
    const ComplexImage lhs = fft2_centered(combo);
    const ComplexImage kx = fft2_centered(x);
    const ComplexImage ky = fft2_centered(y);
    ComplexImage rhs(16, 16);
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs.data()[i] = a * kx.data()[i] + b * ky.data()[i];
    CHECK(oracle::rel_err(lhs, rhs) < 1e-12);
}

TEST_CASE("shift theorem: circular shifts become centered phase ramps") {
    Rng rng(16);
    for (int trial = 0; trial < 5; ++trial) {
        const int h = 16, w = 16;
        const ComplexImage x = oracle::random_image(rng, h, w);
        const int dr = static_cast<int>(rng.uniform_int(h)) - h / 2;
        const int dc = static_cast<int>(rng.uniform_int(w)) - w / 2;
        const ComplexImage shifted = circular_shift(x, dr, dc);
        const ComplexImage lhs = fft2_centered(shifted);
        const ComplexImage base = fft2_centered(x);
        ComplexImage rhs(h, w);
        for (int kr = 0; kr < h; ++kr) {
            for (int kc = 0; kc < w; ++kc)
                rhs.at(kr, kc) = base.at(kr, kc) * oracle::shift_ramp(kr, kc, h, w, dr, dc);
        }
        CHECK(oracle::rel_err(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("fft2 rejects empty images") {
    CHECK_THROWS_AS(fft2_centered(ComplexImage()), std::invalid_argument);
}

TEST_CASE("hadamard product basics") {
    Rng rng(17);
    const ComplexImage a = oracle::random_image(rng, 8, 8);
    ComplexImage ones(8, 8);
    for (cplx& v : ones.data()) v = cplx(1.0, 0.0);
    CHECK(oracle::max_abs_diff(hadamard(a, ones), a) == 0.0);

    const ComplexImage sq = hadamard_conj(a, a);
    for (std::size_t i = 0; i < sq.size(); ++i) {
        CHECK(sq.data()[i].real() == doctest::Approx(std::norm(a.data()[i])).epsilon(1e-14));
        CHECK(std::abs(sq.data()[i].imag()) <= 1e-15);
    }

    ComplexImage p(4, 4), q(4, 4);
    for (cplx& v : p.data()) v = cplx(1.0, 1.0);
    for (cplx& v : q.data()) v = cplx(1.0, -1.0);
    const ComplexImage prod = hadamard(p, q);
    for (const cplx& v : prod.data()) CHECK(v == cplx(2.0, 0.0));

    CHECK_THROWS_AS(hadamard(a, ComplexImage(4, 4)), std::invalid_argument);
}

TEST_CASE("resample_rigid: identity transform is bit-exact") {
    Rng rng(18);
    const ComplexImage x = oracle::random_image(rng, 12, 9);
    const ComplexImage y = resample_rigid(x, RigidTransform{});
    CHECK(oracle::max_abs_diff(x, y) == 0.0);
}

TEST_CASE("resample_rigid: integer shift equals circular shift away from the border") {
    const Phantom ph = synth_phantom(5, 32, 32); // zero border ring of width 4
    RigidTransform t;
    t.shift_x = 3.0;
    t.shift_y = -2.0;
    const ComplexImage moved = resample_rigid(ph.image, t);
    const ComplexImage circ = circular_shift(ph.image, -2, 3);
    CHECK(oracle::max_abs_diff(moved, circ) == 0.0);
}

TEST_CASE("resample_rigid: +-90 degree round trip stays within the measured bound") {
    const Phantom ph = synth_phantom(21, 64, 64);
    RigidTransform fwd;
    fwd.angle = 1.5707963267948966;
    RigidTransform back;
    back.angle = -1.5707963267948966;
    const ComplexImage round = resample_rigid(resample_rigid(ph.image, fwd), back);

    double num = 0.0, den = 0.0;
    for (int r = 8; r < 56; ++r) {
        for (int c = 8; c < 56; ++c) {
            num += std::norm(round.at(r, c) - ph.image.at(r, c));
            den += std::norm(ph.image.at(r, c));
        }
    }
    CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("resample_rigid validates the transform") {
    const ComplexImage x(16, 16);
    RigidTransform t;
    t.shift_x = 20.0;
    CHECK_THROWS_AS(resample_rigid(x, t), std::invalid_argument);
    t.shift_x = 0.0;
    t.angle = 4.0;
    CHECK_THROWS_AS(resample_rigid(x, t), std::invalid_argument);
}
