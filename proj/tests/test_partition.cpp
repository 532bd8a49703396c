#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kmoco/fft.hpp"
#include "kmoco/partition.hpp"
#include "kmoco/phantom.hpp"
#include "oracles.hpp"

#include <set>

using namespace kmoco;

namespace {

MultiCoilKSpace project_phantom(std::uint64_t seed, const SensitivityMaps& maps,
                                const ScanOrder& order, int h) {
    const Phantom ph = synth_phantom(seed, h, order.n_columns());
    return coil_project(ph.image, maps, order);
}

cplx inner(const ComplexImage& a, const ComplexImage& b) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * std::conj(b.data()[i]);
    return acc;
}

} // namespace

TEST_CASE("select_dp keeps pose 0 for a motion well past the center block") {
    const ScanOrder order = build_scan_order(ScanOrder::Kind::FS260, 260);
    MotionTrace tr;
    tr.timings = {87};
    tr.transforms = {RigidTransform{}};
    const DpSelection sel = select_dp(order, tr, 32);
    CHECK(sel.pose_index == 0);
    CHECK(sel.center_coverage == 32);
    CHECK(sel.mask.count() == 87);
    // the mask is exactly pose 0's column set
    const auto poses = pose_intervals(order, tr);
    for (int col : poses[0]) CHECK(sel.mask.bits[col] == 1);
}

TEST_CASE("select_dp switches to pose 1 for a near-immediate motion") {
    const ScanOrder order = build_scan_order(ScanOrder::Kind::FS260, 260);
    MotionTrace tr;
    tr.timings = {1};
    tr.transforms = {RigidTransform{}};
    const DpSelection sel = select_dp(order, tr, 32);
    CHECK(sel.pose_index == 1);
    CHECK(sel.center_coverage == 31);
    CHECK(sel.mask.count() == 259);
}

TEST_CASE("select_dp with no motions keeps every sampled column") {
    const ScanOrder order = build_scan_order(ScanOrder::Kind::US260, 260);
    const DpSelection sel = select_dp(order, MotionTrace{}, 32);
    CHECK(sel.pose_index == 0);
    CHECK(sel.mask.count() == 133);
}

TEST_CASE("select_dp uses timings only, never the transforms") {
    const ScanOrder order = build_scan_order(ScanOrder::Kind::FS256, 256);
    MotionTrace a, b;
    a.timings = b.timings = {30, 90};
    a.transforms = {RigidTransform{0.1, 1.0, 1.0}, RigidTransform{0.2, -4.0, 2.0}};
    b.transforms = {RigidTransform{-0.1, -3.0, 0.5}, RigidTransform{0.0, 0.0, 4.9}};
    const DpSelection sa = select_dp(order, a, 32);
    const DpSelection sb = select_dp(order, b, 32);
    CHECK(sa.pose_index == sb.pose_index);
    CHECK(sa.mask.bits == sb.mask.bits);
}

TEST_CASE("split is an exact partition, bit for bit") {
    Rng rng(51);
    const SensitivityMaps maps = biot_savart_maps(16, 16, 3, 9.0);
    const MultiCoilKSpace k = project_phantom(1, maps, make_full_order(16), 16);
    SampleMask m = SampleMask::zeros(16);
    for (int c = 0; c < 16; ++c) m.bits[c] = rng.uniform() < 0.5 ? 1 : 0;
    const auto [dp, rp] = split(k, m);
    for (int i = 0; i < 3; ++i) {
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 16; ++c) {
                const cplx sum = dp.planes[i].at(r, c) + rp.planes[i].at(r, c);
                CHECK(sum == k.planes[i].at(r, c));
                if (m.bits[c]) {
                    CHECK(rp.planes[i].at(r, c) == cplx(0.0, 0.0));
                } else {
                    CHECK(dp.planes[i].at(r, c) == cplx(0.0, 0.0));
                }
            }
        }
    }

    const auto [dp_all, rp_all] = split(k, SampleMask::ones(16));
    for (int i = 0; i < 3; ++i) CHECK(rp_all.planes[i].norm2() == 0.0);
    const auto [dp_none, rp_none] = split(k, SampleMask::zeros(16));
    for (int i = 0; i < 3; ++i) CHECK(dp_none.planes[i].norm2() == 0.0);

    CHECK_THROWS_AS(split(k, SampleMask::ones(8)), std::invalid_argument);
}

TEST_CASE("zero_filled_recon recovers the source under a full mask") {
    const Phantom ph = synth_phantom(3, 16, 16);
    const SensitivityMaps maps = biot_savart_maps(16, 16, 4, 9.0);
    const MultiCoilKSpace k = coil_project(ph.image, maps, make_full_order(16));
    CHECK(oracle::rel_err(zero_filled_recon(k, maps), ph.image) < 1e-10);

    MultiCoilKSpace zero;
    zero.order = k.order;
    zero.planes.assign(4, ComplexImage(16, 16));
    CHECK(zero_filled_recon(zero, maps).norm2() == 0.0);
}

TEST_CASE("half-mask impulse reconstruction matches the direct DFT point spread") {
    // unit maps so the recon is exactly ifft2( mask .* fft2(impulse) )
    SensitivityMaps unit;
    unit.maps.push_back(ComplexImage(16, 16));
    for (cplx& v : unit.maps[0].data()) v = cplx(1.0, 0.0);

    ComplexImage impulse(16, 16);
    impulse.at(8, 8) = cplx(1.0, 0.0);
    const MultiCoilKSpace k = coil_project(impulse, unit, make_full_order(16));
    SampleMask half = SampleMask::zeros(16);
    for (int c = 0; c < 8; ++c) half.bits[c] = 1;
    const auto [dp, rp] = split(k, half);
    const ComplexImage got = zero_filled_recon(dp, unit);

    ComplexImage masked(16, 16);
    const ComplexImage full = oracle::dft2_centered(impulse, false);
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 8; ++c) masked.at(r, c) = full.at(r, c);
    }
    const ComplexImage want = oracle::dft2_centered(masked, true);
    CHECK(oracle::rel_err(got, want) < 1e-11);
}

TEST_CASE("data consistency: empty mask is the identity") {
    Rng rng(52);
    const ComplexImage x = oracle::random_image(rng, 16, 16);
    const SensitivityMaps maps = oracle::random_maps(rng, 16, 16, 3);
    MultiCoilKSpace k_dp;
    k_dp.order = make_full_order(16);
    k_dp.planes.assign(3, ComplexImage(16, 16));
    const ComplexImage out = data_consistency(x, SampleMask::zeros(16), k_dp, maps);
    CHECK(oracle::rel_err(out, x) < 1e-10);
}

TEST_CASE("data consistency: full mask reproduces the zero-filled recon") {
    Rng rng(53);
    const ComplexImage x = oracle::random_image(rng, 16, 16);
    const SensitivityMaps maps = biot_savart_maps(16, 16, 3, 9.0);
    const MultiCoilKSpace k = project_phantom(5, maps, make_full_order(16), 16);
    const ComplexImage out = data_consistency(x, SampleMask::ones(16), k, maps);
    CHECK(oracle::rel_err(out, zero_filled_recon(k, maps)) < 1e-12);
}

TEST_CASE("data consistency: coil-consistent estimates are fixed points") {
    Rng rng(54);
    for (int trial = 0; trial < 5; ++trial) {
        const Phantom ph = synth_phantom(600 + trial, 16, 16);
        const SensitivityMaps maps = oracle::random_maps(rng, 16, 16, 4);
        const MultiCoilKSpace k = coil_project(ph.image, maps, make_full_order(16));
        SampleMask m = SampleMask::zeros(16);
        for (int c = 0; c < 16; ++c) m.bits[c] = rng.uniform() < 0.4 ? 1 : 0;
        const auto [k_dp, k_rp] = split(k, m);
        const ComplexImage out = data_consistency(ph.image, m, k_dp, maps);
        CHECK(oracle::rel_err(out, ph.image) < 1e-10);
    }
}

TEST_CASE("data consistency decomposes into affine + linear parts") {
    Rng rng(55);
    const SensitivityMaps maps = oracle::random_maps(rng, 16, 16, 3);
    const MultiCoilKSpace k = project_phantom(9, maps, make_full_order(16), 16);
    SampleMask m = SampleMask::zeros(16);
    for (int c = 0; c < 16; ++c) m.bits[c] = rng.uniform() < 0.5 ? 1 : 0;
    const auto [k_dp, k_rp] = split(k, m);

    const ComplexImage u = oracle::random_image(rng, 16, 16);
    const ComplexImage v = oracle::random_image(rng, 16, 16);
    const cplx a(0.6, -1.2), b(-0.9, 0.3);

    // superposition on the linear part
    ComplexImage combo(16, 16);
    for (std::size_t i = 0; i < combo.size(); ++i)
        combo.data()[i] = a * u.data()[i] + b * v.data()[i];
    const ComplexImage lin_combo = data_consistency_linear(combo, m, maps);
    const ComplexImage lin_u = data_consistency_linear(u, m, maps);
    const ComplexImage lin_v = data_consistency_linear(v, m, maps);
    ComplexImage want(16, 16);
    for (std::size_t i = 0; i < want.size(); ++i)
        want.data()[i] = a * lin_u.data()[i] + b * lin_v.data()[i];
    CHECK(oracle::rel_err(lin_combo, want) < 1e-10);

    // dc(x) == dc(0) + A x
    const ComplexImage dc_zero = data_consistency(ComplexImage(16, 16), m, k_dp, maps);
    const ComplexImage dc_u = data_consistency(u, m, k_dp, maps);
    ComplexImage recon(16, 16);
    for (std::size_t i = 0; i < recon.size(); ++i)
        recon.data()[i] = dc_zero.data()[i] + lin_u.data()[i];
    CHECK(oracle::rel_err(dc_u, recon) < 1e-10);
}

TEST_CASE("the linear part of data consistency is self-adjoint") {
    Rng rng(56);
    for (int trial = 0; trial < 5; ++trial) {
        const SensitivityMaps maps = oracle::random_maps(rng, 16, 16, 3);
        SampleMask m = SampleMask::zeros(16);
        for (int c = 0; c < 16; ++c) m.bits[c] = rng.uniform() < 0.5 ? 1 : 0;
        const ComplexImage u = oracle::random_image(rng, 16, 16);
        const ComplexImage v = oracle::random_image(rng, 16, 16);
        const cplx lhs = inner(data_consistency_linear(u, m, maps), v);
        const cplx rhs = inner(u, data_consistency_linear(v, m, maps));
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("k_dp with data off the mask is rejected") {
    Rng rng(57);
    const SensitivityMaps maps = biot_savart_maps(16, 16, 2, 9.0);
    const MultiCoilKSpace k = project_phantom(11, maps, make_full_order(16), 16);
    SampleMask m = SampleMask::zeros(16);
    m.bits[3] = 1;
    // full k-space is nonzero on unmasked columns
    CHECK_THROWS_AS(data_consistency(ComplexImage(16, 16), m, k, maps),
                    std::invalid_argument);
}

TEST_CASE("DP masks equal the DP pose's column set across random traces") {
    Rng rng(58);
    for (auto kind : {ScanOrder::Kind::FS256, ScanOrder::Kind::FS260, ScanOrder::Kind::US260}) {
        const int width = kind == ScanOrder::Kind::FS256 ? 256 : 260;
        const ScanOrder order = build_scan_order(kind, width);
        MotionConfig cfg;
        for (int trial = 0; trial < 30; ++trial) {
            const MotionTrace tr = sample_motion_trace(rng, order, cfg);
            const DpSelection sel = select_dp(order, tr, 32);
            const auto poses = pose_intervals(order, tr);
            std::set<int> mask_cols;
            for (int c = 0; c < width; ++c) {
                if (sel.mask.bits[c]) mask_cols.insert(c);
            }
            CHECK(mask_cols ==
                  std::set<int>(poses[sel.pose_index].begin(), poses[sel.pose_index].end()));
        }
    }
}
