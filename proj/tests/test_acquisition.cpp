#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kmoco/coils.hpp"
#include "kmoco/fft.hpp"
#include "kmoco/scan_order.hpp"
#include "oracles.hpp"

#include <set>
#include <sstream>

using namespace kmoco;

TEST_CASE("FS256 starts at the zero-frequency column k_x=128") {
    const ScanOrder o = build_scan_order(ScanOrder::Kind::FS256, 256);
    CHECK(o.column_at(0) == 128);
    CHECK(o.t_center() == 0);
    CHECK(o.length() == 256);
}

TEST_CASE("FS260 covers all 260 columns exactly once, center first") {
    const ScanOrder o = build_scan_order(ScanOrder::Kind::FS260, 260);
    CHECK(o.length() == 260);
    CHECK(o.t_center() == 0);
    CHECK(o.column_at(0) == 130);
    std::set<int> cols;
    for (const auto& e : o.timings()) cols.insert(e.column);
    CHECK(cols.size() == 260);
    CHECK(*cols.begin() == 0);
    CHECK(*cols.rbegin() == 259);
}

TEST_CASE("US260 acquires exactly 133 distinct columns of 260") {
    const ScanOrder o = build_scan_order(ScanOrder::Kind::US260, 260);
    CHECK(o.length() == 133);
    std::set<int> cols;
    for (const auto& e : o.timings()) cols.insert(e.column);
    CHECK(cols.size() == 133);
    // dense center: the 64 innermost ranks are all present
    const std::vector<int> by_rank = columns_by_center_rank(260);
    for (int r = 0; r < 64; ++r) CHECK(cols.count(by_rank[r]) == 1);
}

TEST_CASE("every built-in order revalidates as an injection") {
    for (auto kind : {ScanOrder::Kind::FS256, ScanOrder::Kind::FS260, ScanOrder::Kind::US260}) {
        const int width = kind == ScanOrder::Kind::FS256 ? 256 : 260;
        const ScanOrder o = build_scan_order(kind, width);
        std::vector<ScanOrder::Timing> copy = o.timings();
        CHECK_NOTHROW(ScanOrder(kind, width, std::move(copy)));
    }
}

TEST_CASE("unsupported width/kind combinations are rejected") {
    CHECK_THROWS_AS(build_scan_order(ScanOrder::Kind::FS256, 260), std::invalid_argument);
    CHECK_THROWS_AS(build_scan_order(ScanOrder::Kind::US260, 256), std::invalid_argument);
}

TEST_CASE("scan order text round trip reproduces the FS256 timing list") {
    const ScanOrder o = build_scan_order(ScanOrder::Kind::FS256, 256);
    std::stringstream buf;
    save_scan_order(o, buf);
    const ScanOrder back = load_scan_order(buf);
    REQUIRE(back.length() == o.length());
    for (int t = 0; t < o.length(); ++t) CHECK(back.column_at(t) == o.column_at(t));
    CHECK(back.kind() == o.kind());

    std::stringstream again;
    save_scan_order(back, again);
    std::stringstream first;
    save_scan_order(o, first);
    CHECK(again.str() == first.str());
}

TEST_CASE("t_center is derived by lookup from the loaded file") {
    std::stringstream buf;
    buf << "scanorder v1 kind=Custom width=256\n";
    buf << "0,10\n1,20\n2,30\n3,40\n4,50\n5,128\n6,60\n";
    const ScanOrder o = load_scan_order(buf);
    CHECK(o.t_center() == 5);
}

TEST_CASE("duplicate columns in a scan order file are rejected") {
    std::stringstream buf;
    buf << "scanorder v1 kind=Custom width=16\n0,7\n1,3\n2,7\n";
    CHECK_THROWS_AS(load_scan_order(buf), std::invalid_argument);
}

TEST_CASE("FS kinds must include the zero-frequency column") {
    std::stringstream buf;
    buf << "scanorder v1 kind=FS256 width=256\n";
    for (int t = 0; t < 256; ++t) {
        // swap column 128 out for a duplicate-free but centerless list
        int col = t;
        buf << t << "," << (col == 128 ? 128 : col) << "\n";
    }
    CHECK_NOTHROW([&] {
        std::stringstream ok(buf.str());
        load_scan_order(ok);
    }());

    std::stringstream bad;
    bad << "scanorder v1 kind=Custom width=256\n0,1\n1,2\n";
    CHECK_NOTHROW([&] {
        std::stringstream s(bad.str());
        const ScanOrder o = load_scan_order(s);
        CHECK(o.t_center() == -1);
    }());
}

TEST_CASE("biot_savart_maps satisfy the per-pixel sum-of-squares invariant") {
    for (int n_coils : {1, 3, 8}) {
        const SensitivityMaps maps = biot_savart_maps(24, 20, n_coils, 14.0);
        for (int r = 0; r < 24; ++r) {
            for (int c = 0; c < 20; ++c) {
                double ss = 0.0;
                for (const ComplexImage& m : maps.maps) ss += std::norm(m.at(r, c));
                CHECK(ss == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("single coil normalizes to unit magnitude everywhere") {
    const SensitivityMaps maps = biot_savart_maps(16, 16, 1, 10.0);
    for (const cplx& v : maps.maps[0].data())
        CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("8-coil geometry: opposite coils are 180-degree rotations") {
    const SensitivityMaps maps = biot_savart_maps(64, 64, 8, 36.0);
    for (int i = 0; i < 4; ++i) {
        const ComplexImage& a = maps.maps[i];
        const ComplexImage& b = maps.maps[i + 4];
        double worst = 0.0;
        for (int r = 0; r < 64; ++r) {
            for (int c = 0; c < 64; ++c)
                worst = std::max(worst, std::abs(b.at(r, c) - a.at(63 - r, 63 - c)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("biot_savart_maps is bit-deterministic") {
    const SensitivityMaps a = biot_savart_maps(32, 32, 4, 18.0);
    const SensitivityMaps b = biot_savart_maps(32, 32, 4, 18.0);
    for (int i = 0; i < 4; ++i) CHECK(oracle::max_abs_diff(a.maps[i], b.maps[i]) == 0.0);
}

TEST_CASE("coil_project with a unit map and full order is the plain fft") {
    Rng rng(31);
    const ComplexImage x = oracle::random_image(rng, 16, 16);
    SensitivityMaps unit;
    unit.maps.push_back(ComplexImage(16, 16));
    for (cplx& v : unit.maps[0].data()) v = cplx(1.0, 0.0);
    const ScanOrder order = make_full_order(16);
    const MultiCoilKSpace k = coil_project(x, unit, order);
    CHECK(oracle::max_abs_diff(k.planes[0], fft2_centered(x)) == 0.0);
}

TEST_CASE("US260 projection zeroes exactly 127 columns per plane") {
    Rng rng(32);
    const ComplexImage x = oracle::random_image(rng, 8, 260);
    const SensitivityMaps maps = biot_savart_maps(8, 260, 2, 80.0);
    const ScanOrder order = build_scan_order(ScanOrder::Kind::US260, 260);
    const MultiCoilKSpace k = coil_project(x, maps, order);
    for (const ComplexImage& plane : k.planes) {
        int zero_cols = 0;
        for (int c = 0; c < 260; ++c) {
            bool all_zero = true;
            for (int r = 0; r < 8; ++r) {
                if (plane.at(r, c) != cplx(0.0, 0.0)) all_zero = false;
            }
            if (all_zero) ++zero_cols;
        }
        CHECK(zero_cols == 127);
    }
}

TEST_CASE("projecting the zero image gives zero k-space") {
    const ComplexImage x(16, 16);
    const SensitivityMaps maps = biot_savart_maps(16, 16, 3, 10.0);
    const MultiCoilKSpace k = coil_project(x, maps, make_full_order(16));
    for (const ComplexImage& plane : k.planes) CHECK(plane.norm2() == 0.0);
}

TEST_CASE("coil_combine inverts coil_project on fully-sampled orders") {
    Rng rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const int h = 16, w = 16;
        const ComplexImage x = oracle::random_image(rng, h, w);
        const SensitivityMaps maps = oracle::random_maps(rng, h, w, 4);
        const ScanOrder order = make_full_order(w);
        const ComplexImage back = coil_combine(coil_project(x, maps, order), maps);
        CHECK(oracle::rel_err(back, x) < 1e-10);
    }
}

TEST_CASE("coil_combine with a unit single coil reduces to the inverse fft") {
    Rng rng(34);
    MultiCoilKSpace k;
    k.order = make_full_order(16);
    k.planes.push_back(oracle::random_image(rng, 16, 16));
    SensitivityMaps unit;
    unit.maps.push_back(ComplexImage(16, 16));
    for (cplx& v : unit.maps[0].data()) v = cplx(1.0, 0.0);
    CHECK(oracle::max_abs_diff(coil_combine(k, unit), ifft2_centered(k.planes[0])) == 0.0);
}

TEST_CASE("coil_combine of all-zero k-space is the zero image") {
    const SensitivityMaps maps = biot_savart_maps(16, 16, 2, 10.0);
    MultiCoilKSpace k;
    k.order = make_full_order(16);
    k.planes.assign(2, ComplexImage(16, 16));
    CHECK(coil_combine(k, maps).norm2() == 0.0);
}

TEST_CASE("coil count mismatches are rejected") {
    const SensitivityMaps maps = biot_savart_maps(16, 16, 2, 10.0);
    MultiCoilKSpace k;
    k.order = make_full_order(16);
    k.planes.assign(3, ComplexImage(16, 16));
    CHECK_THROWS_AS(coil_combine(k, maps), std::invalid_argument);
}
