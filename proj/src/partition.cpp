#include "kmoco/partition.hpp"

#include "kmoco/fft.hpp"

#include <algorithm>
#include <stdexcept>

namespace kmoco {

DpSelection select_dp(const ScanOrder& order, const MotionTrace& trace, int band) {
    const std::vector<std::vector<int>> poses = pose_intervals(order, trace);
    const std::vector<int> rank = center_rank_of_column(order.n_columns());

    int best_pose = 0;
    int best_band = -1;
    int best_total = -1;
    for (std::size_t p = 0; p < poses.size(); ++p) {
        int in_band = 0;
        for (int col : poses[p]) {
            if (rank[col] < band) ++in_band;
        }
        const int total = static_cast<int>(poses[p].size());
        if (in_band > best_band || (in_band == best_band && total > best_total)) {
            best_band = in_band;
            best_total = total;
            best_pose = static_cast<int>(p);
        }
    }

    DpSelection sel;
    sel.pose_index = best_pose;
    sel.center_coverage = best_band;
    sel.mask = SampleMask::zeros(order.n_columns());
    for (int col : poses[best_pose]) sel.mask.bits[col] = 1;
    return sel;
}

std::pair<MultiCoilKSpace, MultiCoilKSpace> split(const MultiCoilKSpace& k_cor,
                                                  const SampleMask& m) {
    if (m.width() != k_cor.width()) throw std::invalid_argument("split: mask width mismatch");

    MultiCoilKSpace k_dp;
    MultiCoilKSpace k_rp;
    k_dp.order = k_cor.order;
    k_rp.order = k_cor.order;
    for (const ComplexImage& plane : k_cor.planes) {
        ComplexImage dp(plane.height(), plane.width());
        ComplexImage rp(plane.height(), plane.width());
        for (int r = 0; r < plane.height(); ++r) {
            const cplx* src = plane.row(r);
            cplx* d = dp.row(r);
            cplx* q = rp.row(r);
            for (int c = 0; c < plane.width(); ++c) {
                if (m.bits[c]) {
                    d[c] = src[c];
                } else {
                    q[c] = src[c];
                }
            }
        }
        k_dp.planes.push_back(std::move(dp));
        k_rp.planes.push_back(std::move(rp));
    }
    return {std::move(k_dp), std::move(k_rp)};
}

ComplexImage zero_filled_recon(const MultiCoilKSpace& k, const SensitivityMaps& maps) {
    return coil_combine(k, maps);
}

ComplexImage data_consistency_linear(const ComplexImage& x_tilde, const SampleMask& m,
                                     const SensitivityMaps& maps) {
    if (m.width() != x_tilde.width())
        throw std::invalid_argument("data_consistency: mask width mismatch");
    if (x_tilde.height() != maps.height() || x_tilde.width() != maps.width())
        throw std::invalid_argument("data_consistency: image/map shape mismatch");

    ComplexImage out(x_tilde.height(), x_tilde.width());
    for (int i = 0; i < maps.n_coils(); ++i) {
        ComplexImage k = fft2_centered(hadamard(x_tilde, maps.maps[i]));
        for (int r = 0; r < k.height(); ++r) {
            cplx* row = k.row(r);
            for (int c = 0; c < k.width(); ++c) {
                if (m.bits[c]) row[c] = cplx(0.0, 0.0);
            }
        }
        const ComplexImage xi = ifft2_centered(k);
        const ComplexImage& s = maps.maps[i];
        for (int r = 0; r < out.height(); ++r) {
            cplx* o = out.row(r);
            const cplx* x = xi.row(r);
            const cplx* sr = s.row(r);
            for (int c = 0; c < out.width(); ++c) o[c] += x[c] * std::conj(sr[c]);
        }
    }
    return out;
}

ComplexImage data_consistency(const ComplexImage& x_tilde, const SampleMask& m,
                              const MultiCoilKSpace& k_dp, const SensitivityMaps& maps) {
    if (m.width() != x_tilde.width())
        throw std::invalid_argument("data_consistency: mask width mismatch");
    if (k_dp.n_coils() != maps.n_coils())
        throw std::invalid_argument("data_consistency: coil count mismatch");
    if (x_tilde.height() != maps.height() || x_tilde.width() != maps.width() ||
        k_dp.height() != x_tilde.height() || k_dp.width() != x_tilde.width())
        throw std::invalid_argument("data_consistency: shape mismatch");
    for (const ComplexImage& plane : k_dp.planes) {
        for (int r = 0; r < plane.height(); ++r) {
            const cplx* row = plane.row(r);
            for (int c = 0; c < plane.width(); ++c) {
                if (!m.bits[c] && (row[c].real() != 0.0 || row[c].imag() != 0.0))
                    throw std::invalid_argument("data_consistency: k_dp nonzero off-mask");
            }
        }
    }

    ComplexImage out(x_tilde.height(), x_tilde.width());
    for (int i = 0; i < maps.n_coils(); ++i) {
        ComplexImage k = fft2_centered(hadamard(x_tilde, maps.maps[i]));
        const ComplexImage& meas = k_dp.planes[i];
        for (int r = 0; r < k.height(); ++r) {
            cplx* row = k.row(r);
            const cplx* mrow = meas.row(r);
            for (int c = 0; c < k.width(); ++c) {
                if (m.bits[c]) row[c] = mrow[c]; // re-impose measured DP data
            }
        }
        const ComplexImage xi = ifft2_centered(k);
        const ComplexImage& s = maps.maps[i];
        for (int r = 0; r < out.height(); ++r) {
            cplx* o = out.row(r);
            const cplx* x = xi.row(r);
            const cplx* sr = s.row(r);
            for (int c = 0; c < out.width(); ++c) o[c] += x[c] * std::conj(sr[c]);
        }
    }
    return out;
}

} // namespace kmoco
