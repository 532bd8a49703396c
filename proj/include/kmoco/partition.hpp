#pragma once

#include "kmoco/coils.hpp"
#include "kmoco/motion.hpp"

namespace kmoco {

// Per-column binary mask over k-space columns. Broadcast down rows wherever
// it multiplies a plane.
struct SampleMask {
    std::vector<unsigned char> bits;

    int width() const { return static_cast<int>(bits.size()); }
    static SampleMask ones(int width) { return SampleMask{std::vector<unsigned char>(width, 1)}; }
    static SampleMask zeros(int width) { return SampleMask{std::vector<unsigned char>(width, 0)}; }
    int count() const {
        int n = 0;
        for (unsigned char b : bits) n += b;
        return n;
    }
};

struct DpSelection {
    int pose_index = 0;
    SampleMask mask;
    int center_coverage = 0; // central-band columns held by the dominant pose
};

// Pick the dominant pose: the one holding the most columns whose
// distance-from-center rank is below `band`. Ties go to the larger total
// column count, then to the earlier pose. Uses timings only, never the
// transforms.
DpSelection select_dp(const ScanOrder& order, const MotionTrace& trace, int band = 32);

// k_dp = m .* k_cor and k_rp = (1-m) .* k_cor, per coil. Exact partition.
std::pair<MultiCoilKSpace, MultiCoilKSpace> split(const MultiCoilKSpace& k_cor,
                                                  const SampleMask& m);

// Coil combination of (masked) k-space with missing entries left at zero.
ComplexImage zero_filled_recon(const MultiCoilKSpace& k, const SensitivityMaps& maps);

// The data-consistency operator: per coil, k_i_dp + (1-m) .* F{x_tilde .* s_i},
// inverse transformed and conjugate-map combined. Measured DP columns are
// re-imposed verbatim; every other column (acquired-but-remaining-pose and
// never-acquired alike) carries the estimate through, so under-sampled runs
// let the network fill the unmeasured frequencies.
// k_dp must be zero off-mask.
ComplexImage data_consistency(const ComplexImage& x_tilde, const SampleMask& m,
                              const MultiCoilKSpace& k_dp, const SensitivityMaps& maps);

// Linear part of the DC operator (its value at k_dp = 0). Self-adjoint; the
// training backward pass reuses it as its own adjoint.
ComplexImage data_consistency_linear(const ComplexImage& x_tilde, const SampleMask& m,
                                     const SensitivityMaps& maps);

} // namespace kmoco
