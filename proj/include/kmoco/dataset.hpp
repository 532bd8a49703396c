#pragma once

#include "kmoco/coils.hpp"
#include "kmoco/motion.hpp"
#include "kmoco/partition.hpp"
#include "kmoco/phantom.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kmoco {

// One supervised pair: corrupted acquisition, its DP mask, and the target
// reconstructed from the full k-space of the selected dominant pose.
struct TrainSample {
    std::uint64_t seed = 0;
    MotionTrace trace;
    SampleMask mask;
    MultiCoilKSpace k_cor;
    ComplexImage y_dp;
};

struct Dataset {
    ScanOrder order;
    SensitivityMaps maps;
    int height = 0;
    std::vector<TrainSample> samples;

    int width() const { return order.n_columns(); }
};

struct GenConfig {
    int height = 64;
    MotionConfig motion;
    double coil_radius = 0.0; // 0: 0.55 * min(height, width)
    int n_coils = 4;
    int dp_band = 0; // 0: width / 8
};

// Deterministic per-seed pipeline: phantom -> trace -> corrupted k-space ->
// DP selection -> full-k-space DP target. `threads` parallelizes over seeds
// without changing the result.
Dataset generate_dataset(const std::vector<std::uint64_t>& seeds, const ScanOrder& order,
                         const GenConfig& cfg, int threads = 1);

// The MKSP1 container: magic, little-endian header (order, dims, coils, maps),
// then per-sample records (seed, trace, mask, k-space planes, target), each
// guarded by a CRC32. Complex arrays are interleaved 32-bit floats.
void save_dataset(const Dataset& ds, std::ostream& out);
void save_dataset_file(const Dataset& ds, const std::string& path);
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

// Single-image container (MKIM1), same binary conventions.
void save_image_file(const ComplexImage& img, const std::string& path);
ComplexImage load_image_file(const std::string& path);

int effective_dp_band(const GenConfig& cfg, int width);

} // namespace kmoco
