#include "kmoco/dataset.hpp"

#include "kmoco/parallel.hpp"
#include "kmoco/resample.hpp"

#include <algorithm>
#include <stdexcept>

namespace kmoco {

int effective_dp_band(const GenConfig& cfg, int width) {
    if (cfg.dp_band > 0) return cfg.dp_band;
    return std::max(1, width / 8);
}

Dataset generate_dataset(const std::vector<std::uint64_t>& seeds, const ScanOrder& order,
                         const GenConfig& cfg, int threads) {
    if (seeds.empty()) throw std::invalid_argument("generate_dataset: no seeds given");
    if (cfg.height < 16) throw std::invalid_argument("generate_dataset: height must be >= 16");

    const int width = order.n_columns();
    const double radius =
        cfg.coil_radius > 0.0 ? cfg.coil_radius : 0.55 * std::min(cfg.height, width);

    Dataset ds;
    ds.order = order;
    ds.height = cfg.height;
    ds.maps = biot_savart_maps(cfg.height, width, cfg.n_coils, radius);
    ds.samples.resize(seeds.size());

    const ScanOrder full = make_full_order(width);
    const int band = effective_dp_band(cfg, width);

    parallel_for(static_cast<int>(seeds.size()), threads, [&](int i) {
        const std::uint64_t seed = seeds[i];
        const Phantom ph = synth_phantom(seed, cfg.height, width);
        Rng trace_rng(Rng::derive_seed(seed, 0x7472616365ULL));
        const MotionTrace trace = sample_motion_trace(trace_rng, order, cfg.motion);

        TrainSample s;
        s.seed = seed;
        s.trace = trace;
        s.k_cor = simulate_corrupted(ph.image, ds.maps, order, trace);

        const DpSelection sel = select_dp(order, trace, band);
        s.mask = sel.mask;

        // target: full-k-space reconstruction of the DP pose's image
        const ComplexImage x_dp = sel.pose_index == 0
                                      ? ph.image
                                      : resample_rigid(ph.image, trace.transforms[sel.pose_index - 1]);
        s.y_dp = coil_combine(coil_project(x_dp, ds.maps, full), ds.maps);
        ds.samples[i] = std::move(s);
    });
    return ds;
}

} // namespace kmoco
