#pragma once

#include "kmoco/dataset.hpp"
#include "kmoco/loss.hpp"
#include "kmoco/net/cascade.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kmoco {

struct OptimConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 30;
    int batch_size = 8;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct EpochLog {
    int epoch;
    double train_loss;
    double val_loss;
};

// Branch inputs derived once per sample: the DP/RP split and its zero-filled
// reconstructions.
struct PreparedSample {
    ComplexImage x0_dp;
    ComplexImage x0_rp;
    SampleMask mask;
    MultiCoilKSpace k_dp;
    const ComplexImage* y_dp = nullptr;
};

PreparedSample prepare_sample(const TrainSample& s, const SensitivityMaps& maps);

struct ModelSpec {
    net::NetworkConfig config;
    net::Variant variant = net::Variant::TwoBranch;
};

// Adam over the Eq-8 loss. Gradients are averaged over each batch (samples
// processed in parallel, summed in index order, so results do not depend on
// the thread count). Returns the weights with the best validation loss, or
// the final weights when `val` is empty. NaN losses abort with a diagnostic.
net::Weights train(const Dataset& train_set, const Dataset& val_set, const ModelSpec& model,
                   const OptimConfig& opt, std::vector<EpochLog>* log = nullptr);

enum class EvalVariant { ZeroFilled, SingleBranch, TwoBranch };
std::string eval_variant_name(EvalVariant v);

struct SampleMetrics {
    int sample_id;
    EvalVariant variant;
    double nmse;
    double nmse_mag;
    double ssim;
};

struct MetricsSummary {
    EvalVariant variant;
    std::string scan_order;
    int n = 0;
    double mean_nmse = 0.0;
    double mean_nmse_mag = 0.0;
    double mean_ssim = 0.0;
};

// Per-sample NMSE (complex, primary), magnitude NMSE, and SSIM on magnitude
// images against the DP target. ZeroFilled evaluates x0_dp with no network.
std::vector<SampleMetrics> evaluate(const Dataset& ds, EvalVariant variant,
                                    const net::Weights* weights, int threads = 1);

MetricsSummary summarize(const std::vector<SampleMetrics>& rows, EvalVariant variant,
                         const std::string& scan_order);

// Mean Eq-8 loss of the variant's forward pass over a dataset.
double mean_loss(const Dataset& ds, const net::Weights& w, int threads = 1);

} // namespace kmoco
